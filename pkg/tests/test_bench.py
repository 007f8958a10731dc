"""Continuation protocol, error curves and CSV round trips."""

import csv
import math

import numpy as np
import pytest

from stiffbvp import (ColdStartFailure, ConfigError, ContinuationOracle,
                      GrowthZoneStrategy, IdentityStrategy, NewtonConfig,
                      RefinementConfig, SrnConfig, StopCriterion, Transform,
                      endpoint_derivatives, error_curve, export_solution,
                      import_solution, run_continuation, solve_spec, troesch,
                      uniform_mesh, write_error_curve, write_srn_result)

from conftest import ENERGY_REFS, rel_err


def test_uniform_mesh():
    mesh = uniform_mesh(troesch(3.0), 0.1)
    assert mesh.knot_count == 11
    np.testing.assert_allclose(mesh.T, np.linspace(0, 1, 11))
    np.testing.assert_allclose(mesh.U[:, 0], mesh.T)
    np.testing.assert_allclose(mesh.U[:, 1], 1.0)


def test_endpoint_derivatives(troesch3):
    sol = solve_spec(troesch3, uniform_mesh(troesch3, 0.01),
                     IdentityStrategy())
    d0, d1 = endpoint_derivatives(sol)
    assert rel_err(d0, ENERGY_REFS[3.0][0]) < 2e-3
    assert rel_err(d1, ENERGY_REFS[3.0][1]) < 2e-3


def test_srn_config_validation():
    with pytest.raises(ConfigError):
        SrnConfig(delta_lambda=0.0)
    with pytest.raises(ConfigError):
        SrnConfig(lambda0=10.0, lambda_cap=5.0)


def test_cold_start_failure():
    cfg = SrnConfig(lambda0=30.0, h0=0.1, lambda_cap=40.0,
                    stop=StopCriterion.CONVERGENCE)
    with pytest.raises(ColdStartFailure):
        run_continuation(troesch, cfg)


def test_continuation_stops():
    acc = run_continuation(troesch, SrnConfig(h0=0.1))
    assert acc.stop_reason is StopCriterion.ACCURACY
    conv = run_continuation(troesch, SrnConfig(
        h0=0.1, stop=StopCriterion.CONVERGENCE))
    assert conv.stop_reason is StopCriterion.CONVERGENCE
    # losing all accuracy precedes losing convergence
    assert acc.srn <= conv.srn
    assert 4 <= conv.srn <= 20
    for row in acc.per_lambda:
        assert row["rel_err_u2_0"] < 1.0 or math.isnan(row["rel_err_u2_0"])


def test_continuation_is_deterministic():
    r1 = run_continuation(troesch, SrnConfig(h0=0.1))
    r2 = run_continuation(troesch, SrnConfig(h0=0.1))
    assert r1.srn == r2.srn
    assert r1.per_lambda == r2.per_lambda


def test_lambda_cap_stop():
    cfg = SrnConfig(h0=0.1, lambda_cap=4.0,
                    stop=StopCriterion.CONVERGENCE)
    out = run_continuation(troesch, cfg)
    assert out.stop_reason is StopCriterion.LAMBDA_CAP
    assert out.srn == 4.0


def test_oracle_matches_energy_reference():
    oracle = ContinuationOracle(troesch)
    d0, d1 = oracle.endpoints(3.0, 1e-3)
    assert rel_err(d0, ENERGY_REFS[3.0][0]) < 1e-5
    assert rel_err(d1, ENERGY_REFS[3.0][1]) < 1e-5
    # chain is cached: a second call must not recompute
    assert oracle.solution(3.0, 1e-3) is oracle.solution(3.0, 1e-3)


def test_error_curve_rows_and_failures():
    rows = error_curve(troesch, [3.0, 30.0], strategy=IdentityStrategy(),
                       h0=0.1)
    assert rows[0]["failed"] is False
    assert rows[0]["rel_err_u2_0"] < 1.0
    # an unaided coarse identity solve cannot reach lam = 30
    assert rows[1]["failed"] is True
    assert rows[1]["rel_err_u2_0"] is None


def test_error_curve_transformed_config():
    # adaptive two-zone configuration stays accurate at lam = 2
    rows = error_curve(troesch, [2.0], strategy=GrowthZoneStrategy(),
                       rcfg=RefinementConfig(M=0.1, h_min=1e-3, h_max=1e-3),
                       h0=0.01)
    e = rows[0]["rel_err_u2_0"]
    assert 3.57e-7 / 3 < e < 3.57e-7 * 3


def test_solution_export_import_round_trip(tmp_path, troesch3):
    sol = solve_spec(troesch3, uniform_mesh(troesch3, 0.05),
                     IdentityStrategy())
    tail = Transform(swap=1, flips={2})
    m = sol.mesh.interval_count
    sol.mesh.transforms[m - 1] = tail
    path = tmp_path / "solution.csv"
    export_solution(sol, path)
    back = import_solution(path)
    np.testing.assert_array_equal(back.T, sol.mesh.T)
    np.testing.assert_array_equal(back.U, sol.mesh.U)
    assert back.transforms == sol.mesh.transforms


def test_export_row_count(tmp_path):
    from stiffbvp import EvolvingMesh, Solution
    T = np.array([0.0, 0.5, 1.0])
    mesh = EvolvingMesh(np.column_stack([T, np.ones(3)]), T)
    path = tmp_path / "tiny.csv"
    export_solution(Solution(mesh, 0, 0.0), path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 4
    assert rows[0] == ["t", "u1", "u2", "transform"]
    assert [r[3] for r in rows[1:]] == ["I", "I", "I"]


def test_exported_solution_monotone(tmp_path):
    # the solution's first component is nondecreasing in t
    spec = troesch(3.0)
    sol = solve_spec(spec, uniform_mesh(spec, 0.1), GrowthZoneStrategy(),
                     NewtonConfig(),
                     RefinementConfig(M=0.1, h_min=0.01, h_max=0.1))
    for lam in (4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0):
        spec = troesch(lam)
        sol = solve_spec(spec, sol.mesh, GrowthZoneStrategy(), NewtonConfig(),
                         RefinementConfig(M=0.1, h_min=0.01, h_max=0.1))
    path = tmp_path / "troesch10.csv"
    export_solution(sol, path)
    mesh = import_solution(path)
    assert (np.diff(mesh.U[:, 0]) >= 0).all()
    assert (np.diff(mesh.T) > 0).all()


def test_write_srn_result(tmp_path):
    result = run_continuation(troesch, SrnConfig(h0=0.1))
    path = tmp_path / "srn.csv"
    write_srn_result(result, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "lambda"
    assert rows[-1][0] == "srn"
    assert float(rows[-1][1]) == result.srn
    assert rows[-1][2] == "accuracy"


def test_write_error_curve(tmp_path):
    rows = [{"lambda": 3.0, "rel_err_u2_0": 1e-4, "rel_err_u2_1": 2e-4,
             "mesh_size": 11, "failed": False},
            {"lambda": 30.0, "failed": True}]
    path = tmp_path / "errors.csv"
    write_error_curve(rows, path)
    with open(path, newline="") as fh:
        out = list(csv.reader(fh))
    assert out[1][-1] == "ok"
    assert out[2] == ["30", "", "", "", "failed"]
