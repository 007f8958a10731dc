"""ODE system container, rhs evaluation helpers and Jacobians."""

import numpy as np
import pytest

from stiffbvp import (EvaluationError, FLOAT64, LONGDOUBLE, OdeSystem,
                      eval_jacobian, eval_rhs, eval_rhs_batch, fd_jacobian,
                      from_second_order, troesch)


def test_troesch_rhs_values():
    system = troesch(1.0).system
    np.testing.assert_array_equal(eval_rhs(system, [0.0, 0.0], 0.5), [0, 0])
    np.testing.assert_allclose(eval_rhs(system, [1.0, 0.0], 0.0),
                               [0.0, np.sinh(1.0)], rtol=1e-15)
    out = eval_rhs(troesch(3.0).system, [1.0, 0.0], 0.0)
    np.testing.assert_allclose(out, [0.0, 3.0 * np.sinh(3.0)], rtol=1e-15)
    assert abs(out[1] - 30.0536) < 1e-3


def test_rhs_shape_checked():
    system = OdeSystem(2, lambda u, t: np.array([1.0]))
    with pytest.raises(EvaluationError):
        eval_rhs(system, [0.0, 0.0], 0.0)


def test_nonfinite_rhs_raises():
    system = OdeSystem(2, lambda u, t: np.array([1.0, np.inf]))
    with pytest.raises(EvaluationError) as exc:
        eval_rhs(system, [0.0, 0.0], 0.0)
    assert exc.value.component == 2


def test_batch_matches_loop():
    system = troesch(2.0).system
    rng = np.random.default_rng(0)
    U = rng.uniform(-1, 1, size=(2, 9))
    T = rng.uniform(0, 1, size=9)
    batch = eval_rhs_batch(system, U, T)
    for b in range(9):
        np.testing.assert_array_equal(batch[:, b],
                                      eval_rhs(system, U[:, b], T[b]))


def test_batch_falls_back_for_scalar_only_rhs():
    def rhs(u, t):
        # deliberately not vectorized
        return np.array([float(u[1]), float(u[0]) + float(t)])

    system = OdeSystem(2, rhs)
    U = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    T = np.array([0.1, 0.2, 0.3])
    out = eval_rhs_batch(system, U, T)
    np.testing.assert_allclose(out, [[4.0, 5.0, 6.0], [1.1, 2.2, 3.3]])


def test_batch_nonfinite_raises():
    system = OdeSystem(2, lambda u, t: np.stack([u[0], 1.0 / u[1]]))
    with pytest.raises(EvaluationError):
        eval_rhs_batch(system, np.array([[1.0], [0.0]]), np.array([0.0]))


def test_troesch_analytic_jacobian_at_origin():
    # d(lam*sinh(lam*u1))/du1 = lam**2*cosh(lam*u1) = 1 at lam=1, u1=0
    J = eval_jacobian(troesch(1.0).system, [0.0, 0.0], 0.0)
    np.testing.assert_allclose(J, [[0, 1, 0], [1, 0, 0]], atol=1e-12)


def test_fd_matches_analytic_jacobian():
    system = troesch(3.0).system
    rng = np.random.default_rng(7)
    for _ in range(20):
        u = rng.uniform(-1, 1, size=2)
        t = rng.uniform(0, 1)
        J_an = eval_jacobian(system, u, t)
        J_fd = fd_jacobian(system, u, t)
        np.testing.assert_allclose(J_fd, J_an, rtol=1e-7, atol=1e-8)


def test_constant_rhs_zero_jacobian():
    system = OdeSystem(2, lambda u, t: np.array([3.0, -1.0]))
    J = fd_jacobian(system, [0.4, -0.2], 0.5)
    np.testing.assert_allclose(J, np.zeros((2, 3)), atol=1e-8)


def test_linear_system_jacobian_equals_matrix():
    A = np.array([[0.0, 1.0], [2.0, -3.0]])
    system = OdeSystem(2, lambda u, t: A @ np.asarray(u, dtype=float))
    rng = np.random.default_rng(3)
    for _ in range(5):
        u = rng.uniform(-5, 5, size=2)
        J = fd_jacobian(system, u, 0.3)
        np.testing.assert_allclose(J[:, :2], A, rtol=1e-8, atol=1e-8)
        np.testing.assert_allclose(J[:, 2], 0.0, atol=1e-8)


def test_jac_shape_validation():
    system = OdeSystem(2, lambda u, t: np.array([u[1], u[0]]),
                       jac=lambda u, t: np.zeros((2, 2)))
    with pytest.raises(EvaluationError):
        eval_jacobian(system, [0.0, 0.0], 0.0)


def test_with_params_rebuilds():
    system = troesch(3.0).system
    updated = system.with_params(lam=4.0)
    assert updated.params["lam"] == 4.0
    assert updated.rhs is system.rhs


def test_dimension_validated():
    with pytest.raises(ValueError):
        OdeSystem(0, lambda u, t: u)


def test_from_second_order_zero_rhs():
    system = from_second_order(lambda up, u, t: 0.0)
    out = eval_rhs(system, [1.0, 2.5], 0.3)
    np.testing.assert_array_equal(out, [2.5, 0.0])


def test_from_second_order_matches_troesch():
    lam = 2.0
    system = from_second_order(lambda up, u, t: lam * np.sinh(lam * u))
    direct = troesch(lam).system
    rng = np.random.default_rng(5)
    for _ in range(10):
        u = rng.uniform(-1, 1, size=2)
        np.testing.assert_allclose(eval_rhs(system, u, 0.1),
                                   eval_rhs(direct, u, 0.1), rtol=1e-14)


def test_backend_steps():
    assert FLOAT64.eps == np.finfo(np.float64).eps
    assert FLOAT64.fd_rel_step == pytest.approx(FLOAT64.eps ** (1 / 3))
    assert FLOAT64.fd_step(0.0) == FLOAT64.fd_rel_step
    assert FLOAT64.fd_step(10.0) == pytest.approx(10 * FLOAT64.fd_rel_step)
    assert LONGDOUBLE.eps <= FLOAT64.eps
