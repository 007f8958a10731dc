"""Trapezoidal discretization over a transformed mesh, solved by damped Newton.

Each interval's equation is written in that interval's natural variables:

    (q_{i+1} - q_i) / (tau_{i+1} - tau_i)
        = (T(F)(q_{i+1}, tau_{i+1}) + T(F)(q_i, tau_i)) / 2

The unknowns follow the natural-unknowns convention: the free coordinates
of knot i > 0 are the natural dependent variables of the interval
preceding it, and those of knot 0 belong to the first interval.  The
natural independent value tau of every knot stays fixed during a Newton
sweep, so the unknown count is always (m+1)*n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .backend import DEFAULT_BACKEND, ScalarBackend
from .errors import (ConfigError, DomainError, EvaluationError,
                     NonConvergence, NonStationaryBoundary,
                     SingularLinearSystem, SingularStepError)
from .mesh import (EvolvingMesh, RefinementConfig, _transform_groups,
                   normalize, refine)
from .ode_system import BoundaryConditions, OdeSystem, eval_rhs_batch
from .transform import Transform, apply, map_state, unmap_state


@dataclass
class SegmentedProblem:
    """An ODE system, its boundary conditions, a transformed mesh iterate,
    and the fixed domain [a, b] of the original independent variable."""

    system: OdeSystem
    bc: BoundaryConditions
    mesh: EvolvingMesh
    domain: Tuple[float, float]

    def __post_init__(self):
        a, b = self.domain
        if not a < b:
            raise ConfigError("domain must satisfy a < b")
        if self.mesh.n != self.system.n:
            raise ConfigError("mesh dimension does not match system")


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iters: int = 50
    damping: float = 1.0          # initial line-search factor, halved on reject
    min_damping: float = 2.0 ** -20
    max_outer: int = 40           # transform/refinement outer iterations

    def __post_init__(self):
        if not (self.tol > 0):
            raise ConfigError("tol must be positive")
        if self.max_iters < 1 or self.max_outer < 1:
            raise ConfigError("iteration budgets must be positive")
        if not (0 < self.damping <= 1):
            raise ConfigError("damping must lie in (0, 1]")


@dataclass
class Solution:
    """Converged iterate in original variables plus run statistics."""

    mesh: EvolvingMesh
    iterations: int
    residual_norm: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def knots(self):
        return self.mesh.knots


@dataclass
class BlockJacobian:
    """Block-bidiagonal Newton matrix.

    Row block i (i < m) holds interval i's residual derivatives: ``A[i]``
    with respect to knot i's free coordinates and ``B[i]`` with respect to
    knot i+1's.  The last row block holds the boundary residual
    derivatives ``C`` (knot 0) and ``D`` (knot m).
    """

    A: np.ndarray       # (m, n, n)
    B: np.ndarray       # (m, n, n)
    C: np.ndarray       # (n, n)
    D: np.ndarray       # (n, n)

    def todense(self) -> np.ndarray:
        m, n, _ = self.A.shape
        J = np.zeros(((m + 1) * n, (m + 1) * n))
        for i in range(m):
            J[i * n:(i + 1) * n, i * n:(i + 1) * n] = self.A[i]
            J[i * n:(i + 1) * n, (i + 1) * n:(i + 2) * n] = self.B[i]
        J[m * n:, :n] = self.C
        J[m * n:, m * n:] = self.D
        return J


def check_boundary_transforms(mesh: EvolvingMesh, bc: BoundaryConditions):
    """Reject swaps on boundary intervals whose component is not pinned.

    Returns the substituted bc rows (left_row, right_row); each is None
    when the corresponding end keeps its original condition.
    """
    sub = []
    for side, tr in (("a", mesh.transforms[0]), ("b", mesh.transforms[-1])):
        if tr.swap is None:
            sub.append(None)
            continue
        pin = bc.pins.get((side, tr.swap))
        if pin is None:
            raise NonStationaryBoundary(
                f"swap of component {tr.swap} on the {side}-side interval "
                f"needs a Dirichlet condition pinning it there")
        sub.append(int(pin[0]))
    return tuple(sub)


def anchor_pins(mesh: EvolvingMesh, bc: BoundaryConditions, a: float,
                b: float) -> EvolvingMesh:
    """Impose Dirichlet data that acts as a fixed natural coordinate.

    When a boundary interval carries a swap, the pinned component becomes
    that knot's tau and is set to the pinned value exactly; without a swap
    the knot's t is re-anchored to the domain end."""
    out = mesh.copy()
    tr0, trm = out.transforms[0], out.transforms[-1]
    if tr0.swap is not None:
        pin = bc.pins.get(("a", tr0.swap))
        if pin is not None:
            out.U[0, tr0.swap - 1] = pin[1]
    else:
        out.T[0] = a
    if trm.swap is not None:
        pin = bc.pins.get(("b", trm.swap))
        if pin is not None:
            out.U[-1, trm.swap - 1] = pin[1]
    else:
        out.T[-1] = b
    return out


class _Sweep:
    """One fixed-structure Newton solve: mesh topology, transforms and all
    knot tau values are frozen; only the free coordinates move."""

    def __init__(self, problem: SegmentedProblem,
                 backend: ScalarBackend = DEFAULT_BACKEND):
        mesh = problem.mesh
        self.system = problem.system
        self.bc = problem.bc
        self.backend = backend
        self.a, self.b = problem.domain
        self.n = mesh.n
        self.m = mesh.interval_count
        self.transforms: List[Transform] = list(mesh.transforms)
        self.sub_left, self.sub_right = check_boundary_transforms(
            mesh, problem.bc)
        # owner of knot i: interval i-1 for i > 0, interval 0 for knot 0
        self.owners = [self.transforms[0]] + self.transforms
        self.tsys = {tr: apply(tr, self.system)
                     for tr in set(self.transforms)}
        self.groups = [(tr, np.asarray(idx)) for tr, idx in
                       _by_transform(self.transforms).items()]
        # left knots whose owner differs from the interval transform
        diff = [i for i in range(self.m)
                if self.owners[i] != self.transforms[i]]
        pairs = {}
        for i in diff:
            pairs.setdefault((self.owners[i], self.transforms[i]), []).append(i)
        self.diff_pairs = [(o, tr, np.asarray(idx))
                           for (o, tr), idx in pairs.items()]
        # freeze taus and collect the free coordinates
        self.tau = np.empty(self.m + 1)
        self.Q0 = np.empty((self.m + 1, self.n))
        for owner, idx in _by_transform(self.owners).items():
            idx = np.asarray(idx)
            s = map_state(owner, mesh.U[idx].T, mesh.T[idx])
            self.Q0[idx] = s.q.T
            self.tau[idx] = s.tau

    # -- residual ---------------------------------------------------------

    def states(self, Q: np.ndarray):
        """Original-variable states (U, T) of all knots."""
        U = np.empty((self.m + 1, self.n))
        T = np.empty(self.m + 1)
        for owner, idx in _by_transform(self.owners).items():
            idx = np.asarray(idx)
            u, t = unmap_state(owner, Q[idx].T, self.tau[idx])
            U[idx] = u.T
            T[idx] = t
        return U, T

    def interval_residual(self, QL: np.ndarray, QR: np.ndarray) -> np.ndarray:
        """Residuals of all interval equations, shape (m, n).

        ``QL``/``QR`` hold the free coordinates of each interval's left
        and right knot.  Right knots are owned by their interval, so their
        coordinates are already natural; a left knot at a transform switch
        is re-expressed through the original variables.
        """
        qL = QL.copy()
        tauL = self.tau[:-1].copy()
        for owner, tr, idx in self.diff_pairs:
            u, t = unmap_state(owner, QL[idx].T, self.tau[idx])
            s = map_state(tr, u, t)
            qL[idx] = s.q.T
            tauL[idx] = s.tau
        out = np.empty((self.m, self.n))
        for tr, idx in self.groups:
            dtau = self.tau[idx + 1] - tauL[idx]
            if np.any(dtau == 0.0):
                j = int(idx[np.argmax(dtau == 0.0)])
                raise SingularStepError(
                    f"zero natural step on interval {j}")
            fL = eval_rhs_batch(self.tsys[tr], qL[idx].T, tauL[idx])
            fR = eval_rhs_batch(self.tsys[tr], QR[idx].T, self.tau[idx + 1])
            out[idx] = ((QR[idx] - qL[idx]) / dtau[:, None]
                        - 0.5 * (fL + fR).T)
        return out

    def bc_residual(self, q0: np.ndarray, qm: np.ndarray) -> np.ndarray:
        u_a, t_a = unmap_state(self.owners[0], q0, self.tau[0])
        u_b, t_b = unmap_state(self.owners[-1], qm, self.tau[-1])
        g = np.array(self.bc.residual(u_a, u_b), dtype=float)
        if g.shape != (self.n,):
            raise EvaluationError(
                f"boundary residual has shape {g.shape}, expected ({self.n},)")
        if self.sub_left is not None:
            g[self.sub_left] = t_a - self.a
        if self.sub_right is not None:
            g[self.sub_right] = t_b - self.b
        if not np.isfinite(g).all():
            raise EvaluationError("non-finite boundary residual")
        return g

    def residual(self, Q: np.ndarray) -> np.ndarray:
        r = self.interval_residual(Q[:-1], Q[1:])
        g = self.bc_residual(Q[0], Q[-1])
        return np.concatenate([r.ravel(), g])

    # -- Jacobian ---------------------------------------------------------

    def blocks(self, Q: np.ndarray) -> BlockJacobian:
        """Central-difference block Jacobian at the iterate Q.

        Steps follow the interval's own coordinate scale (max magnitude of
        the column at either knot), never an absolute unit scale: deep in a
        boundary layer the natural coordinates can span hundreds of orders
        of magnitude and a unit-scaled step would wipe them out.
        """
        QL, QR = Q[:-1], Q[1:]
        n = self.n
        rel = self.backend.fd_rel_step
        A = np.empty((self.m, n, n))
        B = np.empty((self.m, n, n))

        def left_diff(j, h):
            Qp, Qm = QL.copy(), QL.copy()
            Qp[:, j] += h
            Qm[:, j] -= h
            return (self.interval_residual(Qp, QR)
                    - self.interval_residual(Qm, QR)) / (2 * h[:, None])

        def right_diff(j, h):
            Qp, Qm = QR.copy(), QR.copy()
            Qp[:, j] += h
            Qm[:, j] -= h
            return (self.interval_residual(QL, Qp)
                    - self.interval_residual(QL, Qm)) / (2 * h[:, None])

        for j in range(n):
            scale = np.maximum(np.abs(QL[:, j]), np.abs(QR[:, j]))
            h = rel * np.maximum(scale, 1e-240)
            # Richardson extrapolation: higher derivatives grow sharply at
            # zone switches and a single central difference is not enough
            A[:, :, j] = (4.0 * left_diff(j, 0.5 * h) - left_diff(j, h)) / 3.0
            B[:, :, j] = (4.0 * right_diff(j, 0.5 * h) - right_diff(j, h)) / 3.0
        C = np.empty((n, n))
        D = np.empty((n, n))

        def bc_diff(q_fixed, side, j, h):
            qp = (Q[0] if side == 0 else Q[-1]).copy()
            qm = qp.copy()
            qp[j] += h
            qm[j] -= h
            if side == 0:
                return (self.bc_residual(qp, q_fixed)
                        - self.bc_residual(qm, q_fixed)) / (2 * h)
            return (self.bc_residual(q_fixed, qp)
                    - self.bc_residual(q_fixed, qm)) / (2 * h)

        for j in range(n):
            h = float(self.backend.fd_step(Q[0, j]))
            C[:, j] = (4.0 * bc_diff(Q[-1], 0, j, 0.5 * h)
                       - bc_diff(Q[-1], 0, j, h)) / 3.0
            h = float(self.backend.fd_step(Q[-1, j]))
            D[:, j] = (4.0 * bc_diff(Q[0], 1, j, 0.5 * h)
                       - bc_diff(Q[0], 1, j, h)) / 3.0
        return BlockJacobian(A, B, C, D)

    # -- Newton iteration -------------------------------------------------

    def run(self, cfg: NewtonConfig):
        Q = self.Q0.copy()
        self.last_Q = Q
        r = self.residual(Q)
        norm = float(np.max(np.abs(r)))
        iters = 0
        while norm > cfg.tol:
            if iters >= cfg.max_iters:
                raise NonConvergence(
                    f"residual {norm:.3e} after {iters} Newton steps")
            jac = self.blocks(Q)
            r_int = r[:self.m * self.n].reshape(self.m, self.n)
            r_bc = r[self.m * self.n:]
            dQ = solve_linear_block(jac, -r_int, -r_bc)
            s = cfg.damping
            while True:
                try:
                    r_new = self.residual(Q + s * dQ)
                    new_norm = float(np.max(np.abs(r_new)))
                except (EvaluationError, DomainError, SingularStepError):
                    new_norm = np.inf
                if new_norm < norm:
                    break
                s *= 0.5
                if s < cfg.min_damping:
                    raise NonConvergence(
                        f"line search stalled at residual {norm:.3e}")
            Q += s * dQ
            self.last_Q = Q
            r, norm = r_new, new_norm
            iters += 1
        U, T = self.states(Q)
        mesh = EvolvingMesh(U, T, list(self.transforms))
        return mesh, iters, norm


def assemble_residual(problem: SegmentedProblem,
                      backend: ScalarBackend = DEFAULT_BACKEND) -> np.ndarray:
    """Residual vector of the full nonlinear system at the mesh iterate:
    m*n interval equations followed by n boundary equations."""
    sweep = _Sweep(problem, backend)
    return sweep.residual(sweep.Q0)


def assemble_jacobian(problem: SegmentedProblem,
                      backend: ScalarBackend = DEFAULT_BACKEND) -> BlockJacobian:
    """Block-bidiagonal Jacobian of assemble_residual with respect to the
    free knot coordinates."""
    sweep = _Sweep(problem, backend)
    return sweep.blocks(sweep.Q0)


def solve_linear_block(jac: BlockJacobian, rhs_int: np.ndarray,
                       rhs_bc: np.ndarray) -> np.ndarray:
    """Solve the block-bidiagonal system

        A[i] x_i + B[i] x_{i+1} = rhs_int[i],   C x_0 + D x_m = rhs_bc

    by forward elimination: every x_{i+1} is expressed as an affine
    function of x_0, then the boundary rows give a dense n x n system for
    x_0.  Returns the solution as an (m+1, n) array.
    """
    A, B, C, D = jac.A, jac.B, jac.C, jac.D
    m, n, _ = A.shape
    try:
        Binv = np.linalg.inv(B)
    except np.linalg.LinAlgError:
        dets = np.abs(np.linalg.det(B))
        raise SingularLinearSystem(
            "singular interval block", pivot=int(np.argmin(dets)))
    E = -np.matmul(Binv, A)                              # (m, n, n)
    G = np.matmul(Binv, rhs_int[:, :, None])[:, :, 0]    # (m, n)
    # inclusive prefix scan of the affine maps x -> E x + g by doubling:
    # after the scan, scanE[i], scanG[i] compose intervals 0..i
    scanE = E.copy()
    scanG = G.copy()
    d = 1
    while d < m:
        newE = np.matmul(scanE[d:], scanE[:-d])
        newG = (np.matmul(scanE[d:], scanG[:-d, :, None])[:, :, 0]
                + scanG[d:])
        scanE[d:] = newE
        scanG[d:] = newG
        d *= 2
    P = np.empty((m + 1, n, n))
    f = np.empty((m + 1, n))
    P[0] = np.eye(n)
    f[0] = 0.0
    P[1:] = scanE
    f[1:] = scanG
    K = C + D @ P[m]
    rhs0 = rhs_bc - D @ f[m]
    try:
        x0 = np.linalg.solve(K, rhs0)
    except np.linalg.LinAlgError:
        raise SingularLinearSystem("singular condensed boundary system",
                                   pivot="condensed")
    X = np.matmul(P, x0) + f
    if not np.isfinite(X).all():
        raise SingularLinearSystem("overflow during block elimination",
                                   pivot="condensed")
    return X


def newton_solve(problem: SegmentedProblem, cfg: NewtonConfig = NewtonConfig(),
                 rcfg: Optional[RefinementConfig] = None, strategy=None,
                 backend: ScalarBackend = DEFAULT_BACKEND) -> Solution:
    """Outer solver loop: reassign transforms, normalize, refine, sweep.

    The strategy hook (when given) re-tags the intervals before every
    Newton sweep; the solve is finished once a converged sweep is followed
    by a no-op reassignment, normalization and refinement.  With
    ``rcfg=None`` the mesh topology is kept fixed (no refinement, no
    decimation).
    """
    mesh = problem.mesh
    system, bc = problem.system, problem.bc
    a, b = problem.domain
    merge_tol = rcfg.h_min / 100.0 if rcfg is not None else 0.0
    total_iters = 0
    last_norm = np.inf
    history = []
    converged = False
    for outer in range(cfg.max_outer):
        if strategy is not None:
            new_tr = strategy.assign(mesh, system, bc)
            changed = new_tr != list(mesh.transforms)
            mesh = mesh.with_transforms(new_tr)
        else:
            changed = False
        before = mesh.knot_count
        mesh = normalize(mesh, merge_tol=merge_tol)
        mesh = anchor_pins(mesh, bc, a, b)
        if rcfg is not None:
            mesh = refine(mesh, system, rcfg)
        changed |= mesh.knot_count != before
        history.append({"outer": outer, "knots": mesh.knot_count,
                        "zones": _zone_summary(mesh.transforms)})
        if converged and not changed:
            return Solution(mesh, total_iters, last_norm,
                            diagnostics={"outer_iterations": outer,
                                         "history": history})
        sweep = _Sweep(SegmentedProblem(system, bc, mesh, (a, b)), backend)
        try:
            mesh, iters, last_norm = sweep.run(cfg)
            converged = True
        except (SingularStepError, NonConvergence):
            # the iterate may have collapsed or inverted an interval in its
            # natural variable (a zone-boundary zigzag); decimate the
            # degenerate knots from the best iterate and retry, and give up
            # only if there is nothing left to repair
            U, T = sweep.states(sweep.last_Q)
            stalled = EvolvingMesh(U, T, list(mesh.transforms))
            repair_tol = rcfg.h_min * 0.5 if rcfg is not None else 1e-14
            repaired = normalize(stalled, merge_tol=max(merge_tol, repair_tol))
            if repaired.knot_count == stalled.knot_count:
                raise
            mesh = repaired
            converged = False
            iters = 0
        total_iters += iters
    raise NonConvergence(
        f"transform assignment and refinement did not settle in "
        f"{cfg.max_outer} outer iterations")


def _zone_summary(transforms):
    """Run-length encoding of the interval tags: [(label, count), ...]."""
    out = []
    for tr in transforms:
        if out and (tr is out[-1][0] or tr == out[-1][0]):
            out[-1][1] += 1
        else:
            out.append([tr, 1])
    return [(tr.label(), count) for tr, count in out]


def _by_transform(transforms):
    """Index arrays per distinct transform (contiguous zone runs)."""
    return _transform_groups(transforms)
