"""Evolving mesh of (u, t) knots with per-interval transforms.

The mesh is the iterative-solver view of a classical mesh: each knot
carries the full current approximation, and each interval between
consecutive knots is tagged with the transformation under which its
trapezoidal equation is written.  Refinement and zigzag/condensation
repair act on natural steps, i.e. steps measured in each interval's own
independent variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .errors import ConfigError, MeshError, RefinementError
from .ode_system import OdeSystem, eval_rhs_batch
from .transform import IDENTITY, Transform, apply, map_state


@dataclass(frozen=True)
class Knot:
    u: np.ndarray
    t: float


@dataclass
class EvolvingMesh:
    """Ordered knots (U row per knot, matching T entry) plus one transform
    per interval.  Value-semantic: operations return new meshes."""

    U: np.ndarray                       # (m+1, n)
    T: np.ndarray                       # (m+1,)
    transforms: List[Transform] = field(default_factory=list)

    def __post_init__(self):
        self.U = np.atleast_2d(np.asarray(self.U, dtype=float))
        self.T = np.asarray(self.T, dtype=float)
        if len(self.T) != self.U.shape[0]:
            raise ConfigError("knot count mismatch between U and T")
        if not self.transforms:
            self.transforms = [IDENTITY] * (len(self.T) - 1)
        if len(self.transforms) != len(self.T) - 1:
            raise ConfigError(
                f"{len(self.transforms)} transforms for "
                f"{len(self.T)} knots (need knots - 1)")

    @property
    def n(self) -> int:
        return self.U.shape[1]

    @property
    def knot_count(self) -> int:
        return len(self.T)

    @property
    def interval_count(self) -> int:
        return len(self.T) - 1

    @property
    def knots(self) -> List[Knot]:
        return [Knot(u=self.U[i].copy(), t=float(self.T[i]))
                for i in range(len(self.T))]

    def copy(self) -> "EvolvingMesh":
        return EvolvingMesh(self.U.copy(), self.T.copy(), list(self.transforms))

    def with_transforms(self, transforms: Sequence[Transform]) -> "EvolvingMesh":
        return EvolvingMesh(self.U.copy(), self.T.copy(), list(transforms))

    def natural_steps(self, signed: bool = False) -> np.ndarray:
        """tau_{i+1} - tau_i per interval, in each interval's own variable.

        Unsigned by default; pass ``signed=True`` to see orientation
        (inverted intervals show up as sign flips within a zone).
        """
        out = np.empty(self.interval_count)
        for tr, idx in _transform_groups(self.transforms).items():
            idx = np.asarray(idx)
            sL = map_state(tr, self.U[idx].T, self.T[idx])
            sR = map_state(tr, self.U[idx + 1].T, self.T[idx + 1])
            out[idx] = np.asarray(sR.tau) - np.asarray(sL.tau)
        return out if signed else np.abs(out)


@dataclass(frozen=True)
class RefinementConfig:
    """Naive step-size rule: keep ||T(F)(right) - T(F)(left)|| < 2M in each
    interval's natural variables, with steps clamped to [h_min, h_max]."""

    M: float
    h_min: float
    h_max: float
    max_knots: int = 10 ** 7

    def __post_init__(self):
        if not (self.M > 0):
            raise ConfigError("M must be positive")
        if not (self.h_max >= self.h_min > 0):
            raise ConfigError("need h_max >= h_min > 0")


def init_linear(a: float, b: float, m: int, bc_values, n: int = 2) -> EvolvingMesh:
    """Equally spaced initial guess.

    ``bc_values`` are the Dirichlet endpoint values of the first component;
    it is interpolated linearly, the second component (when present) is set
    to the interpolant's constant slope, remaining components to zero.  All
    interval transforms start as the identity.
    """
    if m < 2:
        raise ConfigError("need at least 2 intervals")
    if not a < b:
        raise ConfigError("need a < b")
    ua, ub = float(bc_values[0]), float(bc_values[1])
    T = np.linspace(a, b, m + 1)
    U = np.zeros((m + 1, n))
    U[:, 0] = ua + (ub - ua) * (T - a) / (b - a)
    if n >= 2:
        U[:, 1] = (ub - ua) / (b - a)
    return EvolvingMesh(U, T, [IDENTITY] * m)


def normalize(mesh: EvolvingMesh, merge_tol: float = 0.0) -> EvolvingMesh:
    """Sort knots by t and decimate degenerate intervals.

    An interval is degenerate when its natural step is shorter than
    ``merge_tol`` or when it runs against its zone's orientation (a zigzag
    produced by the moving iterate); one of its knots is removed and the
    check repeats until the mesh is clean.  The two boundary knots are
    never removed.  Raises MeshError if fewer than 3 knots survive.
    """
    out = mesh
    order = np.argsort(out.T, kind="stable")
    if not np.array_equal(order, np.arange(len(order))):
        out = EvolvingMesh(
            out.U[order], out.T[order],
            [out.transforms[min(i, len(out.transforms) - 1)]
             for i in order[:-1]])
    while True:
        bad = _degenerate_mask(out, merge_tol)
        if bad is None:
            return out
        knots = out.knot_count
        # per degenerate interval, drop its right knot, or its left one
        # when the right knot is the domain endpoint; drops are batched
        # per pass but kept non-adjacent so each merge is local
        drop = np.zeros(knots, dtype=bool)
        for i in np.flatnonzero(bad):
            j = i + 1 if i + 1 < knots - 1 else i
            if j == 0:
                raise MeshError("cannot decimate a boundary knot")
            if drop[j] or drop[j - 1] or (j + 1 < knots and drop[j + 1]):
                continue
            drop[j] = True
        if knots - int(drop.sum()) < 3:
            raise MeshError("fewer than 3 knots after normalization")
        idx = np.flatnonzero(~drop)
        transforms = [out.transforms[i] for i in idx[:-1]]
        out = EvolvingMesh(out.U[idx], out.T[idx], transforms)


def _degenerate_mask(mesh: EvolvingMesh, merge_tol: float):
    """Boolean mask of degenerate intervals, or None when all are clean."""
    steps = mesh.natural_steps(signed=True)
    bad = np.zeros(mesh.interval_count, dtype=bool)
    for tr, idx in _transform_groups(mesh.transforms).items():
        group = steps[idx]
        dominant = np.sign(np.median(group)) or 1.0
        bad[idx] = (np.abs(group) < merge_tol) | (group * dominant <= 0.0)
    bad |= np.diff(mesh.T) == 0.0
    return bad if bad.any() else None


def refine(mesh: EvolvingMesh, system: OdeSystem,
           cfg: RefinementConfig) -> EvolvingMesh:
    """Bisect intervals until the rhs-difference bound and h_max hold.

    An interval is split while its natural step exceeds h_max, or while
    ||T(F)(q_R, tau_R) - T(F)(q_L, tau_L)|| >= 2M and both halves would
    stay at or above h_min.  New knots interpolate (u, t) linearly between
    their neighbors and inherit the parent interval's transform.
    """
    out = mesh
    for _ in range(64):  # each pass at least halves offending steps
        split = _split_mask(out, system, cfg)
        if not split.any():
            return out
        n_new = int(split.sum())
        if out.knot_count + n_new > cfg.max_knots:
            raise RefinementError(
                f"refinement would exceed {cfg.max_knots} knots")
        out = _bisect(out, split)
    raise RefinementError("refinement failed to settle (64 passes)")


def _split_mask(mesh: EvolvingMesh, system: OdeSystem,
                cfg: RefinementConfig) -> np.ndarray:
    m = mesh.interval_count
    split = np.zeros(m, dtype=bool)
    for tr, idx in _transform_groups(mesh.transforms).items():
        idx = np.asarray(idx)
        tsys = apply(tr, system)
        sL = map_state(tr, mesh.U[idx].T, mesh.T[idx])
        sR = map_state(tr, mesh.U[idx + 1].T, mesh.T[idx + 1])
        tauL = np.atleast_1d(np.asarray(sL.tau, dtype=float))
        tauR = np.atleast_1d(np.asarray(sR.tau, dtype=float))
        h = np.abs(tauR - tauL)
        fL = eval_rhs_batch(tsys, np.atleast_2d(sL.q), tauL)
        fR = eval_rhs_batch(tsys, np.atleast_2d(sR.q), tauR)
        d = np.max(np.abs(fR - fL), axis=0)
        over_max = h > cfg.h_max * (1 + 1e-12)
        rough = (d >= 2 * cfg.M) & (h >= 2 * cfg.h_min * (1 - 1e-12))
        split[idx] = (over_max | rough) & (h > 0)
    return split


def _bisect(mesh: EvolvingMesh, split: np.ndarray) -> EvolvingMesh:
    idx = np.flatnonzero(split)
    midU = 0.5 * (mesh.U[idx] + mesh.U[idx + 1])
    midT = 0.5 * (mesh.T[idx] + mesh.T[idx + 1])
    U = np.insert(mesh.U, idx + 1, midU, axis=0)
    T = np.insert(mesh.T, idx + 1, midT)
    # each new interval inherits its parent's transform
    parent = np.repeat(np.arange(mesh.interval_count), 1 + split)
    transforms = [mesh.transforms[i] for i in parent]
    return EvolvingMesh(U, T, transforms)


def _transform_groups(transforms: Sequence[Transform]):
    """Index arrays per distinct transform, built from consecutive runs
    (zone assignments are contiguous, so this avoids per-element hashing).

    Candidate run boundaries come from object identity, which is cheap;
    equal-but-distinct neighbors are merged with a real comparison.
    """
    m = len(transforms)
    if m == 0:
        return {}
    ids = np.fromiter(map(id, transforms), dtype=np.int64, count=m)
    starts = [0]
    for c in np.flatnonzero(ids[1:] != ids[:-1]) + 1:
        if transforms[c] != transforms[starts[-1]]:
            starts.append(int(c))
    runs = {}
    for s, e in zip(starts, starts[1:] + [m]):
        runs.setdefault(transforms[s], []).append((s, e))
    return {tr: (np.arange(*rr[0]) if len(rr) == 1 else
                 np.concatenate([np.arange(s, e) for s, e in rr]))
            for tr, rr in runs.items()}
