"""Built-in problem catalog and embedded reference data.

Contains the Troesch problem (the classical stiff two-point benchmark
u'' = lambda*sinh(lambda*u) with u(0)=0, u(1)=1 written as a first-order
system) and a linear verification problem with a closed-form solution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .ode_system import BoundaryConditions, OdeSystem


@dataclass(frozen=True)
class ReferenceTable:
    """High-accuracy endpoint derivative values, keyed by lambda.

    Entries map lambda -> (u2_at_0, u2_at_1, source).  Either value may be
    None when only one endpoint is tabulated.
    """

    entries: Mapping[float, Tuple[Optional[float], Optional[float], str]]


@dataclass(frozen=True)
class ProblemSpec:
    system: OdeSystem
    bc: BoundaryConditions
    domain: Tuple[float, float]
    name: str = ""
    reference: Optional[ReferenceTable] = None
    exact: Optional[Callable] = None     # t -> u, when a closed form exists

    def __post_init__(self):
        a, b = self.domain
        if not a < b:
            raise ConfigError("domain must satisfy a < b")


# u2(0) values are external high-precision data; u2(1) values are
# convergence-estimated and should be treated as cross-checks only.
_TROESCH_REFERENCE = ReferenceTable(entries={
    50.0: (1.542999878e-21, 7.200489933746e10, "external"),
    100.0: (2.976060781e-43, 5.18470552861e21, "external/convergence-estimated"),
    200.0: (1.107117221e-86, 2.68811714186e43, "external/convergence-estimated"),
    300.0: (None, 1.39370958072e65, "convergence-estimated"),
    400.0: (None, 7.2259737686e86, "convergence-estimated"),
    500.0: (5.699661125e-217, 3.7464546149e108, "external/convergence-estimated"),
})


def troesch(lam: float) -> ProblemSpec:
    """Troesch's problem as a first-order system on [0, 1].

        u1' = u2,   u2' = lam * sinh(lam * u1),   u1(0) = 0, u1(1) = 1
    """
    if not lam > 0:
        raise ConfigError("lambda must be positive")
    lam = float(lam)

    def rhs(u, t):
        u1, u2 = u[0], u[1]
        return np.stack([u2 * np.ones_like(np.asarray(t, dtype=float)),
                         lam * np.sinh(lam * u1)])

    def jac(u, t):
        u1 = u[0]
        return np.array([[0.0, 1.0, 0.0],
                         [lam * lam * np.cosh(lam * u1), 0.0, 0.0]])

    system = OdeSystem(2, rhs, jac=jac, params={"lam": lam}, name="troesch")

    def bc_residual(u_a, u_b):
        return np.array([u_a[0], u_b[0] - 1.0])

    bc = BoundaryConditions(bc_residual, separated_mask=(True, True),
                            pins={("a", 1): (0, 0.0), ("b", 1): (1, 1.0)})
    return ProblemSpec(system, bc, (0.0, 1.0), name=f"troesch(lam={lam:g})",
                       reference=_TROESCH_REFERENCE)


def linear_verification() -> ProblemSpec:
    """u'' = u on [0, 1] with u(0) = 0, u(1) = sinh(1).

    Exact solution u1 = sinh(t), u2 = cosh(t); used as a convergence-order
    oracle for the discretization.
    """

    def rhs(u, t):
        return np.stack([u[1] * np.ones_like(np.asarray(t, dtype=float)),
                         u[0] * np.ones_like(np.asarray(t, dtype=float))])

    def jac(u, t):
        return np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])

    system = OdeSystem(2, rhs, jac=jac, name="linear-verification")

    def bc_residual(u_a, u_b):
        return np.array([u_a[0], u_b[0] - np.sinh(1.0)])

    bc = BoundaryConditions(bc_residual, separated_mask=(True, True),
                            pins={("a", 1): (0, 0.0), ("b", 1): (1, np.sinh(1.0))})

    def exact(t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.sinh(t), np.cosh(t)])

    return ProblemSpec(system, bc, (0.0, 1.0), name="linear-verification",
                       exact=exact)


def reference_lookup(table: Optional[ReferenceTable], lam: float):
    """Exact-key lookup of (u2_at_0, u2_at_1); None when absent."""
    if table is None:
        return None
    entry = table.entries.get(float(lam))
    if entry is None:
        return None
    return entry[0], entry[1]


def export_reference(table: ReferenceTable, path):
    """Write the reference table as CSV: lambda,u2_0,u2_1,source."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "u2_0", "u2_1", "source"])
        for lam in sorted(table.entries):
            u2_0, u2_1, source = table.entries[lam]
            writer.writerow([
                "%.17g" % lam,
                "" if u2_0 is None else "%.17g" % u2_0,
                "" if u2_1 is None else "%.17g" % u2_1,
                source,
            ])


_CATALOG = {
    "troesch": troesch,
    "linear": lambda lam=None: linear_verification(),
}


def problem_by_name(name: str, lam: Optional[float] = None) -> ProblemSpec:
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise ConfigError(
            f"unknown problem {name!r}; choices: {sorted(_CATALOG)}")
    if name == "troesch":
        if lam is None:
            raise ConfigError("troesch needs a lambda value")
        return factory(lam)
    return factory()
