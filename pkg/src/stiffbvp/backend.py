"""Real-scalar backend abstraction.

All numerics run on a numpy floating dtype chosen through a backend object
with a queryable machine epsilon.  The default is ordinary 64-bit binary
floating point; ``LONGDOUBLE`` demonstrates that a wider format can be
plugged in without touching solver code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScalarBackend:
    name: str
    dtype: type

    @property
    def eps(self) -> float:
        """Machine epsilon of the working arithmetic."""
        return float(np.finfo(self.dtype).eps)

    @property
    def fd_rel_step(self) -> float:
        """Relative step for central finite differences: eps**(1/3)."""
        return self.eps ** (1.0 / 3.0)

    def fd_step(self, x):
        """Per-coordinate central-difference step: eps^(1/3) * max(1, |x|)."""
        return self.fd_rel_step * np.maximum(1.0, np.abs(x))

    def asarray(self, x):
        return np.asarray(x, dtype=self.dtype)


FLOAT64 = ScalarBackend("float64", np.float64)
LONGDOUBLE = ScalarBackend("longdouble", np.longdouble)

DEFAULT_BACKEND = FLOAT64
