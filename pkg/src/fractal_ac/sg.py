"""Level-0 conductance of the bilaterally symmetric self-similar circuit on SG."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ParamError


@dataclass(frozen=True)
class SGConductance:
    s: float
    value: complex
    complex_radicand: bool
    branches: tuple[complex, complex]

    @property
    def is_real(self) -> bool:
        return abs(self.value.imag) <= 1e-13 * (1 + abs(self.value))


def sg_symmetric_conductance(s: float) -> SGConductance:
    """Conductance of the distinguished level-0 edge, the other two being 1.

    ``s`` is the ratio of the odd cell's scaling to the symmetric pair's.
    When the radicand is negative both square-root branches are reported
    and ``complex_radicand`` is set.
    """
    if not (math.isfinite(s) and s > 0):
        raise ParamError(f"s must be finite and positive, got {s}")
    if s == 1.5:
        raise ParamError("s = 3/2 is a pole of the conductance formula")
    u = s * s - 1
    radicand = u * u + s * s * (3 - 2 * s)
    root = cmath.sqrt(radicand)
    den = 3 - 2 * s
    branches = ((u + root) / den, (u - root) / den)
    return SGConductance(s, complex(branches[0]), radicand < 0, branches)
