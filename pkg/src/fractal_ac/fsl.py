"""Feynman-Sierpinski Ladder: characteristic impedance, FLT dynamics, graphs, harmonics."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexnet import CircuitGraph, edge, node_id
from .errors import AddressError, DegenerateMap, ParamError, PoleHit, RegimeError, SizeError

MAX_LEVEL = 8
BAND_LO = 9.0 * (4.0 - math.sqrt(15.0))  # bounds on 2*omega^2*L*C
BAND_HI = 9.0 * (4.0 + math.sqrt(15.0))


@dataclass(frozen=True)
class CircuitParams:
    omega: float
    L: float
    C: float
    epsilon: float = 0.0

    def __post_init__(self):
        for name in ("omega", "L", "C"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParamError(f"{name} must be finite and positive, got {v}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ParamError(f"epsilon must be finite and >= 0, got {self.epsilon}")

    @property
    def Omega(self) -> float:
        return self.omega**2 * self.L * self.C

    @property
    def z_C(self) -> complex:
        """Capacitor impedance including the series regularizing resistor."""
        return 1.0 / (1j * self.omega * self.C) + self.epsilon

    @property
    def z_L(self) -> complex:
        return 1j * self.omega * self.L + self.epsilon

    def ideal(self) -> "CircuitParams":
        return CircuitParams(self.omega, self.L, self.C, 0.0)

    def with_epsilon(self, epsilon: float) -> "CircuitParams":
        return CircuitParams(self.omega, self.L, self.C, epsilon)


class Regime(str, enum.Enum):
    FILTER = "Filter"
    BELOW_BAND = "BelowBand"
    ABOVE_BAND = "AboveBand"
    BAND_EDGE = "BandEdge"


@dataclass(frozen=True)
class FSLImpedance:
    Z: complex
    regime: Regime

    @property
    def terminal_impedance(self) -> complex:
        return 2.0 * self.Z / 3.0


def band_regime(Omega: float) -> Regime:
    disc = 144.0 * Omega - 4.0 * Omega**2 - 81.0
    if abs(disc) <= 1e-14 * (144.0 * Omega + 4.0 * Omega**2 + 81.0):
        return Regime.BAND_EDGE
    if disc > 0:
        return Regime.FILTER
    return Regime.BELOW_BAND if 2.0 * Omega < 36.0 else Regime.ABOVE_BAND


def fixed_point_residual(Z: complex, z_C: complex, z_L: complex) -> float:
    """Relative residual of 1/Z = 1/Z_L + 1/(3 Z_C + 5Z/3)."""
    return abs(1 / Z - 1 / z_L - 1 / (3 * z_C + 5 * Z / 3)) / abs(1 / Z)


def fsl_characteristic_impedance(params: CircuitParams) -> FSLImpedance:
    if params.epsilon != 0:
        raise ParamError("closed-form impedance is for the ideal circuit (epsilon = 0)")
    W = params.Omega
    wc = params.omega * params.C
    regime = band_regime(W)
    disc = 144.0 * W - 4.0 * W**2 - 81.0
    if regime is Regime.FILTER:
        Z = complex(math.sqrt(disc), 9.0 + 2.0 * W) / (10.0 * wc)
    elif regime is Regime.BAND_EDGE:
        Z = 1j * (9.0 + 2.0 * W) / (10.0 * wc)
    else:
        root = math.sqrt(-disc)
        if regime is Regime.BELOW_BAND:
            # 2W + 9 - root cancels badly for small W; use the conjugate product
            # (2W + 9)^2 - (4W^2 + 81 - 144W) = 180W.
            im = 180.0 * W / (2.0 * W + 9.0 + root)
        else:
            im = 2.0 * W + 9.0 + root
        Z = 1j * im / (10.0 * wc)
    return FSLImpedance(Z, regime)


@dataclass(frozen=True)
class FLTMap:
    """z -> (a z + b) / (c z + d) with its two fixed points."""

    a: complex
    b: complex
    c: complex
    d: complex
    fixed_points: tuple[complex, complex]

    def __call__(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    def multiplier_at(self, z: complex) -> complex:
        return self.determinant / (self.c * z + self.d) ** 2

    @property
    def physical(self) -> complex:
        return self.fixed_points[0]

    def cayley(self, z: complex) -> complex:
        m = self.multiplier_at(z)
        return (1 + m) / (1 - m)


def _physical_root(z_C: complex, z_L: complex, eps: float) -> complex:
    """Square root of (9Z_C+8Z_L)^2 - 60 Z_L^2 on the physical branch.

    Off the negative real axis this is the principal root.  On the axis (the
    ideal circuit outside its band) the side is taken from the limit
    epsilon -> 0+, i.e. from the sign of d(disc)/d(epsilon).
    """
    A = 9 * z_C + 8 * z_L
    disc = A * A - 60 * z_L * z_L
    scale = abs(A) ** 2 + 60 * abs(z_L) ** 2
    if disc.real < 0 and abs(disc.imag) <= 1e-13 * scale:
        slope = (34 * A - 120 * z_L).imag
        mag = math.sqrt(-disc.real)
        return complex(0.0, mag if slope >= 0 else -mag)
    return cmath.sqrt(disc)


def fsl_flt(params: CircuitParams) -> FLTMap:
    zc, zl = params.z_C, params.z_L
    a, b, c, d = 5 * zl, 9 * zl * zc, 5.0 + 0j, 3 * zl + 9 * zc
    if abs(a * d - b * c) <= 1e-14 * (abs(a * d) + abs(b * c)):
        raise DegenerateMap("ad - bc vanishes")
    root = _physical_root(zc, zl, params.epsilon)
    base = -9 * zc + 2 * zl
    return FLTMap(a, b, c, d, ((base + root) / 10, (base - root) / 10))


def fsl_iterate(params: CircuitParams, Z0: complex, N: int) -> np.ndarray:
    """Orbit ``[Z0, F(Z0), ..., F^N(Z0)]`` of the (possibly regularized) map."""
    if N < 0:
        raise ParamError("N must be >= 0")
    F = fsl_flt(params)
    out = np.empty(N + 1, dtype=complex)
    z = complex(Z0)
    out[0] = z
    for n in range(1, N + 1):
        den = F.c * z + F.d
        if abs(den) < 1e-300:
            raise PoleHit(f"orbit hit the pole of F at step {n}", n)
        z = (F.a * z + F.b) / den
        out[n] = z
    return out


@dataclass(frozen=True)
class RegularizedPoint:
    epsilon: float
    Z: complex
    multiplier: float


def fsl_regularized_limit(params: CircuitParams, epsilons: Sequence[float]) -> list[RegularizedPoint]:
    eps = [float(e) for e in epsilons]
    if any(not (e > 0 and math.isfinite(e)) for e in eps):
        raise ParamError("epsilons must be strictly positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ParamError("epsilons must be strictly decreasing")
    out = []
    for e in eps:
        F = fsl_flt(params.with_epsilon(e))
        out.append(RegularizedPoint(e, F.physical, abs(F.multiplier_at(F.physical))))
    return out


def fsl_build_level_graph(params: CircuitParams, N: int, z0: complex | None = None) -> CircuitGraph:
    """Level-N approximation.  Level 0 is a triangle with edge impedance ``z0``.

    ``z0`` defaults to the (regularized) inductor impedance.  Passing the
    characteristic impedance instead yields the reduced graph whose
    innermost triangles stand in for the infinite ladder.
    """
    if not 0 <= N <= MAX_LEVEL:
        raise SizeError(f"level must be in [0, {MAX_LEVEL}], got {N}")
    zc, zl = params.z_C, params.z_L
    base = zl if z0 is None else complex(z0)
    nodes: list[str] = ["p0", "p1", "p2"]
    edges = []
    cells: dict[str, tuple[str, ...]] = {}

    def build(prefix: str, corners: tuple[str, str, str], k: int) -> None:
        cells[prefix] = corners
        if k == 0:
            for i, j in ((0, 1), (0, 2), (1, 2)):
                edges.append(edge(corners[i], corners[j], base))
            return
        q = tuple(node_id(prefix, f"q{j}") for j in range(3))
        m01, m02, m12 = (node_id(prefix, s) for s in ("m01", "m02", "m12"))
        nodes.extend(q + (m01, m02, m12))
        for j in range(3):
            edges.append(edge(corners[j], q[j], zc))
        for i, j in ((0, 1), (0, 2), (1, 2)):
            edges.append(edge(corners[i], corners[j], zl))
        build(prefix + "0", (q[0], m01, m02), k - 1)
        build(prefix + "1", (m01, q[1], m12), k - 1)
        build(prefix + "2", (m02, m12, q[2]), k - 1)

    build("", ("p0", "p1", "p2"), N)
    return CircuitGraph(tuple(nodes), tuple(edges), ("p0", "p1", "p2"), cells)


_M0 = np.array([[5, 0, 0], [2, 2, 1], [2, 1, 2]], dtype=float) / 5
_M1 = np.array([[2, 2, 1], [0, 5, 0], [1, 2, 2]], dtype=float) / 5
_M2 = np.array([[2, 1, 2], [1, 2, 2], [0, 0, 5]], dtype=float) / 5


@dataclass(frozen=True)
class FSLInterpolation:
    M: np.ndarray
    M0: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    Z: complex

    def cell(self, j: int) -> np.ndarray:
        return (self.M0, self.M1, self.M2)[j]


def characteristic_Z(params: CircuitParams) -> complex:
    """In-band characteristic Z; the regularized fixed point when epsilon > 0."""
    regime = band_regime(params.Omega)
    if regime is not Regime.FILTER:
        raise RegimeError(f"harmonic interpolation needs the filter regime, got {regime.value}")
    if params.epsilon == 0:
        return fsl_characteristic_impedance(params).Z
    return fsl_flt(params).physical


def fsl_harmonic_matrices(params: CircuitParams) -> FSLInterpolation:
    Z = characteristic_Z(params)
    zc = params.z_C
    M = (5 * Z * np.eye(3) + 3 * zc * np.ones((3, 3))) / (9 * zc + 5 * Z)
    return FSLInterpolation(M, _M0.copy(), _M1.copy(), _M2.copy(), Z)


def parse_address(address: str) -> list[int]:
    bad = [ch for ch in address if ch not in "012"]
    if bad:
        raise AddressError(f"address symbols must be 0, 1 or 2; got {bad[0]!r}")
    return [int(ch) for ch in address]


def fsl_harmonic_evaluate(params: CircuitParams, v: Sequence[complex], address: str):
    """Boundary values of the cell named by ``address``.

    Returns ``(values, kappa)`` where kappa bounds the growth:
    ``max|values| <= kappa * max|v|``.
    """
    word = parse_address(address)
    interp = fsl_harmonic_matrices(params)
    x = np.asarray(v, dtype=complex)
    kappa = 1.0
    for j in word:
        step = interp.cell(j) @ interp.M
        x = step @ x
        kappa *= float(np.max(np.sum(np.abs(step), axis=1)))
    return x, kappa
