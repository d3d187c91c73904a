"""Hanoi circuits I and II: characteristic pairs, filter regions, interpolation.

Both circuits start from an inverted Y with vertical arm Z1 and slanted arms
Z2, and at each level glue three copies scaled by ``r`` with capacitor and
inductor connectors.  Variant II additionally isolates every copy from the
outer terminals by a connector.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexnet import CircuitGraph, edge, node_id
from .errors import (
    DegenerateCase,
    DegenerateEigenbasis,
    NoSolution,
    ParamError,
    SizeError,
)
from .fsl import parse_address

MAX_LEVEL = 8
VARIANTS = ("I", "II")
SPECIAL_RTOL = 1e-12
SPURIOUS_RTOL = 1e-6


def _near(r: float, target: float) -> bool:
    return abs(r - target) <= SPECIAL_RTOL * target


@dataclass(frozen=True)
class HanoiParams:
    variant: str
    r: float
    omega: float
    L: float
    C: float
    epsilon: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParamError(f"variant must be 'I' or 'II', got {self.variant!r}")
        for name in ("r", "omega", "L", "C"):
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
        return 1.0 / (1j * self.omega * self.C) + self.epsilon

    @property
    def z_L(self) -> complex:
        return 1j * self.omega * self.L + self.epsilon

    def scaled(self, lam: float) -> "HanoiParams":
        """Same Omega and r, with both reactances multiplied by ``lam``."""
        return HanoiParams(self.variant, self.r, self.omega, self.L * lam, self.C / lam, self.epsilon * lam)


@dataclass(frozen=True)
class CharacteristicPair:
    Z1: complex
    Z2: complex
    residual: float

    @property
    def top_pair(self) -> complex:
        return self.Z1 + self.Z2

    @property
    def base(self) -> complex:
        return 2 * self.Z2

    @property
    def is_filter_root(self) -> bool:
        return _positive_real(self.top_pair) and _positive_real(self.base)


def _positive_real(z: complex) -> bool:
    # roots of a purely imaginary problem carry ~1e-16 real noise
    return z.real > 1e-12 * abs(z)


def _parallel(a: complex, b: complex, scale: float) -> tuple[complex, float]:
    """a || b and the magnitude it is sensitive to, |a||b|(|a|+|b|)/|a+b|^2."""
    if a + b == 0:
        # two shorts (up to roundoff) in parallel; anything larger is a resonance
        if abs(a) <= 1e-13 * scale:
            return 0j, 0.0
        raise ZeroDivisionError("parallel branches resonate")
    s = a + b
    return a * b / s, abs(a) * abs(b) * (abs(a) + abs(b)) / abs(s) ** 2


def _step(params: HanoiParams, z1: complex, z2: complex):
    r, zc, zl = params.r, params.z_C, params.z_L
    scale = abs(z1) + abs(z2) + abs(zc) + abs(zl)
    if params.variant == "I":
        top = r * z1 + 0.5 * (r * z1 + 2 * r * z2 + zc)
        par, cond = _parallel(2 * r * z2 + zl, 2 * (r * z1 + r * z2 + zc), scale)
        base = 2 * r * z2 + par
    else:
        top = zl + r * z1 + 0.5 * (r * z1 + 2 * r * z2 + 2 * zc)
        par, cond = _parallel(2 * r * z2 + zl, 2 * r * (z1 + z2) + 2 * zc, scale)
        base = 2 * r * z2 + 2 * zc + par
    new_z2 = base / 2
    return top - new_z2 / 2, new_z2, cond


def step_map(params: HanoiParams, z1: complex, z2: complex) -> tuple[complex, complex]:
    """Equivalent (Z1, Z2) of one more level built from copies equivalent to (z1, z2).

    The copies are scaled by r; the connectors are not.
    """
    n1, n2, _ = _step(params, z1, z2)
    return n1, n2


def system_residual(params: HanoiParams, z1: complex, z2: complex) -> float:
    """Backward-error defect of the two self-consistency equations at (z1, z2).

    Each equation's defect is divided by the largest magnitude it is built
    from.  For the base equation that includes the parallel term, which is
    badly conditioned when its two branches nearly cancel.
    """
    try:
        n1, n2, cond = _step(params, z1, z2)
    except ZeroDivisionError:
        return math.inf
    scale = max(abs(z1), abs(z2), abs(params.z_C), abs(params.z_L))
    top_err = abs((z1 + z2 / 2) - (n1 + n2 / 2)) / scale
    base_err = abs(z2 - n2) / max(scale, cond)
    return max(top_err, base_err)


def _quadratic_roots(a: complex, b: complex, c: complex) -> list[complex]:
    disc = cmath.sqrt(b * b - 4 * a * c)
    q = -0.5 * (b + disc if abs(b + disc) >= abs(b - disc) else b - disc)
    if q == 0:
        return [0j, 0j]
    return [q / a, c / q]


def z2_quadratic(params: HanoiParams) -> tuple[complex, complex, complex]:
    """Coefficients (a, b, c) of a Z2^2 + b Z2 + c = 0."""
    r, zc, zl = params.r, params.z_C, params.z_L
    if params.variant == "I":
        return r * (5 * r - 3), (2 * r - 1) * (2 * zc + zl), zc * zl
    return (
        2 * r * (1 - r) * (5 * r - 3),
        2 * (2 * (1 - r) * (3 * r - 1) * zc + (2 * r - 1) * (r + 1) * zl),
        2 * (zl + zc) * ((2 - r) * zc + r * zl),
    )


def _z1_from_z2(params: HanoiParams, z2: complex) -> complex:
    r, zc, zl = params.r, params.z_C, params.z_L
    if params.variant == "I":
        return ((2 * r - 1) * z2 + zc) / (2 - 3 * r)
    return ((2 * r - 1) * z2 + 2 * (zc + zl)) / (2 - 3 * r)


def _two_thirds_pair(params: HanoiParams) -> tuple[complex, complex]:
    zc, zl = params.z_C, params.z_L
    if params.variant == "I":
        den = 4 * (zl - 2 * zc)
        if abs(den) <= 1e-12 * (abs(zl) + abs(zc)):
            raise DegenerateCase("r = 2/3 with Z_L = 2 Z_C")
        return 12 * zc * zc / den, -3 * zc
    s = zc + zl
    den = 2 * zc + 3 * zl
    if abs(s) <= 1e-12 * (abs(zl) + abs(zc)):
        raise DegenerateCase("r = 2/3 at resonance Z_C + Z_L = 0 gives Z1 = Z2 = 0")
    if abs(den) <= 1e-12 * (abs(zl) + abs(zc)):
        raise DegenerateCase("r = 2/3 with 2 Z_C + 3 Z_L = 0")
    return -3 * s * (9 * zc + zl) / den, -6 * s


def hanoi_characteristic_pair(params: HanoiParams) -> list[CharacteristicPair]:
    """All self-consistent (Z1, Z2), filter roots first."""
    r = params.r
    if params.variant == "I" and _near(r, 1.0):
        raise NoSolution("no characteristic pair for Hanoi I at r = 1")
    if _near(r, 2 / 3):
        candidates = [_two_thirds_pair(params)]
    else:
        a, b, c = z2_quadratic(params)
        linear = _near(r, 0.6) or (params.variant == "II" and _near(r, 1.0))
        if linear:
            if b == 0:
                raise DegenerateCase("quadratic for Z2 degenerates to a constant")
            z2s = [-c / b]
        else:
            z2s = _quadratic_roots(a, b, c)
        candidates = [(_z1_from_z2(params, z2), z2) for z2 in z2s]
    pairs = [CharacteristicPair(z1, z2, system_residual(params, z1, z2)) for z1, z2 in candidates]
    # clearing denominators can add a root where a connector branch shorts out
    pairs = [p for p in pairs if p.residual <= SPURIOUS_RTOL]
    if not pairs:
        raise NoSolution(f"no finite characteristic pair at r={r}, Omega={params.Omega}")
    pairs.sort(key=lambda p: not p.is_filter_root)
    return pairs


def filter_pair(params: HanoiParams) -> CharacteristicPair:
    """First filter root; raises if the parameters are not in a filter region."""
    for p in hanoi_characteristic_pair(params):
        if p.is_filter_root:
            return p
    raise DegenerateCase(f"no filter root at r={params.r}, Omega={params.Omega}")


@dataclass(frozen=True)
class FilterRegion:
    """Frequency window in which the circuit is a filter.

    ``variable`` names the quantity bounded by ``interval``: ``"Omega/2"``
    (that is LC w^2 / 2) for variant I and ``"Omega"`` for variant II.
    """

    variant: str
    r: float
    interval: tuple[float, float] | None
    variable: str
    gamma: float | None = None

    @property
    def empty(self) -> bool:
        return self.interval is None

    @property
    def omega_interval(self) -> tuple[float, float] | None:
        if self.interval is None:
            return None
        k = 2.0 if self.variable == "Omega/2" else 1.0
        return (k * self.interval[0], k * self.interval[1])

    def contains(self, Omega: float) -> bool:
        iv = self.omega_interval
        return iv is not None and iv[0] < Omega < iv[1]


def gamma(r: float) -> float:
    return 1.0 + r * (3.0 - 5.0 * r) / (2.0 * r - 1.0) ** 2


def hanoi2_filter_polynomial(r: float) -> tuple[float, float, float]:
    """Coefficients of A W^2 + B W + K > 0, W = LC w^2, for Hanoi II."""
    A = -24 * r**4 + 28 * r**3 - 9 * r**2 + 2 * r - 1
    B = -4 * (r - 1) ** 2 * (6 * r**2 - 3 * r - 1)
    K = 4 * (1 - r) * (4 * r**3 - 2 * r**2 + r - 1)
    return A, B, K


def hanoi_filter_region(variant: str, r: float) -> FilterRegion:
    if variant not in VARIANTS:
        raise ParamError(f"variant must be 'I' or 'II', got {variant!r}")
    if not (math.isfinite(r) and r > 0):
        raise ParamError(f"r must be positive, got {r}")
    if variant == "I":
        if r >= 0.6 or _near(r, 0.6):
            return FilterRegion("I", r, None, "Omega/2", gamma(r) if not _near(r, 0.5) else None)
        if _near(r, 0.5):
            return FilterRegion("I", r, (0.0, math.inf), "Omega/2", math.inf)
        g = gamma(r)
        hi = g + math.sqrt(g * g - 1)
        return FilterRegion("I", r, (1.0 / hi, hi), "Omega/2", g)
    if r >= 0.6 or _near(r, 0.6) or _near(r, 0.5):
        return FilterRegion("II", r, None, "Omega")
    A, B, K = hanoi2_filter_polynomial(r)
    disc = B * B - 4 * A * K
    if disc <= 0:
        return FilterRegion("II", r, None, "Omega")
    q = -0.5 * (B + math.copysign(math.sqrt(disc), B))
    lo, hi = sorted((q / A, K / q))
    return FilterRegion("II", r, (lo, hi), "Omega")


def hanoi_is_filter(variant: str, r: float, Omega: float) -> bool:
    return Omega > 0 and hanoi_filter_region(variant, r).contains(Omega)


def _check(value: complex, name: str, scale: float) -> complex:
    if abs(value) <= 1e-12 * scale:
        raise DegenerateCase(f"{name} vanishes")
    return value


@dataclass(frozen=True)
class Eigenstructure:
    values: tuple[complex, complex, complex]
    vectors: np.ndarray  # columns v0, v+, v-


def hanoi_eigen(params: HanoiParams, pair: CharacteristicPair) -> Eigenstructure:
    r, zc, zl = params.r, params.z_C, params.z_L
    z1, z2 = pair.Z1, pair.Z2
    scale = abs(z1) + abs(z2) + abs(zc) + abs(zl)
    if params.variant == "I":
        if abs(z2) <= 1e-12 * scale:
            raise DegenerateEigenbasis("Z2 vanishes")
        lam = (1.0, 1 - r, 1 - r)
        a = 2 * z1 / z2
    else:
        if abs(z2) <= 1e-12 * scale or abs(r * z2 + zc) <= 1e-12 * scale or abs(2 * z1 + z2) <= 1e-12 * scale:
            raise DegenerateEigenbasis("Z2, r Z2 + Z_C or 2 Z1 + Z2 vanishes")
        lam = (1.0, (r * z1 + r * z2 + zc) / (2 * z1 + z2), 1 - r - zc / z2)
        a = 2 * (r * z1 + zl) / (r * z2 + zc)
    P = np.array([[1, a, 0], [1, -1, 1], [1, -1, -1]], dtype=complex)
    return Eigenstructure(tuple(complex(x) for x in lam), P)


def hanoi_pq_map(params: HanoiParams, pair: CharacteristicPair) -> np.ndarray:
    """Matrix taking terminal voltages (p0, p1, p2) to copy-centre voltages (q0, q1, q2)."""
    eig = hanoi_eigen(params, pair)
    P = eig.vectors
    if abs(np.linalg.det(P)) <= 1e-12 * float(np.max(np.abs(P))) ** 3:
        raise DegenerateEigenbasis("eigenvector matrix is singular (2 Z1 + Z2 = 0)")
    return P @ np.diag(eig.values) @ np.linalg.inv(P)


@dataclass(frozen=True)
class InterpolationSet:
    pq_matrix: np.ndarray
    M0: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    b: complex
    c: complex
    d: complex | None = None

    def cell(self, j: int) -> np.ndarray:
        return (self.M0, self.M1, self.M2)[j]


def hanoi_interp_matrices(params: HanoiParams, pair: CharacteristicPair) -> InterpolationSet:
    r, zc, zl = params.r, params.z_C, params.z_L
    z1, z2 = pair.Z1, pair.Z2
    scale = abs(z1) + abs(z2) + abs(zc) + abs(zl)
    b = _check(2 * z1 + z2, "b = 2 Z1 + Z2", scale)
    if params.variant == "I":
        c = (1 - r) * zl / _check(4 * r * z2 + 2 * zl, "4 r Z2 + 2 Z_L", scale)
        t = r * (z1 + z2) / b
        u = r * z1 / b
        w = r * z2 / b
        half = 0.5 - w / 2
        M0 = np.array([[1, 0, 0], [1 - r, t, u], [1 - r, u, t]], dtype=complex)
        M1 = np.array([[t, 1 - r, r / 2 - w / 2], [0, 1, 0], [w, half + c, half - c]], dtype=complex)
        M2 = np.array([[t, r / 2 - w / 2, 1 - r], [w, half - c, half + c], [0, 0, 1]], dtype=complex)
        d = None
    else:
        c = _check(r * z1 + r * z2 + zc, "c = r Z1 + r Z2 + Z_C", scale)
        d = (1 - r) * z2 - zc
        _check(z2, "Z2", scale)
        s = _check(2 * r * z2 + zl, "2 r Z2 + Z_L", scale)
        e = r * d / (2 * c)
        f = d * (z2 - d) / (2 * c * z2)
        g = d * zl / (2 * z2 * s)
        h = (b + d - z2) / (2 * b)
        k = r / 2 + zl / b
        M0 = np.array(
            [[1 - 2 * zl / b, zl / b, zl / b], [(c + zc) / b, k + e, k - e], [(c + zc) / b, k - e, k + e]],
            dtype=complex,
        )
        # g_{+-} = (1 - g_0 +- h_-)/2 at p10 and p20
        m = 0.5 - c / (2 * b)
        M1 = np.array(
            [
                [c / b, m + f, m - f],
                [zc / b, 1 - zc * (z1 + z2) / (b * z2), z1 * zc / (b * z2)],
                [(r * z2 + zc) / b, h + g, h - g],
            ],
            dtype=complex,
        )
        M2 = np.array(
            [
                [c / b, m - f, m + f],
                [(r * z2 + zc) / b, h - g, h + g],
                [zc / b, z1 * zc / (b * z2), 1 - zc * (z1 + z2) / (b * z2)],
            ],
            dtype=complex,
        )
    return InterpolationSet(hanoi_pq_map(params, pair), M0, M1, M2, b, c, d)


def hanoi_build_level_graph(
    params: HanoiParams,
    pair: CharacteristicPair | None,
    N: int,
    base: tuple[complex, complex] | None = None,
) -> CircuitGraph:
    """Level-N Hanoi graph.  Leaves are Y circuits with arms r^N (Z1, Z2, Z2).

    ``base`` overrides the leaf arms (before scaling) when exploring
    non-self-consistent starting values.
    """
    if not 0 <= N <= MAX_LEVEL:
        raise SizeError(f"level must be in [0, {MAX_LEVEL}], got {N}")
    if base is None:
        if pair is None:
            raise ParamError("need a characteristic pair or explicit base arms")
        base = (pair.Z1, pair.Z2)
    z1, z2 = complex(base[0]), complex(base[1])
    zc, zl, r = params.z_C, params.z_L, params.r
    variant_two = params.variant == "II"
    nodes: list[str] = ["p0", "p1", "p2"]
    edges = []
    cells: dict[str, tuple[str, ...]] = {}

    def build(prefix: str, tips: tuple[str, str, str], k: int, s: float) -> None:
        cells[prefix] = tips
        if k == 0:
            q = node_id(prefix, "q")
            nodes.append(q)
            edges.append(edge(q, tips[0], s * z1))
            edges.append(edge(q, tips[1], s * z2))
            edges.append(edge(q, tips[2], s * z2))
            return
        sub = {}
        for j in range(3):
            for m in range(3):
                if j == m and not variant_two:
                    sub[j, m] = tips[j]
                else:
                    sub[j, m] = node_id(prefix, f"p{j}{m}")
                    nodes.append(sub[j, m])
        if variant_two:
            edges.append(edge(tips[0], sub[0, 0], s * zl))
            edges.append(edge(tips[1], sub[1, 1], s * zc))
            edges.append(edge(tips[2], sub[2, 2], s * zc))
        edges.append(edge(sub[0, 1], sub[1, 0], s * zc))
        edges.append(edge(sub[0, 2], sub[2, 0], s * zc))
        edges.append(edge(sub[1, 2], sub[2, 1], s * zl))
        for j in range(3):
            build(prefix + str(j), (sub[j, 0], sub[j, 1], sub[j, 2]), k - 1, s * r)

    build("", ("p0", "p1", "p2"), N, 1.0)
    return CircuitGraph(tuple(nodes), tuple(edges), ("p0", "p1", "p2"), cells)


def hanoi_harmonic_evaluate(
    params: HanoiParams, pair: CharacteristicPair, v: Sequence[complex], address: str
) -> np.ndarray:
    word = parse_address(address)
    x = np.asarray(v, dtype=complex)
    if not word:
        return x.copy()
    interp = hanoi_interp_matrices(params, pair)
    for j in word:
        x = interp.cell(j) @ x
    return x


def hanoi_iterate(params: HanoiParams, start: tuple[complex, complex], N: int) -> list[tuple[complex, complex]]:
    """Orbit of the level-to-level map on (Z1, Z2).  Exploratory only."""
    if N < 0:
        raise ParamError("N must be >= 0")
    z = (complex(start[0]), complex(start[1]))
    out = [z]
    for _ in range(N):
        z = step_map(params, *z)
        out.append(z)
    return out
