"""Acceptance checks, one PASS/FAIL line each in the terminal summary.

Two checks are known to fail as stated and are marked strict xfail; see
their reasons for the measured values.
"""
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import sympy

from fractal_ac import complexnet as cn
from fractal_ac import fsl, hanoi
from fractal_ac.sg import sg_symmetric_conductance

from conftest import energy_gap

GOLDEN = Path(__file__).parent / "golden"
EDGES_2W = (9 * (4 - math.sqrt(15)), 9 * (4 + math.sqrt(15)))
P2 = fsl.CircuitParams(1.0, 2.0, 1.0)  # Omega = 2
HANOI_POINTS = {
    "I": [(0.1, 2.0), (0.2, 5.0), (0.3, 1.0), (0.4, 1.0), (0.55, 10.0)],
    "II": [(0.1, 2.0), (0.2, 3.0), (0.3, 2.0), (0.45, 2.0), (0.58, 2.2)],
}


def fsl_at(W, eps=0.0):
    return fsl.CircuitParams(math.sqrt(W), 1.0, 1.0, eps)


def hanoi_at(variant, r, W, L=1.0, C=1.0):
    return hanoi.HanoiParams(variant, r, math.sqrt(W / (L * C)), L, C)


def is_filter(W):
    return fsl.fsl_characteristic_impedance(fsl_at(W)).Z.real > 0


def bisect_edge(a, b):
    fa = is_filter(a)
    while True:
        m = (a + b) / 2
        if m in (a, b):
            return m
        if is_filter(m) == fa:
            a = m
        else:
            b = m


def test_fsl_band_edges(report):
    found = (2 * bisect_edge(0.3, 1.0), 2 * bisect_edge(30.0, 40.0))
    err = max(abs(f - e) for f, e in zip(found, EDGES_2W))
    report("A1 fsl band edges in 2*Omega", err <= 1e-10, f"max err {err:.2e}")
    assert err <= 1e-10


@pytest.mark.xfail(strict=True, reason="Re Z ~ sqrt(disc): up to 4.9e-5 at offset 1e-9, not <= 1e-8")
def test_fsl_edge_real_part_vanishes(report):
    worst = 0.0
    for edge in EDGES_2W:
        for off in (-1e-9, 1e-9):
            worst = max(worst, abs(fsl.fsl_characteristic_impedance(fsl_at(edge / 2 + off)).Z.real))
    report("A1 fsl |Re Z| <= 1e-8 at edge offsets 1e-9", worst <= 1e-8, f"max |Re Z| {worst:.2e}")
    assert worst <= 1e-8


def test_fsl_fixed_point_consistency(report):
    lo, hi = EDGES_2W[0] / 2, EDGES_2W[1] / 2
    grid = np.linspace(lo, hi, 102)[1:-1]
    fix = mult = 0.0
    for W in grid:
        p = fsl_at(W)
        Z = fsl.fsl_characteristic_impedance(p).Z
        F = fsl.fsl_flt(p)
        fix = max(fix, abs(F(Z) - Z) / abs(Z))
        mult = max(mult, abs(abs(F.multiplier_at(Z)) - 1))
    ok = fix <= 1e-11 and mult <= 1e-10
    report("A2 fsl fixed point and |F'| = 1", ok, f"|F(Z)-Z|/|Z| {fix:.1e}, ||F'|-1| {mult:.1e}")
    assert ok


def test_fsl_ideal_orbit_does_not_converge(report):
    Z = fsl.fsl_characteristic_impedance(P2).Z
    orbit = fsl.fsl_iterate(P2, P2.z_L, 10_000)
    gap = float(np.min(np.abs(orbit[100:] - Z)))
    ok = gap >= 0.01 * abs(Z)
    report("A3 fsl eps=0 orbit stays away", ok, f"min dist {gap:.3f} vs {0.01 * abs(Z):.4f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="|F'_eps| ~ 1 - 2 eps: distances 8.9e-9, 0.43, 3.4 at N=1000")
def test_fsl_regularized_orbit_converges_by_1000(report):
    dists = []
    for eps in (1e-2, 1e-3, 1e-4):
        p = P2.with_epsilon(eps)
        Ze = fsl.fsl_flt(p).physical
        dists.append(abs(fsl.fsl_iterate(p, p.z_L, 1000)[-1] - Ze))
    ok = max(dists) < 1e-10
    report("A3 fsl eps>0 orbit within 1e-10 by N=1000", ok, "dists " + ", ".join(f"{d:.1e}" for d in dists))
    assert ok


def test_fsl_regularized_limit_decreases(report):
    Z = fsl.fsl_characteristic_impedance(P2).Z
    gaps = [abs(pt.Z - Z) for pt in fsl.fsl_regularized_limit(P2, [1e-2, 1e-3, 1e-4])]
    ok = gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-3
    report("A3 fsl |Z_eps - Z| decreasing, final < 1e-3", ok, ", ".join(f"{g:.1e}" for g in gaps))
    assert ok


def test_fsl_level_graph_oracle(report):
    p = P2.with_epsilon(0.01)
    worst, elapsed = 0.0, 0.0
    for N in range(4):
        expected = 2 * fsl.fsl_iterate(p, p.z_L, N)[-1] / 3
        t0 = time.perf_counter()
        got = cn.effective_impedance(fsl.fsl_build_level_graph(p, N), "p0", "p1")
        elapsed = time.perf_counter() - t0
        worst = max(worst, abs(got - expected) / abs(expected))
    ok = worst <= 1e-9 and elapsed < 10
    report("A4 fsl level-N graph vs F^N", ok, f"rel err {worst:.1e}, N=3 in {elapsed:.2f}s")
    assert ok


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def test_harmonic_oracle_all_circuits(report):
    rng = np.random.default_rng(2024)
    triples = [rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3) for _ in range(20)]
    dev = stoch = spectrum = 0.0

    for W in (1.0, 2.0, 17.5, 30.0):
        p = fsl_at(W)
        interp = fsl.fsl_harmonic_matrices(p)
        g = fsl.fsl_build_level_graph(p, 1, z0=interp.Z)
        for M in (interp.M, interp.M0, interp.M1, interp.M2):
            stoch = max(stoch, float(np.max(np.abs(M.sum(axis=1) - 1))))
        for v in triples:
            sol = cn.solve_dirichlet(g, dict(zip(g.terminals, v)))
            dev = max(dev, _rel(interp.M @ v, sol.voltages([g.cells[str(j)][j] for j in range(3)])))
            for j in range(3):
                dev = max(dev, _rel(interp.cell(j) @ interp.M @ v, sol.voltages(g.cells[str(j)])))

    for variant, points in HANOI_POINTS.items():
        for r, W in points:
            p = hanoi_at(variant, r, W)
            pair = hanoi.filter_pair(p)
            interp = hanoi.hanoi_interp_matrices(p, pair)
            g = hanoi.hanoi_build_level_graph(p, pair, 1)
            for M in (interp.pq_matrix, interp.M0, interp.M1, interp.M2):
                stoch = max(stoch, float(np.max(np.abs(M.sum(axis=1) - 1))))
            for v in triples:
                sol = cn.solve_dirichlet(g, dict(zip(g.terminals, v)))
                dev = max(dev, _rel(interp.pq_matrix @ v, sol.voltages(["0/q", "1/q", "2/q"])))
                for j in range(3):
                    dev = max(dev, _rel(interp.cell(j) @ v, sol.voltages(g.cells[str(j)])))
            if variant == "I":
                for vec, lam in (((1, 1, 1), 1), ((0, 1, 1), r), ((0, 1, -1), r * pair.Z2 / interp.b)):
                    x = np.array(vec, dtype=complex)
                    spectrum = max(spectrum, float(np.max(np.abs(interp.M0 @ x - lam * x))))

    ok = dev <= 1e-9 and stoch <= 1e-12 and spectrum <= 1e-10
    report("A5 harmonic matrices vs Dirichlet", ok,
           f"dev {dev:.1e}, row sums {stoch:.1e}, M0 spectrum {spectrum:.1e}")
    assert ok


def test_hanoi_one_closed_forms(report):
    half = 0.0
    for L, C, omega in ((1, 1, 1), (2, 0.5, 3), (0.3, 1.2, 0.7)):
        pair = hanoi.filter_pair(hanoi.HanoiParams("I", 0.5, omega, L, C))
        half = max(half, abs(pair.Z2 - 2 * math.sqrt(L / C)))
    lo, hi = hanoi.hanoi_filter_region("I", 0.4).interval
    ends = max(abs(lo - (11 - math.sqrt(120))), abs(hi - (11 + math.sqrt(120))))
    level = 0.0
    for r, W in HANOI_POINTS["I"]:
        p = hanoi_at("I", r, W, L=1.3, C=0.6)
        pair = hanoi.filter_pair(p)
        g = hanoi.hanoi_build_level_graph(p, pair, 1)
        level = max(level, abs(cn.effective_impedance(g, "p0", "p1") - pair.top_pair) / abs(pair.top_pair),
                    abs(cn.effective_impedance(g, "p1", "p2") - pair.base) / abs(pair.base))
    ok = half <= 1e-12 and ends <= 1e-10 and level <= 1e-9
    report("A6 hanoi I closed forms", ok, f"Z2(1/2) {half:.1e}, endpoints {ends:.1e}, level-1 {level:.1e}")
    assert ok


def test_hanoi_two_special_value(report):
    grid = [r for r in np.linspace(0, 0.6, 52)[1:-1] if abs(r - 0.5) > 1e-9][:50]
    inside = all(hanoi.hanoi_is_filter("II", float(r), 2.0) for r in grid)
    outside = not any(hanoi.hanoi_is_filter("II", r, 2.0) for r in (0.7, 0.9, 1.1, 2.0))

    r, W = sympy.symbols("r W")
    A, B, K = hanoi.hanoi2_filter_polynomial(r)
    poly = sympy.expand(A * W**2 + B * W + K)
    identity = sympy.expand(poly.subs(W, 2) + 8 * r * (2 * r - 1) ** 2 * (5 * r - 3)) == 0

    signs = True
    for x in np.linspace(0.001, 3, 3000):
        if min(abs(x - t) for t in (0.5, 0.6)) < 1e-6:
            continue
        a, b, k = hanoi.hanoi2_filter_polynomial(float(x))
        signs &= np.sign(4 * a + 2 * b + k) == np.sign(-8 * x * (2 * x - 1) ** 2 * (5 * x - 3))
    ok = inside and outside and identity and bool(signs)
    report("A7 hanoi II at Omega=2", ok, f"grid {inside}, outside {outside}, identity {identity}, signs {signs}")
    assert ok


def test_sg_realness(report):
    worst = max(abs(sg_symmetric_conductance(float(s)).value.imag) for s in np.linspace(0.028, 1.4, 50))
    report("A8 sg conductance real", worst <= 1e-13, f"max |Im| {worst:.1e}")
    assert worst <= 1e-13


def _balance_cases():
    rng = np.random.default_rng(9)
    for N in range(4):
        for p in (P2, P2.with_epsilon(0.01), fsl_at(30.0, 0.2)):
            yield fsl.fsl_build_level_graph(p, N)
    for variant, points in HANOI_POINTS.items():
        for r, W in points[:3]:
            p = hanoi_at(variant, r, W)
            for N in range(3):
                yield hanoi.hanoi_build_level_graph(p, hanoi.filter_pair(p), N)
    for _ in range(5):
        yield hanoi.hanoi_build_level_graph(hanoi_at("I", 0.4, 1.0), None, 2,
                                            base=tuple(rng.uniform(0, 1, 2) + 1j * rng.uniform(-1, 1, 2)))


def test_energy_balance(report):
    # every solve in the suite is also checked by the conftest guard
    rng = np.random.default_rng(1)
    worst, imag_worst, count = 0.0, 0.0, 0
    for g in _balance_cases():
        v = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
        sol = cn.solve_dirichlet(g, dict(zip(g.terminals, v)))
        edge_sum, inflow, gap = energy_gap(g, sol)
        worst = max(worst, gap)
        if all(e.z.real == 0 for e in g.edges):
            imag_worst = max(imag_worst, abs(edge_sum), abs(inflow))
        count += 1
    ok = worst <= 1e-10 and imag_worst <= 1e-12
    report("A9 energy balance", ok, f"{count} graphs, rel gap {worst:.1e}, lossless {imag_worst:.1e}")
    assert ok


def _sweep(circuit):
    argv = [sys.executable, "-m", "fractal_ac.cli", "region", "--circuit", circuit,
            "--r-range", "0", "1", "--r-steps", "200", "--omega2lc-range", "0", "10", "--omega2lc-steps", "200"]
    return subprocess.run(argv, capture_output=True, check=True).stdout


def test_region_golden_files(report, regen_golden):
    results = []
    for circuit in ("hanoi1", "hanoi2"):
        first, second = _sweep(circuit), _sweep(circuit)
        path = GOLDEN / f"{circuit}_region.csv"
        if regen_golden:
            path.write_bytes(first)
        results.append(first == second and path.read_bytes() == first and first.count(b"\n") == 40001)
    ok = all(results)
    report("A10 region CSV golden files", ok, f"hanoi1 {results[0]}, hanoi2 {results[1]}")
    assert ok
