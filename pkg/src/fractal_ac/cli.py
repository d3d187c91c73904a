"""Command-line front end.

Exit codes: 0 success, 2 parameter/usage error, 3 I/O error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fsl, hanoi
from .complexnet import solve_dirichlet
from .errors import (
    AddressError,
    CircuitError,
    DegenerateCase,
    NoSolution,
    ParamError,
    RegimeError,
    SizeError,
)
from .sg import sg_symmetric_conductance

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
ORACLE_TOL = 1e-8
USAGE_ERRORS = (ParamError, NoSolution, AddressError, RegimeError, DegenerateCase, SizeError)
VARIANT = {"hanoi1": "I", "hanoi2": "II"}


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"cannot parse complex literal {text!r}") from None


def cjson(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for --circuit {args.circuit}")


def fsl_params(args, epsilon: float | None = None) -> fsl.CircuitParams:
    _require(args, "omega", "l", "c")
    eps = args.epsilon_value if epsilon is None else epsilon
    return fsl.CircuitParams(args.omega, args.l, args.c, eps)


def hanoi_params(args, epsilon: float | None = None) -> hanoi.HanoiParams:
    _require(args, "omega", "l", "c", "r")
    eps = args.epsilon_value if epsilon is None else epsilon
    return hanoi.HanoiParams(VARIANT[args.circuit], args.r, args.omega, args.l, args.c, eps)


def pick_pair(params: hanoi.HanoiParams, root: int | None) -> hanoi.CharacteristicPair:
    if root is None:
        return hanoi.filter_pair(params)
    pairs = hanoi.hanoi_characteristic_pair(params)
    if not 0 <= root < len(pairs):
        raise UsageError(f"--root must be in [0, {len(pairs) - 1}]")
    return pairs[root]


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# -- impedance ---------------------------------------------------------------

def cmd_impedance(args) -> int:
    if args.circuit == "fsl":
        p = fsl_params(args)
        if p.epsilon == 0:
            res = fsl.fsl_characteristic_impedance(p)
            doc = {"circuit": "fsl", "Omega": p.Omega, "Z": cjson(res.Z),
                   "terminal_impedance": cjson(res.terminal_impedance), "regime": res.regime.value}
        else:
            F = fsl.fsl_flt(p)
            Z = F.physical
            doc = {"circuit": "fsl", "Omega": p.Omega, "epsilon": p.epsilon, "Z": cjson(Z),
                   "terminal_impedance": cjson(2 * Z / 3), "regime": fsl.band_regime(p.Omega).value,
                   "multiplier": abs(F.multiplier_at(Z))}
    elif args.circuit == "sg":
        _require(args, "s")
        g = sg_symmetric_conductance(args.s)
        doc = {"circuit": "sg", "s": args.s, "conductance": cjson(g.value),
               "complex_radicand": g.complex_radicand, "branches": [cjson(b) for b in g.branches]}
    else:
        p = hanoi_params(args)
        roots = [{"Z1": cjson(pr.Z1), "Z2": cjson(pr.Z2), "top_pair": cjson(pr.top_pair),
                  "base": cjson(pr.base), "is_filter_root": pr.is_filter_root, "residual": pr.residual}
                 for pr in hanoi.hanoi_characteristic_pair(p)]
        doc = {"circuit": args.circuit, "r": p.r, "Omega": p.Omega, "roots": roots}
    emit(dump_json(doc), args.out)
    return EXIT_OK


# -- region ------------------------------------------------------------------

def axis(rng, steps, name) -> list[float]:
    """Cell-centred grid on the open interval ``rng``."""
    if steps is None or steps < 2:
        raise UsageError(f"--{name}-steps must be >= 2")
    lo, hi = rng
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise UsageError(f"--{name}-range must be finite and increasing")
    h = (hi - lo) / steps
    return [lo + (k + 0.5) * h for k in range(steps)]


def _axis_from(args, name):
    rng = getattr(args, f"{name}_range")
    if rng is None:
        raise UsageError(f"--{name.replace('_', '')}-range is required")
    return axis(rng, getattr(args, f"{name}_steps"), name.replace("_", ""))


def region_rows(args) -> list[tuple]:
    circuit = args.circuit
    if circuit == "sg":
        return [("sg", s, None, False) for s in _axis_from(args, "r")]
    ws = _axis_from(args, "omega2lc")
    if circuit == "fsl":
        return [("fsl", None, w, fsl.band_regime(w) is fsl.Regime.FILTER) for w in ws]
    rs = [args.r] if args.r is not None else _axis_from(args, "r")
    variant = VARIANT[circuit]
    rows = []
    for r in rs:
        region = hanoi.hanoi_filter_region(variant, r) if r > 0 else None
        for w in ws:
            rows.append((circuit, r, w, bool(region is not None and w > 0 and region.contains(w))))
    return rows


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def region_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["circuit", "r", "omega2lc", "is_filter"])
    for circuit, r, om, flag in rows:
        w.writerow([circuit, _fmt(r), _fmt(om), "true" if flag else "false"])
    return buf.getvalue()


def cmd_region(args) -> int:
    if args.figure and args.circuit == "sg":
        raise UsageError("--figure is not available for sg sweeps")
    rows = region_rows(args)
    if args.format == "json":
        text = dump_json([{"circuit": c, "r": r, "omega2lc": om, "is_filter": f} for c, r, om, f in rows])
    else:
        text = region_csv(rows)
    emit(text, args.out)
    if args.figure:
        from .plotting import plot_region

        plot_region(rows, args.figure, args.circuit)
    return EXIT_OK


# -- harmonic ----------------------------------------------------------------

def cmd_harmonic(args) -> int:
    if args.boundary is None:
        raise UsageError("--boundary a,b,c is required")
    v = [parse_complex(x) for x in args.boundary.split(",")]
    if len(v) != 3:
        raise UsageError("--boundary needs exactly three values")
    doc = {"circuit": args.circuit, "address": args.address}
    if args.circuit == "fsl":
        vals, kappa = fsl.fsl_harmonic_evaluate(fsl_params(args), v, args.address)
        doc["bound"] = kappa
    elif args.circuit in VARIANT:
        p = hanoi_params(args)
        vals = hanoi.hanoi_harmonic_evaluate(p, pick_pair(p, args.root), v, args.address)
    else:
        raise UsageError("harmonic supports fsl, hanoi1 and hanoi2")
    doc["values"] = [cjson(x) for x in vals]
    emit(dump_json(doc), args.out)
    return EXIT_OK


# -- converge ----------------------------------------------------------------

def converge_fsl(args, epsilons, n):
    ideal = fsl.CircuitParams(args.omega, args.l, args.c)
    Z_ideal = fsl.fsl_characteristic_impedance(ideal).Z
    header = ["n", "epsilon", "re", "im", "distance", "fixed_shift"]
    rows, blocks = [], []
    for eps in epsilons:
        p = ideal.with_epsilon(eps)
        F = fsl.fsl_flt(p)
        z_fixed = F.physical
        z0 = p.z_L if args.z0 is None else parse_complex(args.z0)
        orbit = fsl.fsl_iterate(p, z0, n)
        dist = np.abs(orbit - z_fixed)
        shift = abs(z_fixed - Z_ideal)
        blocks.append((eps, dist))
        for k, (z, d) in enumerate(zip(orbit, dist)):
            rows.append([str(k), _fmt(eps), _fmt(z.real), _fmt(z.imag), _fmt(d), _fmt(shift)])
    return header, rows, blocks


def converge_hanoi(args, epsilons, n):
    header = ["n", "epsilon", "re_z1", "im_z1", "re_z2", "im_z2", "distance", "exploratory"]
    rows, blocks = [], []
    for eps in epsilons:
        p = hanoi_params(args, eps)
        pairs = hanoi.hanoi_characteristic_pair(p)
        start = p.z_L if args.z0 is None else parse_complex(args.z0)
        orbit = hanoi.hanoi_iterate(p, (start, start), n)
        dist = [min(max(abs(z1 - q.Z1), abs(z2 - q.Z2)) for q in pairs) for z1, z2 in orbit]
        blocks.append((eps, dist))
        for k, ((z1, z2), d) in enumerate(zip(orbit, dist)):
            rows.append([str(k), _fmt(eps), _fmt(z1.real), _fmt(z1.imag), _fmt(z2.real), _fmt(z2.imag),
                         _fmt(d), "true"])
    return header, rows, blocks


def cmd_converge(args) -> int:
    if args.n is None or args.n < 0:
        raise UsageError("--n must be a non-negative integer")
    epsilons = _float_list(args.epsilon) if args.epsilon else [0.0]
    if not epsilons:
        raise UsageError("--epsilon list is empty")
    if args.circuit == "fsl":
        _require(args, "omega", "l", "c")
        header, rows, blocks = converge_fsl(args, epsilons, args.n)
    elif args.circuit in VARIANT:
        header, rows, blocks = converge_hanoi(args, epsilons, args.n)
    else:
        raise UsageError("converge supports fsl, hanoi1 and hanoi2")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    emit(buf.getvalue(), args.out)
    if args.figure:
        from .plotting import plot_convergence

        plot_convergence(blocks, args.figure)
    return EXIT_OK


# -- oracle ------------------------------------------------------------------

def _rel(pred, solved) -> float:
    pred, solved = np.asarray(pred), np.asarray(solved)
    return float(np.max(np.abs(pred - solved)) / max(float(np.max(np.abs(solved))), 1e-300))


def _addresses(level):
    for k in range(1, level + 1):
        for word in itertools.product("012", repeat=k):
            yield "".join(word)


def _star_currents(arms, v):
    y = 1 / np.asarray(arms)
    centre = np.sum(y * v) / np.sum(y)
    return y * (v - centre)


def _delta_currents(z, v):
    return np.array([sum((v[i] - v[j]) / z for j in range(3) if j != i) for i in range(3)])


def oracle_checks(args, trials, level, seed) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    dev: dict[str, float] = {}

    def record(name, value):
        dev[name] = max(dev.get(name, 0.0), value)

    terms = ("p0", "p1", "p2")
    if args.circuit == "fsl":
        p = fsl_params(args)
        approx = fsl.fsl_build_level_graph(p, level)
        z_n = fsl.fsl_iterate(p, p.z_L, level)[-1]
        interp = fsl.fsl_harmonic_matrices(p)
        reduced = fsl.fsl_build_level_graph(p, level, z0=interp.Z)
        for _ in range(trials):
            v = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
            bc = dict(zip(terms, v))
            sol = solve_dirichlet(approx, bc)
            record("terminal_currents", _rel(_delta_currents(z_n, v), [sol.boundary_currents[t] for t in terms]))
            sol = solve_dirichlet(reduced, bc)
            qs = [reduced.cells[str(j)][j] for j in range(3)]
            record("pq_map", _rel(interp.M @ v, sol.voltages(qs)))
            for w in _addresses(level):
                record(f"cell/{w}", _rel(fsl.fsl_harmonic_evaluate(p, v, w)[0], sol.voltages(reduced.cells[w])))
    elif args.circuit in VARIANT:
        p = hanoi_params(args)
        pair = pick_pair(p, args.root)
        graph = hanoi.hanoi_build_level_graph(p, pair, level)
        one = hanoi.hanoi_build_level_graph(p, pair, 1)
        interp = hanoi.hanoi_interp_matrices(p, pair)
        for _ in range(trials):
            v = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
            bc = dict(zip(terms, v))
            sol = solve_dirichlet(graph, bc)
            record("terminal_currents", _rel(_star_currents((pair.Z1, pair.Z2, pair.Z2), v),
                                             [sol.boundary_currents[t] for t in terms]))
            for w in _addresses(level):
                record(f"cell/{w}", _rel(hanoi.hanoi_harmonic_evaluate(p, pair, v, w),
                                         sol.voltages(graph.cells[w])))
            sol1 = solve_dirichlet(one, bc)
            record("pq_map", _rel(interp.pq_matrix @ v, sol1.voltages(["0/q", "1/q", "2/q"])))
    else:
        raise UsageError("oracle supports fsl, hanoi1 and hanoi2")
    return dev


def cmd_oracle(args) -> int:
    if args.level is None or not 1 <= args.level <= 3:
        raise UsageError("--level must be 1, 2 or 3")
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    dev = oracle_checks(args, args.trials, args.level, args.seed)
    checks = [{"name": k, "max_rel_deviation": v, "passed": v <= ORACLE_TOL} for k, v in sorted(dev.items())]
    ok = all(c["passed"] for c in checks)
    doc = {"circuit": args.circuit, "level": args.level, "trials": args.trials, "seed": args.seed,
           "tolerance": ORACLE_TOL, "checks": checks, "passed": ok}
    emit(dump_json(doc), args.out)
    return EXIT_OK if ok else EXIT_NUMERIC


# -- plumbing ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--circuit", required=True, choices=["fsl", "hanoi1", "hanoi2", "sg"])
    shared.add_argument("--omega", type=float)
    shared.add_argument("--l", type=float)
    shared.add_argument("--c", type=float)
    shared.add_argument("--r", type=float)
    shared.add_argument("--s", type=float)
    shared.add_argument("--epsilon", type=str, default=None,
                        help="series resistance; comma-separated list for converge")
    shared.add_argument("--seed", type=int, default=0)
    shared.add_argument("--out", default=None)
    shared.add_argument("--format", choices=["csv", "json"], default="csv")
    shared.add_argument("--root", type=int, default=None, help="index of the Hanoi root to use")

    parser = argparse.ArgumentParser(prog="fractal-ac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("impedance", parents=[shared], help="characteristic impedance(s)")

    region = sub.add_parser("region", parents=[shared], help="filter-region sweep")
    region.add_argument("--r-range", type=float, nargs=2, metavar=("LO", "HI"))
    region.add_argument("--r-steps", type=int)
    region.add_argument("--omega2lc-range", type=float, nargs=2, metavar=("LO", "HI"))
    region.add_argument("--omega2lc-steps", type=int)
    region.add_argument("--figure", default=None, help="also render the region to this image file")

    harmonic = sub.add_parser("harmonic", parents=[shared], help="harmonic function on a cell")
    harmonic.add_argument("--boundary", help="three complex values, e.g. 1,0,0.5-2i")
    harmonic.add_argument("--address", default="")

    converge = sub.add_parser("converge", parents=[shared], help="orbits of finite approximations")
    converge.add_argument("--n", type=int)
    converge.add_argument("--z0", default=None, help="starting impedance (default Z_L)")
    converge.add_argument("--figure", default=None)

    oracle = sub.add_parser("oracle", parents=[shared], help="Kirchhoff cross-checks")
    oracle.add_argument("--level", type=int, default=1)
    oracle.add_argument("--trials", type=int, default=20)
    return parser


COMMANDS = {
    "impedance": cmd_impedance,
    "region": cmd_region,
    "harmonic": cmd_harmonic,
    "converge": cmd_converge,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command != "converge":
            vals = _float_list(args.epsilon) if args.epsilon else [0.0]
            if len(vals) != 1:
                raise UsageError("--epsilon takes a single value here")
            args.epsilon_value = vals[0]
        else:
            args.epsilon_value = 0.0
        return COMMANDS[args.command](args)
    except (UsageError, *USAGE_ERRORS) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CircuitError as exc:
        point = {k: getattr(args, k) for k in ("circuit", "omega", "l", "c", "r", "epsilon")}
        print(f"error: {type(exc).__name__}: {exc} at {point}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
