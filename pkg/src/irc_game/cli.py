"""Command-line entry point.

Every subcommand reads a scenario document (``--scenario``), computes, and
writes either JSON (a top-level ``schema_version`` plus the result) or CSV
(one row per trajectory step or grid point).  Numbers carry 12 significant
digits.  With ``--format csv --out FILE`` the JSON summary is written next to
the table as ``FILE.json``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import afgain, canonical, game, kernels, leader
from .af_analytic import basin_map, br_coefficients, enumerate_ne
from .af_analytic import affine_cournot as exact_cournot
from .game import PowerAllocation
from .rates import ef_pair, saturating_gain
from .scenario import (SCHEMA_VERSION, BandChannel, DomainError, NodeLayout, Protocol,
                       Scenario, ScenarioError, check, layout_to_scenario, load_scenario,
                       scenario_to_dict)

DIGITS = 12
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
RANDOM_FAMILIES = ("random-complex", "random-real-pathloss")


class NumericalError(RuntimeError):
    """A computation finished without a usable numerical result."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


# ------------------------------------------------------------------ output


def fmt(x) -> str:
    return f"{float(x):.{DIGITS}g}"


def _clean(obj):
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(fmt(x))
    return obj


def to_json(doc: dict) -> str:
    return json.dumps(_clean({"schema_version": SCHEMA_VERSION, **doc}), indent=2) + "\n"


def to_csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


class Output:
    """Summary dict plus an optional table (columns, rows)."""

    def __init__(self, summary: dict, columns=None, rows=None, default_format="json"):
        self.summary = summary
        self.columns = columns
        self.rows = rows
        self.default_format = default_format

    def write(self, fmt_name: str | None, out: str | None) -> None:
        fmt_name = fmt_name or self.default_format
        if fmt_name == "csv" and self.columns is not None:
            _emit(to_csv(self.columns, self.rows), out)
            if out:
                _emit(to_json(self.summary), out + ".json")
            return
        doc = dict(self.summary)
        if self.columns is not None:
            doc["rows"] = [dict(zip(self.columns, r)) for r in self.rows]
        _emit(to_json(doc), out)


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ------------------------------------------------------------------ helpers


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise DomainError(f"{name}: expected comma-separated numbers") from exc


def _load(args) -> tuple[Scenario, NodeLayout | None]:
    if not args.scenario:
        raise DomainError("--scenario is required")
    sc, layout = load_scenario(args.scenario)
    if args.gain_denominator:
        sc = replace(sc, gain_denominator=args.gain_denominator)
    return check(sc), layout


def _allocation(values: list[float], q: int, name: str) -> PowerAllocation:
    if q == 2 and len(values) == 2:
        return PowerAllocation.two_band(values[0], values[1])
    if len(values) != 2 * q:
        raise DomainError(f"{name}: give theta1 then theta2 ({2 * q} numbers)"
                          + (" or two first-band fractions" if q == 2 else ""))
    return PowerAllocation(tuple(values[:q]), tuple(values[q:]))


def _theta_cols(q: int) -> list[str]:
    return [f"theta{u}_{k}" for u in (1, 2) for k in range(q)]


def _theta_vals(theta: PowerAllocation | None, q: int) -> list[float]:
    if theta is None:
        return [math.nan] * (2 * q)
    return [float(v) for v in theta.theta1] + [float(v) for v in theta.theta2]


def _finite(*xs) -> None:
    if not all(math.isfinite(float(x)) for x in xs):
        raise NumericalError("non-finite result")


# ------------------------------------------------------------------ commands


def cmd_rates(args) -> Output:
    sc, _ = _load(args)
    q = args.band
    if not 0 <= q < sc.n_bands:
        raise DomainError(f"band {q} out of range (scenario has {sc.n_bands})")
    band = sc.bands[q]
    p = _floats(args.powers, "--powers") if args.powers else [sc.p1, sc.p2]
    if len(p) != 2 or min(p) < 0:
        raise DomainError("--powers needs two nonnegative numbers")
    codes, packed = kernels.pack_scenario(sc)
    r = kernels.pair_rates(int(codes[q]), packed[q], float(p[0]), float(p[1]))
    _finite(*r)
    diag: dict = {"protocol": sc.protocol.value}
    inner = sc.protocol.inner
    if inner is Protocol.DF:
        diag.update(tau=list(sc.tau[q]), nu=sc.nu[q])
    elif inner is Protocol.EF:
        _, _, case_id, nwz1, nwz2 = ef_pair(band, p[0], p[1], sc.nu[q], sc.ef_cases)
        diag.update(nu=sc.nu[q], case=int(case_id), nwz1=float(nwz1), nwz2=float(nwz2))
    else:
        g = sc.gain[q]
        if g is None:
            pw = (sc.p1, sc.p2) if sc.gain_denominator == "full" else p
            g = float(saturating_gain(band, pw))
        diag.update(gain=g)
    if sc.protocol.time_sharing and sc.ts[q] is not None:
        ts = sc.ts[q]
        diag.update(ts={"alpha1": ts.alpha1, "alpha2": ts.alpha2,
                        "beta1": ts.beta1, "beta2": ts.beta2})
    summary = {"command": "rates", "band": q, "p1": p[0], "p2": p[1],
               "r1": float(r[0]), "r2": float(r[1]), "sum": float(r[0] + r[1]), **diag}
    return Output(summary, ["band", "p1", "p2", "r1", "r2"],
                  [[q, float(p[0]), float(p[1]), float(r[0]), float(r[1])]])


def cmd_af_gain(args) -> Output:
    sc, _ = _load(args)
    q = args.band
    if not 0 <= q < sc.n_bands:
        raise DomainError(f"band {q} out of range (scenario has {sc.n_bands})")
    band = sc.bands[q]
    powers = (sc.p1, sc.p2)
    a_max = args.a_max if args.a_max is not None else float(saturating_gain(band, powers))
    summary = {"command": "af-gain", "band": q, "a_max": a_max}
    rows = []
    for user in (0, 1):
        gp = afgain.gain_params(band, powers, user)
        sol = afgain.optimal_gain(gp, a_max)
        _finite(sol.optimum, sol.rate)
        summary[f"user{user + 1}"] = {
            "optimum": sol.optimum, "rate": sol.rate, "discriminant": sol.discriminant,
            "roots": list(sol.roots),
            "candidates": [{"gain": a, "rate": r} for a, r in sol.candidates],
        }
        rows.append([user + 1, sol.optimum, sol.rate, sol.discriminant])
    a_sum = afgain.sum_rate_gain(band, powers, a_max)
    summary["sum_rate"] = {"optimum": a_sum,
                           "rate": float(afgain.sum_rate(band, powers, a_sum))}
    return Output(summary, ["user", "optimum", "rate", "discriminant"], rows)


def _ne_point(p) -> dict:
    return {"theta1": p.theta1, "theta2": p.theta2, "kind": p.kind,
            "stability": p.stability, "slope_product": p.slope_product}


def cmd_ne(args) -> Output:
    sc, _ = _load(args)
    verify_tol = args.tol if args.tol is not None else 1e-6
    if args.analytic:
        coeffs = br_coefficients(sc, args.d_reading)
        ne = enumerate_ne(coeffs)
        pts, rows = [], []
        for p in ne.points:
            chk = game.verify_ne(None, sc, PowerAllocation.two_band(p.theta1, p.theta2),
                                 verify_tol)
            pts.append({**_ne_point(p), "verified": chk.passed,
                        "max_improvement": chk.max_improvement})
            rows.append([p.theta1, p.theta2, p.kind, p.stability, p.slope_product,
                         int(chk.passed)])
        summary = {"command": "ne", "method": "analytic", "cardinality": ne.cardinality,
                   "coefficients": {"c11": coeffs.c11, "c12": coeffs.c12, "c21": coeffs.c21,
                                    "c22": coeffs.c22, "d1": coeffs.d1, "d2": coeffs.d2},
                   "points": pts,
                   "segment": [list(e) for e in ne.segment] if ne.segment else None}
        return Output(summary, ["theta1", "theta2", "kind", "stability", "slope_product",
                                "verified"], rows)
    policy = "multistart" if args.multistart else "cournot"
    pt = leader.equilibrium(sc, policy, max_iter=args.max_iter, verify_tol=verify_tol)
    if not pt.converged:
        raise NumericalError("best-response dynamics did not converge")
    q = sc.n_bands
    found = pt.equilibria or (pt.theta,)
    rows = []
    for th in found:
        u = game.utilities(None, sc, th)
        chk = game.verify_ne(None, sc, th, verify_tol)
        rows.append(_theta_vals(th, q) + [u[0], u[1], int(chk.passed), chk.max_improvement])
    summary = {"command": "ne", "method": policy, "count": len(rows),
               "best_sum_rate": pt.sum_rate, "iterations": pt.iterations}
    return Output(summary, _theta_cols(q) + ["u1", "u2", "verified", "max_improvement"], rows)


def cmd_cournot(args) -> Output:
    sc, _ = _load(args)
    q = sc.n_bands
    start = (_allocation(_floats(args.start, "--start"), q, "--start") if args.start
             else PowerAllocation.uniform(q))
    tol = args.tol if args.tol is not None else 1e-8
    if args.analytic:
        coeffs = br_coefficients(sc, args.d_reading)
        t1, t2 = float(start.theta1[0]), float(start.theta2[0])
        states = [(t1, t2)]
        converged = False
        for _ in range(args.max_iter):
            n1, n2, _, _ = exact_cournot(coeffs, t1, t2, 1, 0.0)
            step = max(abs(n1 - t1), abs(n2 - t2))
            t1, t2 = n1, n2
            states.append((t1, t2))
            if step < tol:
                converged = True
                break
        allocs = [PowerAllocation.two_band(a, b) for a, b in states]
    else:
        tr = game.cournot(None, sc, start, args.max_iter, tol)
        allocs, converged = tr.states, tr.converged
    rows = []
    for k, th in enumerate(allocs):
        u = game.utilities(None, sc, th)
        rows.append([k] + _theta_vals(th, q) + [u[0], u[1]])
    summary = {"command": "cournot", "converged": converged, "iterations": len(allocs) - 1,
               "final": {"theta1": list(allocs[-1].theta1), "theta2": list(allocs[-1].theta2)},
               "analytic": bool(args.analytic)}
    return Output(summary, ["iteration"] + _theta_cols(q) + ["u1", "u2"], rows,
                  default_format="csv")


def cmd_basin(args) -> Output:
    sc, _ = _load(args)
    coeffs = br_coefficients(sc, args.d_reading)
    tol = args.tol if args.tol is not None else 1e-12
    bm = basin_map(coeffs, args.resolution, args.max_iter, tol)
    rows = [[float(a), float(b), int(lab), int(it)] for a, b, lab, it in
            zip(bm.theta1.ravel(), bm.theta2.ravel(), bm.label.ravel(), bm.iterations.ravel())]
    labels, counts = np.unique(bm.label, return_counts=True)
    summary = {"command": "basin", "resolution": args.resolution,
               "points": [_ne_point(p) for p in bm.ne.points],
               "counts": {str(int(k)): int(c) for k, c in zip(labels, counts)}}
    return Output(summary, ["theta1_start", "theta2_start", "label", "iterations"], rows,
                  default_format="csv")


def _sweep_output(name: str, spec, result, q: int) -> Output:
    try:
        best, best_sum = leader.best_leader_value(result)
    except DomainError as exc:
        raise NumericalError(str(exc)) from exc
    pos = spec.variable == "relay_position"
    cols = (["x", "y"] if pos else ["value"]) + _theta_cols(q) + [
        "u1", "u2", "sum_rate", "converged", "iterations", "verified", "max_improvement"]
    rows = []
    for p in result.points:
        head = list(p.value) if pos else [p.value]
        rows.append(head + _theta_vals(p.theta, q) + [
            p.u1, p.u2, p.sum_rate, int(p.converged), p.iterations, int(p.verified),
            p.max_improvement])
    summary = {"command": name, "variable": spec.variable, "policy": spec.policy,
               "argmax": list(best) if pos else best, "max_sum_rate": best_sum,
               "points": len(rows), "converged": sum(p.converged for p in result.points)}
    return Output(summary, cols, rows, default_format="csv")


def _spec_common(args) -> dict:
    return {"policy": args.policy, "max_iter": args.max_iter,
            "tol": args.tol if args.tol is not None else 1e-8, "d_reading": args.d_reading}


def cmd_sweep_gain(args) -> Output:
    sc, _ = _load(args)
    a_max = args.a_max if args.a_max is not None else leader.saturating_gain_full(sc, args.band)
    vals = tuple(np.linspace(0.0, a_max, args.points))
    if sc.protocol.inner is Protocol.AF:
        sc = sc.with_protocol(Protocol.AF_FIXED.wrapped() if sc.protocol.time_sharing
                              else Protocol.AF_FIXED)
    gains = tuple(0.0 if g is None else g for g in sc.gain)
    sc = replace(sc, gain=gains)
    spec = leader.SweepSpec("amplification", values=vals, band=args.band, **_spec_common(args))
    out = _sweep_output("sweep-gain", spec, leader.sweep(spec, sc), sc.n_bands)
    out.summary["a_max"] = a_max
    return out


def cmd_sweep_nu(args) -> Output:
    sc, _ = _load(args)
    vals = tuple(np.linspace(0.0, 1.0, args.points))
    spec = leader.SweepSpec("nu", values=vals, band=args.band, **_spec_common(args))
    return _sweep_output("sweep-nu", spec, leader.sweep(spec, sc), sc.n_bands)


def cmd_sweep_position(args) -> Output:
    sc, layout = _load(args)
    if layout is None:
        raise DomainError("position sweeps need a scenario with a node layout")
    axis = tuple(np.linspace(-args.extent, args.extent, args.points))
    spec = leader.SweepSpec("relay_position", xs=axis, ys=axis, **_spec_common(args))
    return _sweep_output("sweep-position", spec, leader.sweep(spec, sc, layout), sc.n_bands)


def cmd_dominance_map(args) -> Output:
    sc, layout = _load(args)
    if layout is None:
        raise DomainError("dominance maps need a scenario with a node layout")
    x0, x1 = _floats(args.x_range, "--x-range")
    y0, y1 = _floats(args.y_range, "--y-range")
    d0 = layout.d0
    xs = np.linspace(x0, x1, args.points) * d0
    ys = np.linspace(y0, y1, args.points) * d0
    m = leader.dominance_map(sc, layout, xs, ys)
    rows = [[float(x), float(y), str(m.labels[i, j]), float(m.df[i, j]), float(m.ef[i, j]),
             float(m.af[i, j]), int(m.ef_case[i, j])]
            for i, x in enumerate(xs) for j, y in enumerate(ys)]
    summary = {"command": "dominance-map", "counts": m.counts()}
    if args.cut_y is not None:
        cut = leader.ef_cut(sc, layout, np.linspace(x0, x1, args.cut_points) * d0,
                            args.cut_y * d0)
        summary["ef_cut"] = {"y": cut.y, "crossings": [
            {"x": x, "jump": j, "adjacent_variation": v} for x, j, v in cut.crossings]}
    return Output(summary, ["x", "y", "label", "df", "ef", "af", "ef_case"], rows,
                  default_format="csv")


# ------------------------------------------------------------------ generator


def _random_complex(rng: np.random.Generator, q: int, protocol: Protocol) -> Scenario:
    bands = []
    for _ in range(q):
        z = (rng.standard_normal(8) + 1j * rng.standard_normal(8)) / math.sqrt(2.0)
        bands.append(BandChannel(*[complex(v) for v in z], noise_d1=1.0, noise_d2=1.0,
                                 noise_r=1.0, relay_power=float(rng.uniform(0.5, 10.0))))
    sc = Scenario(tuple(bands), p1=float(rng.uniform(0.5, 10.0)),
                  p2=float(rng.uniform(0.5, 10.0)), protocol=protocol)
    return _random_settings(rng, sc)


def _random_settings(rng: np.random.Generator, sc: Scenario) -> Scenario:
    q = sc.n_bands
    nu = tuple(float(v) for v in rng.uniform(0.0, 1.0, q))
    gain = sc.gain
    if sc.protocol.inner is Protocol.AF_FIXED:
        gain = tuple(float(rng.uniform(0.0, 1.0)) * leader.saturating_gain_full(sc, k)
                     for k in range(q))
    return replace(sc, nu=nu, gain=gain)


def _random_pathloss(rng: np.random.Generator, q: int,
                     protocol: Protocol) -> tuple[Scenario, NodeLayout]:
    pts = [tuple(float(v) for v in rng.uniform(-10.0, 10.0, 2)) for _ in range(5)]
    layout = NodeLayout(s1=pts[0], s2=pts[1], d1=pts[2], d2=pts[3], relay=pts[4],
                        eps=float(rng.uniform(0.1, 1.0)), d0=1.0,
                        gamma=tuple(float(g) for g in rng.uniform(2.0, 3.0, q)))
    sc = layout_to_scenario(layout, p1=float(rng.uniform(1.0, 20.0)),
                            p2=float(rng.uniform(1.0, 20.0)),
                            relay_power=float(rng.uniform(1.0, 20.0)), protocol=protocol)
    return _random_settings(rng, sc), layout


def gen_scenario(seed: int, family: str, bands: int = 2,
                 protocol: Protocol | str = Protocol.AF_FIXED) -> dict:
    """Scenario document of a family; random families are fully fixed by ``seed``."""
    protocol = Protocol(protocol)
    if family in canonical.FAMILIES:
        sc = canonical.FAMILIES[family]()
        layout = canonical.canonical_layout(family)
    elif family in RANDOM_FAMILIES:
        if bands < 1:
            raise DomainError("--bands must be at least 1")
        rng = np.random.default_rng(seed)
        if family == "random-complex":
            sc, layout = _random_complex(rng, bands, protocol), None
        else:
            sc, layout = _random_pathloss(rng, bands, protocol)
    else:
        known = ", ".join(RANDOM_FAMILIES + tuple(canonical.FAMILIES))
        raise DomainError(f"unknown family {family!r} (known: {known})")
    return scenario_to_dict(check(sc), layout)


def cmd_gen(args) -> Output:
    doc = gen_scenario(args.seed, args.family, args.bands, args.protocol)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return None


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON document")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None,
                        help="convergence or verification tolerance")
    common.add_argument("--gain-denominator", choices=("allocated", "full"), default=None,
                        help="powers used by the saturating AF gain")
    common.add_argument("--d-reading", choices=("squared", "literal"), default="squared",
                        help="relay-noise term of the affine AF coefficients")

    p = _Parser(prog="irc-game", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("rates", parents=[common], help="per-band rates at given powers")
    s.add_argument("--band", type=int, default=0)
    s.add_argument("--powers", help="band powers 'P1,P2' (linear; default: totals)")
    s.set_defaults(func=cmd_rates)

    s = sub.add_parser("af-gain", parents=[common], help="optimal AF amplification gain")
    s.add_argument("--band", type=int, default=0)
    s.add_argument("--a-max", type=float, default=None)
    s.set_defaults(func=cmd_af_gain)

    s = sub.add_parser("ne", parents=[common], help="Nash equilibria")
    s.add_argument("--analytic", action="store_true",
                   help="exact enumeration for two-band fixed-gain AF")
    s.add_argument("--multistart", action="store_true")
    s.add_argument("--max-iter", type=int, default=1000)
    s.set_defaults(func=cmd_ne)

    s = sub.add_parser("cournot", parents=[common], help="best-response trajectory")
    s.add_argument("--start", help="'a,b' first-band fractions (Q=2) or theta1 then theta2")
    s.add_argument("--max-iter", type=int, default=1000)
    s.add_argument("--analytic", action="store_true", help="exact affine iteration")
    s.set_defaults(func=cmd_cournot)

    s = sub.add_parser("basin", parents=[common], help="basins of attraction (affine AF)")
    s.add_argument("--resolution", type=int, default=101)
    s.add_argument("--max-iter", type=int, default=1000)
    s.set_defaults(func=cmd_basin)

    for name, func, helptext in (
            ("sweep-gain", cmd_sweep_gain, "equilibrium sum-rate versus fixed AF gain"),
            ("sweep-nu", cmd_sweep_nu, "equilibrium sum-rate versus relay power split"),
            ("sweep-position", cmd_sweep_position, "equilibrium sum-rate versus relay position")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--policy", choices=leader.POLICIES, default="cournot")
        s.add_argument("--max-iter", type=int, default=1000)
        if name == "sweep-position":
            s.add_argument("--points", type=int, default=21, help="points per axis")
            s.add_argument("--extent", type=float, default=canonical.L_SWEEP)
        else:
            s.add_argument("--points", type=int, default=101)
            s.add_argument("--band", type=int, default=0)
        if name == "sweep-gain":
            s.add_argument("--a-max", type=float, default=None)
        s.set_defaults(func=func)

    s = sub.add_parser("dominance-map", parents=[common], help="best protocol per relay position")
    s.add_argument("--points", type=int, default=30)
    s.add_argument("--x-range", default="-4,4", help="in units of d0")
    s.add_argument("--y-range", default="-3,4", help="in units of d0")
    s.add_argument("--cut-y", type=float, default=None, help="EF cut ordinate in units of d0")
    s.add_argument("--cut-points", type=int, default=4001)
    s.set_defaults(func=cmd_dominance_map)

    s = sub.add_parser("gen", parents=[common], help="generate a scenario document")
    s.add_argument("--family", required=True)
    s.add_argument("--bands", type=int, default=2)
    s.add_argument("--protocol", default="AF_FIXED", choices=[x.value for x in Protocol])
    s.set_defaults(func=cmd_gen)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with np.errstate(all="ignore"):
            out = args.func(args)
        if out is not None:
            out.write(args.format, args.out)
    except ScenarioError as exc:
        for v in exc.violations:
            print(f"invalid scenario: {v}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
