"""Command-line front end.

Subcommands: dist show, exact, simulate, scan, counterexample, clt-compare.
Machine-readable output is JSON (schema-validated, sorted keys, stable byte
layout) or RFC-4180 CSV; identical invocations with identical seeds produce
byte-identical files. All randomness flows from an explicit --seed (or a seed
field in the scan config); there is no hidden entropy.

Exit codes: 0 success, 1 scan pass-flags failed, 2 malformed input.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import harness, schemas
from .approx import clt_compare, clt_rows_to_csv
from .distributions import LeveledDistribution, builtin, builtin_names
from .errors import BallotLabError
from .exactdp import (
    Constraint,
    conditional_ballot_prob,
    conditional_second_moment,
    constrained_endpoint_law,
    endpoint_window_prob,
    positive_path_window_prob,
    positive_prefix_prob,
    spread_sup,
    stopping_time_tail,
)
from .montecarlo import (
    McConfig,
    Multiset,
    WalkEvent,
    chernoff_rand_check,
    estimate_conditional,
    estimate_event,
    level_summary,
    permutation_positive_prob,
)
from .walkcore import StepDistribution, as_fraction, lattice_info, moment


class CliError(Exception):
    """Malformed input; maps to exit code 2."""


def _parse_rational(v, name: str) -> Fraction:
    try:
        if isinstance(v, str):
            if "/" in v:
                num, den = v.split("/")
                return Fraction(int(num), int(den))
            return as_fraction(float(v)) if "." in v else Fraction(int(v))
        return as_fraction(v)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise CliError(f"cannot parse {name}={v!r} as a rational") from e


def _resolve_dist(spec, K=None) -> StepDistribution:
    if isinstance(spec, dict):
        return StepDistribution.from_json_dict(spec)
    if isinstance(spec, str):
        path = Path(spec)
        if spec.endswith(".json") or path.is_file():
            try:
                obj = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise CliError(f"cannot load distribution file {spec}: {e}") from e
            if "levels" in obj:
                return LeveledDistribution.from_json_dict(obj)
            return StepDistribution.from_json_dict(obj)
        return builtin(spec, K=K)
    raise CliError(f"cannot interpret distribution spec {spec!r}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj: dict, out: str | None) -> None:
    schemas.validate_report(obj)
    _emit(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n", out)


def _emit_result_csv(rec: dict, path: str) -> None:
    """CSV rendering of a ProbResult record: same columns as the JSON."""
    import csv

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["query", "value", "stderr", "trials", "hits", "seed", "flags"])
    w.writerow([json.dumps(rec.get("query", {}), sort_keys=True,
                           separators=(",", ":")),
                format(rec["value"], ".17g"),
                format(rec.get("stderr", 0.0), ".17g"),
                rec.get("trials", 0), rec.get("hits", 0),
                rec.get("seed", ""), ";".join(rec.get("flags", []))])
    Path(path).write_text(buf.getvalue())


def _load_query(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise CliError(f"query is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise CliError("query must be a JSON object")
    return obj


def _cmd_dist_show(args) -> int:
    dist = _resolve_dist(args.name, K=args.K)
    print(f"label: {dist.label or '(unnamed)'}")
    print(f"kind: {dist.kind}")
    if dist.is_finite:
        print("atoms (value = prob):")
        for v, p in dist.atoms:
            print(f"  {v} = {p}  (~{float(p):.6g})")
        print(f"mean: {dist.cached_mean}")
        print(f"variance: {dist.cached_variance} (~{float(dist.cached_variance):.6g})")
        print(f"second moment: {moment(dist, 2)}")
        lat = lattice_info(dist)
        print(f"lattice: span={lat.span_h} offset={lat.offset_z} period={lat.period_d}")
        if isinstance(dist, LeveledDistribution):
            print(f"levels (index, value, per-sign prob), max level {dist.max_level}:")
            for k, v, p in dist.levels:
                print(f"  {k}: |value|={v} per-sign={p} (~{float(p):.6g})")
            print(f"folded tail mass: {dist.folded_tail_mass} "
                  f"(~{float(dist.folded_tail_mass):.3g})")
    if args.json:
        _emit(json.dumps(dist.to_json_dict(), sort_keys=True) + "\n", None)
    return 0


_EXACT_OPS = ("conditional_ballot", "positive_path_window", "endpoint_window",
              "positive_prefix", "stopping_tail", "conditional_second_moment",
              "spread_sup", "law")


def _cmd_exact(args) -> int:
    from .walkcore import WalkQuery

    query = _load_query(args.query)
    op = query.get("op")
    if op not in _EXACT_OPS:
        raise CliError(f"op must be one of {_EXACT_OPS}, got {op!r}")
    dist = _resolve_dist(query.get("dist"), K=query.get("K"))
    mode = args.mode
    n = query.get("n")
    if not isinstance(n, int) or n < 1:
        raise CliError(f"n must be a positive integer, got {n!r}")

    if op == "law":
        ckind = query.get("constraint", "none")
        if ckind == "none":
            constraint = Constraint.none()
        elif ckind in ("interior", "strictly-positive-interior"):
            constraint = Constraint.interior_positive()
        elif ckind == "at-least":
            constraint = Constraint.at_least(_parse_rational(query.get("h", 0), "h"))
        else:
            raise CliError(f"unknown constraint {ckind!r}")
        law = constrained_endpoint_law(dist, n, constraint, mode=mode)
        buf = io.StringIO()
        law.write_csv(buf)
        _emit(buf.getvalue(), args.csv or args.out)
        return 0

    if op in ("conditional_ballot", "positive_path_window"):
        q = WalkQuery(dist=dist, n=n,
                      k=_parse_rational(query["k"], "k"),
                      window_a=_parse_rational(query["A"], "A"))
        fn = (conditional_ballot_prob if op == "conditional_ballot"
              else positive_path_window_prob)
        res = fn(q, mode=mode)
    elif op == "endpoint_window":
        res = endpoint_window_prob(dist, n, _parse_rational(query["k"], "k"),
                                   _parse_rational(query["A"], "A"), mode=mode)
    elif op == "positive_prefix":
        res = positive_prefix_prob(dist, query.get("m", n), mode=mode)
    elif op == "stopping_tail":
        res = stopping_time_tail(dist, n, _parse_rational(query.get("h", 0), "h"),
                                 mode=mode)
    elif op == "conditional_second_moment":
        thr = query.get("threshold")
        val = conditional_second_moment(
            dist, n, _parse_rational(query.get("h", 0), "h"),
            threshold=None if thr is None else _parse_rational(thr, "threshold"),
            mode=mode)
        _emit_json({"ballotlab_schema": 1, "value": val, "mode": "exact-float",
                    "query": query}, args.out)
        return 0
    elif op == "spread_sup":
        val = spread_sup(dist, n, mode=mode)
        rec = {"ballotlab_schema": 1, "value": float(val), "query": query}
        if isinstance(val, Fraction):
            rec["mode"] = "exact-rational"
            rec["exact"] = f"{val.numerator}/{val.denominator}"
        else:
            rec["mode"] = "exact-float"
        _emit_json(rec, args.out)
        return 0
    res_rec = res.to_json_dict(query=query)
    _emit_json(res_rec, args.out)
    return 0


def _cmd_simulate(args) -> int:
    query = _load_query(args.query)
    if args.seed is None:
        raise CliError("simulate requires --seed (no hidden entropy)")
    cfg = McConfig(trials=args.trials, seed=args.seed,
                   stream_count=min(args.streams, args.trials))
    op = query.get("op", "event")

    if op == "chernoff_rand":
        if args.csv:
            raise CliError("--csv applies to probability-result ops only")
        rec = chernoff_rand_check(int(query["m"]), float(query["q"]),
                                  float(query["v"]), float(query["t"]), cfg)
        rec["ballotlab_schema"] = 1
        rec["kind"] = "chernoff_rand_check"
        _emit_json(rec, args.out)
        return 0

    if op == "permutation":
        ms = Multiset(tuple(_parse_rational(e, "element")
                            for e in query["elements"]))
        res = permutation_positive_prob(ms, mode=query.get("mode", "mc"),
                                        cfg=cfg)
        rec = res.to_json_dict(query=query)
        _emit_json(rec, args.out)
        if args.csv:
            _emit_result_csv(rec, args.csv)
        return 0

    dist = _resolve_dist(query.get("dist"), K=query.get("K"))
    n = query.get("n")
    if not isinstance(n, int) or n < 1:
        raise CliError(f"n must be a positive integer, got {n!r}")

    if op == "level_summary":
        if args.csv:
            raise CliError("--csv applies to probability-result ops only")
        rec = level_summary(dist, n, cfg)
        rec["ballotlab_schema"] = 1
        rec["kind"] = "level_summary"
        _emit_json(rec, args.out)
        return 0

    if op in ("conditional", "conditional_ballot"):
        res = estimate_conditional(dist, n, _parse_rational(query["k"], "k"),
                                   _parse_rational(query["A"], "A"), cfg)
    elif op == "event":
        window = None
        if "k" in query and "A" in query:
            window = (_parse_rational(query["k"], "k"),
                      _parse_rational(query["A"], "A"))
        barrier = query.get("barrier_h")
        event = WalkEvent(
            positivity=query.get("positivity", "none"),
            barrier_h=None if barrier is None else _parse_rational(barrier, "barrier_h"),
            endpoint_window=window)
        res = estimate_event(dist, n, event, cfg)
    else:
        raise CliError(f"unknown simulate op {op!r}")
    rec = res.to_json_dict(query=query)
    _emit_json(rec, args.out)
    if args.csv:
        _emit_result_csv(rec, args.csv)
    return 0


def _expand_n_grid(spec) -> list:
    if isinstance(spec, list):
        return [int(n) for n in spec]
    if isinstance(spec, dict):
        if "pow2" in spec:
            lo, hi = spec["pow2"]
            return [2 ** e for e in range(int(lo), int(hi) + 1)]
        if "range" in spec:
            lo, hi = spec["range"]
            return list(range(int(lo), int(hi) + 1))
    raise CliError(f"cannot interpret n_grid {spec!r}")


def _cmd_scan(args) -> int:
    config = _load_query(args.config)
    kind = config.get("scan")
    dist = _resolve_dist(config.get("dist"), K=config.get("K"))
    n_grid = _expand_n_grid(config.get("n_grid"))
    mode = config.get("mode", "auto")
    seed = config.get("seed")
    if seed is None:
        raise CliError("scan config requires a seed (no hidden entropy)")
    trials = config.get("trials")
    threshold = config.get("threshold")
    try:
        if kind == "ballot":
            report = harness.scan_ballot_ratio(
                dist, n_grid, config.get("k_rule", "sqrt_n"),
                _parse_rational(config.get("A", 1), "A"), mode=mode,
                trials=trials, seed=seed, threshold=threshold)
        elif kind == "stopping":
            report = harness.scan_stopping(
                dist, n_grid, config.get("h_rule", [0]), mode=mode,
                trials=trials, seed=seed, threshold=threshold)
        elif kind == "spread":
            report = harness.scan_spread(dist, n_grid, mode=mode,
                                         threshold=threshold)
        elif kind == "second_moment":
            report = harness.scan_second_moment(
                dist, n_grid, config.get("h_rule", [0]),
                threshold_rule=config.get("threshold_rule"), mode=mode,
                threshold=threshold)
        else:
            raise CliError(f"unknown scan kind {kind!r}")
    except (KeyError, TypeError) as e:
        raise CliError(f"bad scan config: {e}") from e
    _emit_json(report.to_json_dict(), args.out)
    if args.csv:
        buf = io.StringIO()
        report.write_csv(buf)
        Path(args.csv).write_text(buf.getvalue())
    return 0 if report.passed else 1


def _cmd_counterexample(args) -> int:
    if args.seed is None:
        raise CliError("counterexample requires --seed (its level summary "
                       "and cross-checks sample)")
    cfg = McConfig(trials=args.trials, seed=args.seed,
                   stream_count=min(args.streams, args.trials))
    rec = harness.counterexample_report(
        args.family, args.K, args.n, _parse_rational(args.A, "A"),
        target_k_rule=args.k_rule, cfg=cfg)
    _emit_json(rec, args.out)
    return 0


def _cmd_clt_compare(args) -> int:
    dist = _resolve_dist(args.dist, K=args.K)
    n_grid = [int(s) for s in args.n_grid.split(",")]
    if args.x_rule == "zero":
        x_rule = "zero"
    elif args.x_rule.startswith("sigma:"):
        x_rule = {"kind": "sigma_multiple", "c": float(args.x_rule[6:])}
    else:
        x_rule = [_parse_rational(s, "x") for s in args.x_rule.split(",")]
    rows = clt_compare(dist, n_grid, x_rule=x_rule)
    buf = io.StringIO()
    clt_rows_to_csv(rows, buf)
    _emit(buf.getvalue(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ballotlab",
        description="Exact and Monte Carlo ballot-type probabilities for "
                    "mean-zero lattice random walks")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", help="inspect step distributions")
    dsub = d.add_subparsers(dest="dist_command", required=True)
    show = dsub.add_parser("show", help="print atoms, moments, lattice info")
    show.add_argument("name", help=f"built-in name ({', '.join(builtin_names())}) "
                                   "or a JSON literal file")
    show.add_argument("--K", type=int, default=None, help="truncation level")
    show.add_argument("--json", action="store_true",
                      help="also print the JSON literal")
    show.set_defaults(fn=_cmd_dist_show)

    e = sub.add_parser("exact", help="exact DP queries")
    e.add_argument("query", help="JSON query, e.g. "
                   '\'{"op":"conditional_ballot","dist":"rademacher",'
                   '"n":4,"k":2,"A":2}\'')
    e.add_argument("--mode", choices=["auto", "exact", "float"], default="auto")
    e.add_argument("--out", default=None)
    e.add_argument("--csv", default=None, help="CSV output for op=law")
    e.set_defaults(fn=_cmd_exact)

    s = sub.add_parser("simulate", help="seeded Monte Carlo estimates")
    s.add_argument("query")
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--streams", type=int, default=8)
    s.add_argument("--out", default=None)
    s.add_argument("--csv", default=None,
                   help="also write the result record as CSV")
    s.set_defaults(fn=_cmd_simulate)

    sc = sub.add_parser("scan", help="scaling scans with pass/fail report")
    sc.add_argument("config", help="JSON scan config")
    sc.add_argument("--out", default=None)
    sc.add_argument("--csv", default=None, help="also write the grid as CSV")
    sc.set_defaults(fn=_cmd_scan)

    ce = sub.add_parser("counterexample",
                        help="finite-n diagnostic for the heavy-level families")
    ce.add_argument("--family", choices=["tower", "heavy"], required=True)
    ce.add_argument("--K", type=int, required=True)
    ce.add_argument("--n", type=int, required=True)
    ce.add_argument("--A", default="1")
    ce.add_argument("--k-rule", choices=["n", "sqrt_n"], default="n",
                    dest="k_rule")
    ce.add_argument("--trials", type=int, default=100000)
    ce.add_argument("--seed", type=int, default=None)
    ce.add_argument("--streams", type=int, default=8)
    ce.add_argument("--out", default=None)
    ce.set_defaults(fn=_cmd_counterexample)

    cc = sub.add_parser("clt-compare",
                        help="exact vs Gaussian lattice approximation table")
    cc.add_argument("--dist", required=True)
    cc.add_argument("--K", type=int, default=None)
    cc.add_argument("--n-grid", required=True, dest="n_grid",
                    help="comma-separated n values")
    cc.add_argument("--x-rule", default="zero", dest="x_rule",
                    help='"zero", comma-separated x values, or "sigma:c"')
    cc.add_argument("--out", default=None)
    cc.set_defaults(fn=_cmd_clt_compare)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (BallotLabError, ValueError, KeyError, TypeError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
