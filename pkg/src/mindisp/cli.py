"""Command-line front end.

Exit codes: 0 success, 1 a claim or invariant failed, 2 bad configuration or usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

from . import construction as cons
from . import experiments as exp
from .coverfree import certify_cover_free, read_family_json
from .dispersion import DimensionCapError, SearchConfig, estimate_dispersion, exact_dispersion
from .errors import PointFormatError, PreconditionError
from .generators import greedy_hitting, grid_random, superimposed_points, uniform_random
from .geometry import format_points_csv, read_points_csv, write_points_csv

OUTPUT_DIR_ENV = "MINDISP_OUTPUT_DIR"

FORMULAS = """\
formulas (natural logarithms unless noted):
  dispersion        disp(X) = sup |B| over open boxes B = prod (a_i, b_i) with B ∩ X = ∅
  trivial           N(eps, d) >= 1/eps - 1                       (pigeonhole)
  ahr               N(eps, d) >= log2(d) / (8 eps),  d >= 2, 0 < eps < 1/4
  main              N(eps, d) >  c log d / (eps^2 log(1/eps)),  c = 1/1920,
                    d >= 2, 1/(4 sqrt d) <= eps <= 1/4
  intermediate      r^2 log(d - r/2) / (10 log r) with r = 2^(k-2), k >= 3
  cover-free bound  #ground > r^2 log(d - r/2) / (10 log r),  2 <= r <= 2 sqrt d
  bc (upper)        N(eps, d) <= C_bc d^2 log d / eps             (C_bc caller-supplied)
  uvl (upper)       N(eps, d) <= C_uvl log d log(1/eps) / eps^2   (C_uvl caller-supplied)
  corollary         disp*(n, d) >= c2 sqrt(log d / n) / sqrt(log(n / log d)),
                    2 log d <= n <= c1 d                          (c1, c2 caller-supplied)
  bucket            2^-(k+1) < eps <= 2^-k,  r = 2^(k-2),  threshold t = 2^(1-k)
  test box B(A,j)   (0,t) on axis j, (t,1) on axes in A (|A| = r), (0,1) elsewhere
"""


class UsageError(Exception):
    pass


def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2, default=str)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# --- handlers -------------------------------------------------------------------

def cmd_disp_exact(a) -> int:
    xs = read_points_csv(a.points)
    res = exact_dispersion(xs, SearchConfig(max_exact_dim=a.max_dim))
    _emit(res.to_json(), a.out)
    return 0


def cmd_disp_estimate(a) -> int:
    xs = read_points_csv(a.points)
    probes = []
    if a.probe_eps is not None:
        k = cons.k_of_eps(a.probe_eps).k
        probes = [cons.test_box(s) for s in cons.enumerate_test_family(xs.dim, k)]
    res = estimate_dispersion(xs, SearchConfig(estimator_budget=a.budget, rng_seed=a.seed), probes)
    _emit(res.to_json(), a.out)
    return 0


def cmd_boxes_gen(a) -> int:
    specs = cons.enumerate_test_family(a.d, a.k, at_most=a.at_most)
    lines = "".join(json.dumps(spec.to_json()) + "\n" for spec in specs)
    if a.out:
        Path(a.out).write_text(lines)
    else:
        sys.stdout.write(lines)
    return 0


def cmd_boxes_check_hit(a) -> int:
    xs = read_points_csv(a.points)
    k = cons.k_of_eps(a.eps).k
    ok, missing = cons.hits_all(xs, a.d, k)
    _emit({"hits_all": ok, "k": k, "family_size": cons.family_size(a.d, k),
           "missing_box": None if missing is None else missing.to_json()}, a.out)
    return 0


def cmd_coverfree_certify(a) -> int:
    fam = read_family_json(a.family)
    cert = certify_cover_free(fam, a.r, exact_numbers=not a.decide_only)
    _emit(cert.to_json(), a.out)
    return 0


def cmd_bounds_eval(a) -> int:
    entries = cons.reference_bounds(a.eps, a.d, a.C_bc, a.C_uvl, a.c1, a.c2, a.n)
    _emit([e.to_json() for e in entries], a.out)
    return 0


def cmd_gen_points(a) -> int:
    if a.kind == "uniform":
        xs = uniform_random(a.n, a.d, a.seed)
    elif a.kind == "grid":
        xs = grid_random(a.n, a.d, a.m, a.seed)
    elif a.kind == "superimposed":
        xs = superimposed_points(a.d, a.k, a.n, a.q, a.seed)
    else:
        xs = greedy_hitting(a.d, a.k)
    if a.out:
        write_points_csv(xs, a.out)
    else:
        sys.stdout.write(format_points_csv(xs))
    return 0


def cmd_reduce(a) -> int:
    xs = read_points_csv(a.points)
    rep = cons.run_reduction(xs, a.eps, exact_cover_numbers=a.exact_cover_numbers)
    _emit(rep.to_json(), a.report)
    return 1 if rep.internal_error else 0


def _load_config(path: str | None) -> dict:
    """``key = value`` lines; lists are comma separated; ``#`` starts a comment."""
    if not path:
        return {}
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(name: str, raw, default):
    if not isinstance(raw, str):  # already typed by argparse
        return raw
    if isinstance(default, bool):
        return str(raw).lower() in ("1", "true", "yes", "on")
    if isinstance(default, list):
        items = [v.strip() for v in str(raw).split(",") if v.strip()]
        kind = float if name in ("eps_list",) else int
        return [kind(v) for v in items]
    if isinstance(default, int):
        return int(raw)
    return raw


def _experiment_config(a) -> exp.ExperimentConfig:
    cfg = exp.ExperimentConfig(experiment=a.which)
    values = _load_config(a.config)
    for flag in ("d_list", "k_list", "eps_list", "n_list", "m", "budget", "hitting_instances",
                 "aa_families", "log_scan_max"):
        v = getattr(a, flag, None)
        if v is not None:
            values[flag] = v
    if a.seeds is not None:
        values["seeds"] = a.seeds
    known = {f.name: f for f in fields(cfg)}
    for key, raw in values.items():
        if key not in known:
            raise UsageError(f"unknown configuration key {key!r}")
        setattr(cfg, key, _coerce(key, raw, getattr(cfg, key)))
    cfg.out_dir = a.out_dir or os.environ.get(OUTPUT_DIR_ENV) or cfg.out_dir
    cfg.fault_injection = a.fault_injection
    return cfg


def cmd_experiment(a) -> int:
    cfg = _experiment_config(a)
    exp.validate(cfg)
    if cfg.experiment == "lower-bound":
        rows, summary = exp.lower_bound_sweep(cfg)
        exp.write_reports(cfg.out_dir, "lower_bound_sweep", rows, exp.LOWER_COLUMNS, summary)
        print(json.dumps(summary, indent=2))
        return 1 if summary["internal_errors"] else 0
    if cfg.experiment == "upper-bound":
        rows, summary = exp.upper_bound_sweep(cfg)
        exp.write_reports(cfg.out_dir, "upper_bound_sweep", rows, exp.UPPER_COLUMNS, summary)
        print(json.dumps(summary, indent=2))
        return 0
    results = exp.claims_suite(cfg)
    rows = [{"check": r.name, "passed": r.passed} for r in results]
    summary = {"fault_injection": cfg.fault_injection, "checks": [r.to_json() for r in results]}
    exp.write_reports(cfg.out_dir, "claims_suite", rows, ["check", "passed"], summary)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  {json.dumps(r.detail, default=str)}")
        if r.witness:
            print(f"      witness: {json.dumps(r.witness, default=str)}")
    return 0 if all(r.passed for r in results) else 1


# --- parser -----------------------------------------------------------------------

def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--out", default=None, help="write the output here instead of stdout")

    p = argparse.ArgumentParser(prog="mindisp", description="Dispersion of point sets, "
                                "structured test boxes and cover-free families.",
                                epilog=FORMULAS, formatter_class=fmt)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="group", required=True)

    disp = sub.add_parser("disp", help="dispersion of a point set", epilog=FORMULAS,
                          formatter_class=fmt).add_subparsers(dest="action", required=True)
    s = disp.add_parser("exact", parents=[common], help="exact search (exponential in d)")
    s.add_argument("--points", required=True)
    s.add_argument("--max-dim", type=int, default=4)
    s.set_defaults(func=cmd_disp_exact)
    s = disp.add_parser("estimate", parents=[common], help="certified lower estimate")
    s.add_argument("--points", required=True)
    s.add_argument("--budget", type=int, default=64)
    s.add_argument("--probe-eps", type=float, default=None,
                   help="also grow every test box of this eps bucket")
    s.set_defaults(func=cmd_disp_estimate)

    boxes = sub.add_parser("boxes", help="structured test-box family", epilog=FORMULAS,
                           formatter_class=fmt).add_subparsers(dest="action", required=True)
    s = boxes.add_parser("gen", parents=[common], help="write the family as JSON lines")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--at-most", action="store_true", help="include |A| < 2^(k-2)")
    s.set_defaults(func=cmd_boxes_gen)
    s = boxes.add_parser("check-hit", parents=[common], help="does a point set hit every box?")
    s.add_argument("--points", required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.set_defaults(func=cmd_boxes_check_hit)

    cf = sub.add_parser("coverfree", help="r-cover-free families", epilog=FORMULAS,
                        formatter_class=fmt).add_subparsers(dest="action", required=True)
    s = cf.add_parser("certify", parents=[common], help="exact r-cover-free certificate")
    s.add_argument("--family", required=True, help='JSON {"ground_size": m, "sets": [[...]]}')
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--decide-only", action="store_true",
                   help="stop each search at depth r (cover numbers above r become lower bounds)")
    s.set_defaults(func=cmd_coverfree_certify)

    bounds = sub.add_parser("bounds", help="bound formulas", epilog=FORMULAS,
                            formatter_class=fmt).add_subparsers(dest="action", required=True)
    s = bounds.add_parser("eval", parents=[common], epilog=FORMULAS, formatter_class=fmt)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--C-bc", dest="C_bc", type=float, default=None)
    s.add_argument("--C-uvl", dest="C_uvl", type=float, default=None)
    s.add_argument("--c1", type=float, default=None)
    s.add_argument("--c2", type=float, default=None)
    s.add_argument("--n", type=int, default=None, help="point count for the corollary form")
    s.set_defaults(func=cmd_bounds_eval)

    gen = sub.add_parser("gen", help="point-set generators").add_subparsers(dest="action",
                                                                              required=True)
    s = gen.add_parser("points", parents=[common], help="write a point CSV")
    s.add_argument("--kind", required=True,
                   choices=["uniform", "grid", "superimposed", "greedy-hitting"])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, default=0)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--q", type=float, default=None)
    s.add_argument("--m", type=int, default=exp.GRID_PILOT["m"])
    s.set_defaults(func=cmd_gen_points)

    s = sub.add_parser("reduce", parents=[common], epilog=FORMULAS, formatter_class=fmt,
                       help="run the test-box reduction on a point set")
    s.add_argument("--points", required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--report", default=None)
    s.add_argument("--exact-cover-numbers", action="store_true",
                   help="compute every cover number exactly (slow for large d); by default "
                        "searches stop at depth r")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("experiment", parents=[common], epilog=FORMULAS, formatter_class=fmt,
                       help="sweeps and the claims suite")
    s.add_argument("which", choices=["lower-bound", "upper-bound", "claims"])
    s.add_argument("--config", default=None, help="key = value file; flags override it")
    s.add_argument("--out-dir", default=None, help=f"report directory (env {OUTPUT_DIR_ENV})")
    s.add_argument("--d-list", type=_ints, default=None)
    s.add_argument("--k-list", type=_ints, default=None)
    s.add_argument("--eps-list", type=_floats, default=None)
    s.add_argument("--n-list", type=_ints, default=None)
    s.add_argument("--seeds", type=_ints, default=None)
    s.add_argument("--m", type=int, default=None)
    s.add_argument("--budget", type=int, default=None)
    s.add_argument("--hitting-instances", type=int, default=None)
    s.add_argument("--aa-families", type=int, default=None)
    s.add_argument("--log-scan-max", type=int, default=None)
    s.add_argument("--fault-injection", action="store_true",
                   help="make threshold comparisons non-strict; the hitting-set check must fail")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a)
    except (exp.ConfigError, UsageError, PreconditionError, DimensionCapError,
            PointFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
