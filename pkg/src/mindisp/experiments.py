"""Experiment harness: lower-bound sweep, upper-bound sweep and the claims suite.

Every cell is seeded and the cells are processed in a fixed order, so reruns
produce identical tables apart from the single ``generated_at`` field.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import construction as cons
from .coverfree import (SetFamily, _element_masks, _greedy_hitting, alon_asodi_bound,
                        certify_cover_free, cover_number)
from .dispersion import SearchConfig, estimate_dispersion
from .errors import PreconditionError
from .generators import greedy_hitting, grid_random, superimposed_points

log = logging.getLogger(__name__)

# Pilot-calibrated defaults for the grid-sampling illustration (d=8, eps=1/8);
# see README "Grid-sampling pilot".
GRID_PILOT = {"d": 8, "eps": 0.125, "m": 8, "n": 2768, "budget": 64, "seeds": 50,
              "min_success": 0.8}


class ConfigError(ValueError):
    """Experiment configuration is invalid; nothing has been run."""


@dataclass
class ExperimentConfig:
    experiment: str = "claims"
    d_list: list = field(default_factory=lambda: [16, 64, 256])
    k_list: list = field(default_factory=lambda: [2, 3])
    seeds: list = field(default_factory=lambda: list(range(5)))
    eps_list: list = field(default_factory=lambda: [0.125])
    n_list: list = field(default_factory=lambda: [GRID_PILOT["n"]])
    m: int = GRID_PILOT["m"]
    budget: int = GRID_PILOT["budget"]
    out_dir: str = "reports"
    cap: int = cons.DEFAULT_ENUMERATION_CAP
    # claims suite
    hitting_instances: int = 200
    hitting_d: list = field(default_factory=lambda: [8, 16, 32])
    hitting_k: list = field(default_factory=lambda: [2, 3])
    aa_families: int = 500
    aa_max_d: int = 64
    log_scan_max: int = 10**6
    fault_injection: bool = False


def validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment == "lower-bound":
        if not cfg.d_list or not cfg.k_list or not cfg.seeds:
            raise ConfigError("d list, k list and seeds must be nonempty")
        for d in cfg.d_list:
            for k in cfg.k_list:
                if k < 2:
                    raise ConfigError(f"k >= 2 violated (k={k})")
                if 2 ** (k - 2) >= d:
                    raise ConfigError(f"2**(k-2) < d violated (d={d}, k={k})")
                if not cons.in_theorem_range(2.0**-k, d):
                    raise ConfigError(f"eps = 2**-{k} outside 1/(4 sqrt d) <= eps <= 1/4 "
                                      f"for d={d}")
    elif cfg.experiment == "upper-bound":
        if not cfg.d_list or not cfg.eps_list or not cfg.n_list or not cfg.seeds:
            raise ConfigError("d list, eps list, n list and seeds must be nonempty")
        if cfg.m < 2:
            raise ConfigError(f"m >= 2 violated (m={cfg.m})")
        if cfg.budget < 1:
            raise ConfigError("estimator budget must be at least 1")
        if any(not 0 < e < 1 for e in cfg.eps_list):
            raise ConfigError("every eps must lie in (0, 1)")
    elif cfg.experiment != "claims":
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")


def _hitting_n(d: int, k: int, q: float, miss: float = 0.01) -> int:
    """Points needed so a random pattern set misses some box with probability <= miss."""
    r = 2 ** (k - 2)
    p = q * (1 - q) ** r
    return math.ceil((math.log(cons.family_size(d, k)) - math.log(miss)) / -math.log1p(-p))


def _superimposed_hitting(d, k, seed, cap, strict=True, max_tries=50):
    """First superimposed draw (seed, seed + 1000, ...) that hits every test box."""
    q = 1 / (2 ** (k - 2) + 1)
    n = _hitting_n(d, k, q)
    for attempt in range(max_tries):
        xs = superimposed_points(d, k, n, q, seed + 1000 * attempt)
        if cons.hits_all(xs, d, k, strict=strict, cap=cap)[0]:
            return xs, attempt
    raise RuntimeError(f"no hitting set after {max_tries} draws (d={d}, k={k})")


# --- lower-bound sweep ---------------------------------------------------------

LOWER_COLUMNS = ["d", "k", "eps", "seed", "generator", "n", "hits_all", "verdict",
                 "main_lower", "intermediate_aa", "exceeds_main", "exceeds_intermediate",
                 "internal_error"]


def _reduction_row(d, k, seed, gen, xs, cap) -> dict:
    eps = 2.0**-k
    rep = cons.run_reduction(xs, eps, cap=cap)
    return {
        "d": d, "k": k, "eps": eps, "seed": seed, "generator": gen,
        "n": rep.n, "hits_all": rep.hits_all,
        "verdict": rep.certificate.verdict if rep.certificate else None,
        "main_lower": rep.bounds["main_lower"],
        "intermediate_aa": rep.bounds["intermediate_aa"],
        "exceeds_main": rep.exceeds["main_lower"],
        "exceeds_intermediate": rep.exceeds["intermediate_aa"],
        "internal_error": rep.internal_error,
    }


def lower_bound_sweep(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Hitting sets through the reduction, one CSV row per (d, k, seed) cell.

    Each cell uses a superimposed hitting set.  A greedy hitting set is also
    run per (d, k) where the greedy search fits under the cap; those results
    go into the summary under ``greedy``.
    """
    validate(cfg)
    rows, greedy = [], []
    for d in cfg.d_list:
        for k in cfg.k_list:
            for seed in cfg.seeds:
                xs, _ = _superimposed_hitting(d, k, seed, cfg.cap)
                rows.append(_reduction_row(d, k, seed, "superimposed", xs, cfg.cap))
            try:
                xs = greedy_hitting(d, k, cap=cfg.cap)
            except cons.EnumerationCapError as exc:
                log.info("greedy hitting set skipped for d=%d k=%d: %s", d, k, exc)
                continue
            greedy.append(_reduction_row(d, k, None, "greedy", xs, cfg.cap))
    everything = rows + greedy
    summary = {
        "runs": len(rows),
        "internal_errors": sum(r["internal_error"] is not None for r in everything),
        "all_certified": all(r["verdict"] == "certified" for r in everything),
        "all_exceed_main": all(r["exceeds_main"] for r in everything),
        "min_n_over_main": min(r["n"] / r["main_lower"] for r in everything),
        "greedy": greedy,
    }
    return rows, summary


# --- upper-bound sweep ---------------------------------------------------------

UPPER_COLUMNS = ["d", "eps", "n", "m", "seeds", "successes", "fraction", "mean_estimate",
                 "max_estimate"]


def upper_bound_sweep(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Fraction of grid-sampled sets whose estimated dispersion is at most eps.

    The estimate is a lower bound on the true dispersion, so this illustrates
    the grid construction; it does not verify an upper bound.
    """
    validate(cfg)
    rows = []
    warnings = []
    for d in cfg.d_list:
        for eps in cfg.eps_list:
            probes = []
            if 0 < eps <= 0.25:
                k = cons.k_of_eps(eps).k
                if 2 ** (k - 2) < d and cons.family_size(d, k) <= min(cfg.cap, 10**5):
                    probes = [cons.test_box(s) for s in cons.enumerate_test_family(d, k)]
            fractions = []
            for n in sorted(cfg.n_list):
                vals = []
                for seed in cfg.seeds:
                    xs = grid_random(n, d, cfg.m, seed)
                    res = estimate_dispersion(
                        xs, SearchConfig(estimator_budget=cfg.budget, rng_seed=seed), probes)
                    vals.append(res.value)
                vals = np.array(vals)
                ok = int((vals <= eps).sum())
                fractions.append(ok / len(vals))
                rows.append({"d": d, "eps": eps, "n": n, "m": cfg.m, "seeds": len(vals),
                             "successes": ok, "fraction": ok / len(vals),
                             "mean_estimate": float(vals.mean()),
                             "max_estimate": float(vals.max())})
            if any(b < a for a, b in zip(fractions, fractions[1:])):
                msg = f"success fraction not monotone in n for d={d}, eps={eps}"
                log.warning(msg)
                warnings.append(msg)
    summary = {"cells": len(rows), "empirical": True, "warnings": warnings}
    return rows, summary


# --- claims suite -----------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    witness: dict | None = None

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "witness": self.witness}


def check_box_volumes(d_max: int = 16, ks=(2, 3, 4)) -> CheckResult:
    checked = 0
    direct = {}
    for k in ks:
        for d in range(2 ** (k - 2) + 1, d_max + 1):
            res = cons.verify_claim1(d, k)
            checked += 1
            if not res.holds:
                return CheckResult("box_volumes", False, {"checked": checked},
                                   {"d": d, "k": k, "min_size": res.min_size,
                                    "min_volume": str(res.min_volume)})
            direct[k] = {"min_size": res.min_size, "min_volume": str(res.min_volume),
                         "direct_ok": res.direct_ok, "chain_ok": res.chain_ok}
    return CheckResult("box_volumes", True, {"checked": checked, "per_k": direct})


def hitting_instances(count: int, ds, ks, strict: bool = True, cap=cons.DEFAULT_ENUMERATION_CAP,
                     seed: int = 0):
    """Yield ``count`` verified hitting sets with their (d, k) and draw index.

    Candidates cycle over (d, k); every other candidate carries pinned
    threshold coordinates (see ``superimposed_points``), which a correct
    hit check rejects and a non-strict one accepts.
    """
    cells = [(d, k) for d in ds for k in ks]
    rng = np.random.default_rng(seed)
    produced = rejected = draw = 0
    while produced < count:
        d, k = cells[draw % len(cells)]
        q = 1 / (2 ** (k - 2) + 1)
        n = int(_hitting_n(d, k, q) * rng.uniform(1.0, 1.5))
        boundary = 1.0 if draw % 2 else 0.0
        xs = superimposed_points(d, k, n, q, seed=int(rng.integers(2**63)), boundary=boundary)
        draw += 1
        if draw > 50 * count:
            raise RuntimeError("could not produce enough hitting sets")
        if not cons.hits_all(xs, d, k, strict=strict, cap=cap)[0]:
            rejected += 1
            continue
        produced += 1
        yield d, k, xs
    log.info("hitting-set sampler: %d accepted, %d rejected", produced, rejected)


def check_hitting_sets(count=200, ds=(8, 16, 32), ks=(2, 3), strict=True,
                             seed=0) -> tuple[CheckResult, CheckResult]:
    """Random hitting sets must give cover-free families and exceed the point-count bounds."""
    certified = refuted = 0
    violations = 0
    witness2 = witness3 = None
    for d, k, xs in hitting_instances(count, ds, ks, strict=strict, seed=seed):
        r = 2 ** (k - 2)
        cert = certify_cover_free(cons.extract_family(xs, k, strict=strict), r)
        if cert.certified:
            certified += 1
        else:
            refuted += 1
            if witness2 is None:
                witness2 = {"d": d, "k": k, "refutation": cert.to_json()["refutation"],
                            "provenance": xs.provenance}
        eps = 2.0**-k
        if cons.in_theorem_range(eps, d):
            main = cons.lower_bound_main(eps, d)
            inter = cons.intermediate_bound(d, k) if k >= 3 else None
            if not len(xs) > main or (inter is not None and not len(xs) > inter):
                violations += 1
                witness3 = witness3 or {"d": d, "k": k, "n": len(xs), "main": main,
                                        "intermediate": inter}
    c2 = CheckResult("hitting_cover_free", refuted == 0,
                     {"instances": count, "certified": certified, "refuted": refuted,
                      "strict": strict}, witness2)
    c3 = CheckResult("point_count_bounds", violations == 0,
                     {"instances": count, "violations": violations}, witness3)
    return c2, c3


def _random_family(rng, max_d: int) -> SetFamily:
    d = int(rng.integers(3, max_d + 1))
    kind = rng.integers(3)
    if kind == 0:  # Bernoulli family, random ground size and density
        m = int(rng.integers(2, 4 * d + 1))
        p = rng.uniform(0.02, 0.6)
        M = rng.random((m, d)) < p
        return SetFamily.from_lists(m, [np.flatnonzero(M[:, j]) for j in range(d)])
    if kind == 1:  # constant-weight columns over a small ground set
        m = int(rng.integers(d // 2 + 2, 3 * d + 3))
        w = int(rng.integers(1, max(2, m // 3) + 1))
        return SetFamily.from_lists(m, [rng.choice(m, size=w, replace=False) for _ in range(d)])
    # families extracted from random pattern points (cover-free by construction
    # when the points hit the test family)
    k = int(rng.integers(2, 4))
    if 2 ** (k - 2) >= d:
        k = 2
    q = 1 / (2 ** (k - 2) + 1)
    n = int(rng.integers(d // 2 + 1, _hitting_n(d, k, q) + 1))
    xs = superimposed_points(d, k, n, q, seed=int(rng.integers(2**63)))
    return cons.extract_family(xs, k)


def largest_certified_r(fam: SetFamily, r_max: int) -> int:
    """Largest r <= r_max at which ``fam`` is r-cover-free (0 if none).

    Finds the smallest cover number.  Greedy covers give an incumbent first,
    so each exact search only has to beat it.
    """
    greedy = {}
    for j in range(len(fam)):
        masks = _element_masks(fam, j)
        if not masks:
            return 0
        greedy[j] = math.inf if 0 in masks else len(_greedy_hitting(masks))
    best = min(min(greedy.values()), r_max + 1)
    for j in sorted(greedy, key=greedy.get):
        if best <= 1:
            break
        c, _ = cover_number(fam, j, limit=best - 1)
        best = min(best, c)
    return max(0, min(best - 1, r_max))


def check_alon_asodi(families: int = 500, max_d: int = 64, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    compared = 0
    with_certified = 0
    for idx in range(families):
        fam = _random_family(rng, max_d)
        d = len(fam)
        valid = [r for r in range(2, math.isqrt(4 * d) + 1) if d - r / 2 > 1]
        if not valid:
            continue
        top = largest_certified_r(fam, max(valid))
        certified = [r for r in valid if r <= top]
        if certified:
            with_certified += 1
        for r in certified:
            compared += 1
            bound = alon_asodi_bound(d, r)
            if not fam.ground_size > bound:
                return CheckResult("alon_asodi", False,
                                   {"families": idx + 1, "comparisons": compared},
                                   {"r": r, "bound": bound, "family": fam.to_json()})
    return CheckResult("alon_asodi", True, {"families": families, "comparisons": compared,
                                            "families_with_certified_r": with_certified})


def check_log_inequality(d_max: int = 10**6) -> CheckResult:
    ok, d_at, margin = cons.log_inequality_scan(d_max)
    return CheckResult("log_inequality", ok, {"d_max": d_max, "tightest_d": d_at,
                                              "smallest_margin": margin},
                       None if ok else {"d": d_at})


def claims_suite(cfg: ExperimentConfig) -> list[CheckResult]:
    """Test-box volumes, cover-freeness of hitting sets (plus the point-count
    bounds), the cover-free bound search and the logarithm scan.
    ``cfg.fault_injection`` runs the hitting-set check with non-strict
    threshold comparisons, which must make it fail."""
    strict = not cfg.fault_injection
    c2, c3 = check_hitting_sets(cfg.hitting_instances, cfg.hitting_d, cfg.hitting_k,
                                      strict=strict)
    return [check_box_volumes(), c2, c3,
            check_alon_asodi(cfg.aa_families, cfg.aa_max_d),
            check_log_inequality(cfg.log_scan_max)]


# --- report files -------------------------------------------------------------

def write_reports(out_dir: str | Path, stem: str, rows: list[dict], columns: list[str],
                  summary: dict) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)
    json_path = out / f"{stem}.json"
    doc = {"generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(), **summary}
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return csv_path, json_path
