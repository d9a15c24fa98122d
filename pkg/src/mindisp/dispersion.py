"""Dispersion of a point set: exact search in low dimension, lower estimates above it.

The exact engine relies on the usual reduction for open boxes: a largest empty
box can be grown until each face touches a point coordinate or the cube
boundary, so it suffices to search boxes whose bounds are drawn from
:func:`candidate_coordinates` on every axis.
"""

from __future__ import annotations

import bisect
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .geometry import AxisBox, PointSet, box_is_empty, box_volume_exact

# relative slack used to keep float near-ties alive until they are resolved exactly
_TIE_RTOL = 1e-12


class DimensionCapError(ValueError):
    """Exact search refused because the dimension exceeds ``max_exact_dim``."""


@dataclass(frozen=True)
class SearchConfig:
    max_exact_dim: int = 4
    estimator_budget: int = 64
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_exact_dim < 1:
            raise ValueError("max_exact_dim must be positive")
        if self.estimator_budget < 1:
            raise ValueError("estimator_budget must be at least 1")


@dataclass(frozen=True)
class DispersionResult:
    value: float
    witness: AxisBox
    mode: str  # "exact" or "lower-estimate"
    boxes_examined: int = 0
    seconds: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "witness": self.witness.to_json(),
            "mode": self.mode,
            "boxes_examined": self.boxes_examined,
            "seconds": self.seconds,
        }


def candidate_coordinates(xs: PointSet, axis: int) -> np.ndarray:
    """Sorted distinct values of ``{0, 1} ∪ {x[axis] : x in xs}``."""
    if not 0 <= axis < xs.dim:
        raise IndexError(f"axis {axis} out of range for dimension {xs.dim}")
    return np.unique(np.concatenate([[0.0, 1.0], xs.points[:, axis]]))


def _lex_key(lo, hi) -> tuple:
    return tuple(float(v) for v in lo) + tuple(float(v) for v in hi)


def _pick_witness(ties: list[tuple[tuple, tuple]]) -> tuple[AxisBox, Fraction]:
    """Resolve float near-ties exactly: largest exact volume, then smallest (lo, hi)."""
    boxes = [AxisBox(lo, hi) for lo, hi in ties]
    exact = [box_volume_exact(b) for b in boxes]
    top = max(exact)
    best = min((b for b, v in zip(boxes, exact) if v == top), key=lambda b: _lex_key(b.lo, b.hi))
    return best, top


def exact_dispersion(xs: PointSet, cfg: SearchConfig = SearchConfig()) -> DispersionResult:
    """Largest volume of an open axis-parallel box missing every point of ``xs``.

    Runs in ``O(m^(2d) n)`` in the worst case (``m = n + 2``), so it refuses
    dimensions above ``cfg.max_exact_dim``.  Pruning: an axis interval is
    skipped when even full extent on the remaining axes cannot reach the
    incumbent; once a partial box holds no point the remaining axes are taken
    whole; on the last axis only maximal gaps are considered.  Ties are broken
    by the lexicographically smallest concatenated ``(lo, hi)`` vector.
    """
    if xs.dim > cfg.max_exact_dim:
        raise DimensionCapError(
            f"dimension {xs.dim} exceeds max_exact_dim={cfg.max_exact_dim}; "
            "use estimate_dispersion for a certified lower estimate")
    t0 = time.perf_counter()
    d = xs.dim
    pts = np.unique(xs.points, axis=0) if len(xs) else xs.points
    # any empty box is a valid incumbent; the search below re-finds the optimum
    best = estimate_dispersion(xs, SearchConfig(estimator_budget=16 * d)).value if len(pts) else 0.0
    ties: list[tuple[tuple, tuple]] = []
    examined = 0

    def offer(vol, lo, hi):
        nonlocal best, ties
        if vol > best:
            best = vol
            ties = [(t_lo, t_hi) for t_lo, t_hi in ties
                    if _float_vol(t_lo, t_hi) >= best * (1 - _TIE_RTOL)]
            ties.append((tuple(lo), tuple(hi)))
        elif vol >= best * (1 - _TIE_RTOL):
            ties.append((tuple(lo), tuple(hi)))

    def search(axis, active, partial, lo, hi):
        nonlocal examined
        if active.shape[0] == 0:
            rest = d - axis
            examined += 1
            offer(partial, lo + [0.0] * rest, hi + [1.0] * rest)
            return
        if axis == d - 1:
            col = np.unique(np.concatenate([[0.0, 1.0], active[:, axis]]))
            gaps = np.diff(col)
            top = gaps.max()
            for g in np.flatnonzero(gaps >= top * (1 - _TIE_RTOL)):
                examined += 1
                offer(partial * float(gaps[g]), lo + [float(col[g])], hi + [float(col[g + 1])])
            return
        if axis == d - 2:
            sweep_last_two(active, partial, lo, hi)
            return
        col = active[:, axis]
        # a face of a maximal box rests on 0, 1 or a point already inside the
        # box on the axes fixed so far, so only those coordinates are tried
        for a, b in _pairs_by_width(np.unique(np.concatenate([[0.0, 1.0], col]))):
            if partial * (b - a) < best * (1 - _TIE_RTOL):
                break  # pairs are sorted by decreasing width
            inside = active[(col > a) & (col < b)]
            search(axis + 1, inside, partial * (b - a), lo + [a], hi + [b])

    def sweep_last_two(active, partial, lo, hi):
        # Fix the lower face on the second-to-last axis, then raise the upper
        # face point by point while keeping the sorted last-axis coordinates
        # of the points in between; the best last-axis interval is the
        # largest gap, which can only shrink as points are added.
        nonlocal examined
        u, v = active[:, -2], active[:, -1]
        order = np.argsort(u, kind="stable")
        u, v = u[order].tolist(), v[order].tolist()
        n = len(u)
        for a in sorted({0.0, *u} - {1.0}):
            start = bisect.bisect_right(u, a)
            col = [0.0, 1.0]
            maxgap = 1.0
            i = start
            while True:
                b = u[i] if i < n else 1.0
                if partial * (1.0 - a) * maxgap < best * (1 - _TIE_RTOL):
                    break
                if b > a:
                    examined += 1
                    vol = partial * (b - a) * maxgap
                    if vol >= best * (1 - _TIE_RTOL):
                        for g in range(len(col) - 1):
                            if col[g + 1] - col[g] >= maxgap * (1 - _TIE_RTOL):
                                offer(partial * (b - a) * (col[g + 1] - col[g]),
                                      lo + [a, col[g]], hi + [b, col[g + 1]])
                if i >= n:
                    break
                while i < n and u[i] == b:
                    pos = bisect.bisect_left(col, v[i])
                    split = col[pos] - col[pos - 1]
                    col.insert(pos, v[i])
                    if split >= maxgap:
                        maxgap = max(y - x for x, y in zip(col, col[1:]))
                    i += 1

    search(0, pts, 1.0, [], [])
    witness, _ = _pick_witness(ties)
    return DispersionResult(witness.volume, witness, "exact", examined,
                            time.perf_counter() - t0)


def _pairs_by_width(c: np.ndarray) -> list[tuple[float, float]]:
    i, j = np.triu_indices(len(c), k=1)
    order = np.argsort(-(c[j] - c[i]), kind="stable")
    return list(zip(c[i[order]].tolist(), c[j[order]].tolist()))


def _float_vol(lo, hi) -> float:
    return float(np.prod(np.subtract(hi, lo)))


def _grow(lo: np.ndarray, hi: np.ndarray, pts: np.ndarray,
          rates: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Inflate an empty (possibly degenerate) box into a maximal empty box.

    Every free face moves outwards at its axis rate.  When a point is about to
    enter, the face it would cross is frozen at that point's coordinate; a face
    reaching the cube boundary freezes there.  A frozen face stays blocked
    because the other faces only move outwards afterwards.
    """
    base_lo, base_hi = lo.astype(float), hi.astype(float)
    lo, hi = base_lo.copy(), base_hi.copy()
    d = lo.shape[0]
    rates = np.ones(d) if rates is None else np.asarray(rates, float)
    free_lo = lo > 0.0
    free_hi = hi < 1.0
    below = pts < base_lo
    above = pts > base_hi
    on_lo = pts == base_lo
    on_hi = pts == base_hi
    mid = ~below & ~above & ~on_lo & ~on_hi

    # cover[x, a]: time at which axis a's interval first contains x_a
    def column(a):
        x = pts[:, a]
        t_lo = (base_lo[a] - x) / rates[a] if free_lo[a] else np.where(lo[a] < x, 0.0, np.inf)
        t_hi = (x - base_hi[a]) / rates[a] if free_hi[a] else np.where(x < hi[a], 0.0, np.inf)
        t_on = np.maximum(np.where(on_lo[:, a], 0.0 if free_lo[a] else np.inf, 0.0),
                          np.where(on_hi[:, a], 0.0 if free_hi[a] else np.inf, 0.0))
        return np.where(below[:, a], t_lo,
                        np.where(above[:, a], t_hi, np.where(mid[:, a], 0.0, t_on)))

    cover = np.column_stack([column(a) for a in range(d)]) if pts.shape[0] else np.zeros((0, d))
    while free_lo.any() or free_hi.any():
        enter = cover.max(axis=1)
        p = int(np.argmin(enter)) if enter.size else -1
        t_pt = enter[p] if enter.size else np.inf
        wall_lo = np.where(free_lo, base_lo / rates, np.inf)
        wall_hi = np.where(free_hi, (1.0 - base_hi) / rates, np.inf)
        t_wall = min(wall_lo.min(), wall_hi.min())
        if t_wall < t_pt:
            a = int(np.argmin(np.minimum(wall_lo, wall_hi)))
            if wall_lo[a] <= wall_hi[a]:
                lo[a], free_lo[a] = 0.0, False
            else:
                hi[a], free_hi[a] = 1.0, False
        else:
            a = int(np.argmax(cover[p]))
            if cover[p, a] > 0:
                if below[p, a]:
                    lo[a], free_lo[a] = pts[p, a], False
                else:
                    hi[a], free_hi[a] = pts[p, a], False
            else:
                # the point sits on a face of the start box: that face may not move
                on_free_lo = np.flatnonzero(on_lo[p] & free_lo)
                on_free_hi = np.flatnonzero(on_hi[p] & free_hi)
                if on_free_lo.size:
                    a = int(on_free_lo[0])
                    free_lo[a] = False
                elif on_free_hi.size:
                    a = int(on_free_hi[0])
                    free_hi[a] = False
                else:
                    # rounding let the point slip inside: pull back the face on
                    # the axis where that costs the least relative width
                    a, side = _repair_axis(pts[p], lo, hi, below[p], above[p])
                    if side == "lo":
                        lo[a], free_lo[a] = pts[p, a], False
                    else:
                        hi[a], free_hi[a] = pts[p, a], False
        if pts.shape[0]:
            cover[:, a] = column(a)
    return lo, hi


def _repair_axis(x, lo, hi, below, above):
    best = None
    for a in range(len(x)):
        if below[a] and lo[a] < x[a]:
            keep, side = (hi[a] - x[a]) / (hi[a] - lo[a]), "lo"
        elif above[a] and x[a] < hi[a]:
            keep, side = (x[a] - lo[a]) / (hi[a] - lo[a]), "hi"
        else:
            continue
        if best is None or keep > best[0]:
            best = (keep, a, side)
    if best is None:
        raise ValueError("start box is not empty")
    return best[1], best[2]


def estimate_dispersion(xs: PointSet, cfg: SearchConfig = SearchConfig(),
                        probes: Iterable[AxisBox] = ()) -> DispersionResult:
    """Certified lower estimate of the dispersion for any dimension.

    ``cfg.estimator_budget`` random seeds (drawn from ``numpy`` PCG64 seeded
    with ``[cfg.rng_seed, 1]``, each with random per-axis growth rates) are
    inflated into maximal empty boxes.  The 2d boundary slabs (cube face to
    nearest point) and every empty box in ``probes`` are grown as well.  The
    returned witness is a genuine empty box,
    so the value never exceeds the true dispersion.
    """
    t0 = time.perf_counter()
    d = xs.dim
    pts = xs.points
    # separate stream from generators seeded with the same integer
    rng = np.random.default_rng([cfg.rng_seed, 1])
    starts = []
    seeds = rng.random((cfg.estimator_budget, d))
    rates = rng.uniform(0.25, 1.0, (cfg.estimator_budget, d))
    for s, r in zip(seeds, rates):
        if not (pts == s).all(axis=1).any():
            starts.append((s, s, r))
    # the slabs between each cube face and the nearest point are always empty
    for a in range(d):
        col = pts[:, a]
        for lo_a, hi_a in ((0.0, col.min(initial=1.0)), (col.max(initial=0.0), 1.0)):
            if lo_a < hi_a:
                lo, hi = np.zeros(d), np.ones(d)
                lo[a], hi[a] = lo_a, hi_a
                starts.append((lo, hi, None))
    for b in probes:
        if b.dim != d:
            raise ValueError("probe box dimension does not match the point set")
        if box_is_empty(b, xs)[0]:
            starts.append((*b.as_arrays(), None))

    best_vol, best_key, best_box = -1.0, None, None
    examined = 0
    for lo0, hi0, r in starts:
        lo, hi = _grow(lo0, hi0, pts, r)
        examined += 1
        if np.any(lo >= hi):
            continue
        vol = _float_vol(lo, hi)
        key = _lex_key(lo, hi)
        if vol > best_vol or (vol == best_vol and key < best_key):
            best_vol, best_key, best_box = vol, key, (lo, hi)
    if best_box is None:
        raise RuntimeError("every seed collapsed to a degenerate box")
    witness = AxisBox(tuple(map(float, best_box[0])), tuple(map(float, best_box[1])))
    return DispersionResult(witness.volume, witness, "lower-estimate", examined,
                            time.perf_counter() - t0)
