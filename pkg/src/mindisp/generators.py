"""Point-set generators.

All randomness comes from ``numpy.random.default_rng(seed)``, i.e. the PCG64
bit generator, and the seed is written into ``PointSet.provenance``.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .construction import (DEFAULT_ENUMERATION_CAP, EnumerationCapError, _colex_key,
                           colex_combinations, family_size)
from .errors import PreconditionError
from .geometry import PointSet


def uniform_random(n: int, d: int, seed: int) -> PointSet:
    if n < 0 or d < 1:
        raise PreconditionError(f"n >= 0 and d >= 1 required (n={n}, d={d})")
    rng = np.random.default_rng(seed)
    return PointSet(d, rng.random((n, d)), f"uniform n={n} d={d} seed={seed}")


def grid_random(n: int, d: int, m: int, seed: int) -> PointSet:
    """Coordinates drawn independently and uniformly from ``{1/(m+1), ..., m/(m+1)}``."""
    if m < 2:
        raise PreconditionError(f"m >= 2 violated (m={m})")
    if n < 0 or d < 1:
        raise PreconditionError(f"n >= 0 and d >= 1 required (n={n}, d={d})")
    rng = np.random.default_rng(seed)
    idx = rng.integers(1, m + 1, size=(n, d))
    return PointSet(d, idx / (m + 1), f"grid n={n} d={d} m={m} seed={seed}")


def pattern_point(S, d: int, k: int) -> np.ndarray:
    """The point with ``2**-k`` on the axes in ``S`` and ``1 - 2**-k`` elsewhere."""
    x = np.full(d, 1.0 - 2.0**-k)
    x[list(S)] = 2.0**-k
    return x


def superimposed_points(d: int, k: int, n: int, q: float | None = None, seed: int = 0,
                        boundary: float = 0.0) -> PointSet:
    """Random pattern points: each coordinate is small (``2**-k``) with probability ``q``.

    ``boundary`` is the probability that a point gets its coordinates on one
    random axis ``i0`` pinned to the threshold ``2**(1-k)`` whenever its axis
    ``j0`` is small (``i0``, ``j0`` fixed per call).  Those points sit on box
    faces; they only matter when testing that strict comparisons are used.
    """
    if k < 2:
        raise PreconditionError(f"k >= 2 violated (k={k})")
    if q is None:
        q = 1 / (2 ** (k - 2) + 1)
    if not 0 < q <= 1:
        raise PreconditionError(f"q in (0, 1] violated (q={q})")
    rng = np.random.default_rng(seed)
    small = rng.random((n, d)) < q
    pts = np.where(small, 2.0**-k, 1.0 - 2.0**-k)
    label = f"superimposed d={d} k={k} n={n} q={q:.6g} seed={seed}"
    if boundary > 0 and d >= 2:
        j0, i0 = (int(v) for v in rng.choice(d, size=2, replace=False))
        pinned = small[:, j0] & (rng.random(n) < boundary)
        pts[pinned, i0] = 2.0 ** (1 - k)
        label += f" boundary={boundary:.6g} pin=({j0},{i0})"
    return PointSet(d, pts, label)


def greedy_hitting(d: int, k: int, s_max: int | None = None,
                   cap: int = DEFAULT_ENUMERATION_CAP) -> PointSet:
    """A point set meeting every test box, built by greedy set cover.

    Candidates are pattern points with ``1 <= |S| <= s_max`` (default
    ``2**(k-2) + 1``); the point for ``S`` hits box ``(A, j)`` iff ``j`` is in
    ``S`` and ``A`` misses ``S``.  Each step takes the candidate hitting the most
    boxes not yet hit, ties to the colex-first pattern.
    """
    r = 2 ** (k - 2)
    if r >= d:
        raise PreconditionError(f"2**(k-2) < d violated (k={k}, d={d})")
    if s_max is None:
        s_max = r + 1
    s_max = min(s_max, d)
    n_boxes = family_size(d, k)
    n_cands = sum(math.comb(d, s) for s in range(1, s_max + 1))
    if n_boxes > cap or n_boxes * n_cands > 50 * cap:
        raise EnumerationCapError(
            f"greedy hitting set over {n_boxes} boxes and {n_cands} candidates exceeds the cap")

    box_index = {}
    for A in colex_combinations(d, r):
        for j in range(d):
            if j not in A:
                box_index[(A, j)] = len(box_index)
    cands = [S for s in range(1, s_max + 1) for S in colex_combinations(d, s)]
    cover = []
    for S in cands:
        rest = [i for i in range(d) if i not in S]
        hit = [box_index[(A, j)] for j in S for A in combinations(rest, r)]
        cover.append(np.array(hit, dtype=np.int64))

    uncovered = np.ones(n_boxes, dtype=bool)
    gains = np.array([c.size for c in cover])
    chosen = []
    while uncovered.any():
        gains = np.array([uncovered[c].sum() for c in cover])
        best = int(np.argmax(gains))  # argmax keeps the first, i.e. colex-first, maximum
        if gains[best] == 0:
            raise RuntimeError("candidate patterns cannot hit every box; raise s_max")
        chosen.append(cands[best])
        uncovered[cover[best]] = False
    chosen.sort(key=lambda S: (len(S), _colex_key(S)))
    pts = np.array([pattern_point(S, d, k) for S in chosen])
    return PointSet(d, pts, f"greedy-hitting d={d} k={k} s_max={s_max}")
