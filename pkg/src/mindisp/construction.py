"""Structured test boxes, their hitting sets and the reduction to cover-free families.

For ``eps`` in the bucket ``2**-(k+1) < eps <= 2**-k`` put ``r = 2**(k-2)`` and
``t = 2**(1-k)``.  The box ``B(A, j)`` is ``(0, t)`` on axis ``j``, ``(t, 1)``
on every axis of ``A`` (``|A| = r``, ``j`` not in ``A``) and ``(0, 1)``
elsewhere; each has volume at least ``eps``.  A point set meeting every such
box yields sets ``F_j = {x : x_j < t}`` that form an r-cover-free family, which
in turn forces many points.  All indices here are 0-based.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .coverfree import CoverFreeCertificate, SetFamily, alon_asodi_bound, certify_cover_free
from .errors import DimensionError, PreconditionError
from .geometry import AxisBox, Dyadic, PointSet

DEFAULT_ENUMERATION_CAP = 10**7
PAPER_CONSTANT = Fraction(1, 1920)


class EnumerationCapError(PreconditionError):
    """The test-box family is larger than the configured enumeration cap."""


# --- epsilon buckets ---------------------------------------------------------

@dataclass(frozen=True)
class EpsilonBucket:
    eps: float
    k: int

    @property
    def r(self) -> int:
        return 2 ** (self.k - 2)

    @property
    def threshold(self) -> Dyadic:
        return Dyadic.power_of_two(1 - self.k)


def k_of_eps(eps) -> EpsilonBucket:
    """The unique ``k`` with ``2**-(k+1) < eps <= 2**-k``, compared exactly."""
    e = Fraction(eps)
    if not 0 < e <= Fraction(1, 4):
        raise PreconditionError(f"0 < eps <= 1/4 violated (eps={eps})")
    k = 2
    while e <= Fraction(1, 2 ** (k + 1)):
        k += 1
    return EpsilonBucket(float(eps), k)


def in_theorem_range(eps, d: int) -> bool:
    e = Fraction(eps)
    return d >= 2 and e <= Fraction(1, 4) and 16 * e * e * d >= 1


def _check_theorem_range(eps, d: int) -> None:
    e = Fraction(eps)
    if d < 2:
        raise PreconditionError(f"d >= 2 violated (d={d})")
    if e > Fraction(1, 4):
        raise PreconditionError(f"eps <= 1/4 violated (eps={eps})")
    if 16 * e * e * d < 1:
        raise PreconditionError(f"eps >= 1/(4*sqrt(d)) violated (eps={eps}, d={d})")


# --- the test-box family -----------------------------------------------------

@dataclass(frozen=True)
class TestBoxSpec:
    """Compact name ``(A, j, k, d)`` of one structured test box."""

    __test__ = False  # not a pytest class

    A: frozenset[int]
    j: int
    k: int
    d: int

    def __post_init__(self):
        A = frozenset(int(i) for i in self.A)
        object.__setattr__(self, "A", A)
        if self.k < 2:
            raise PreconditionError(f"k >= 2 violated (k={self.k})")
        if not 0 <= self.j < self.d or any(not 0 <= i < self.d for i in A):
            raise PreconditionError("indices must lie in range(d)")
        if self.j in A:
            raise PreconditionError("j must not belong to A")
        if len(A) > 2 ** (self.k - 2):
            raise PreconditionError(f"|A| <= 2**(k-2) violated (|A|={len(A)}, k={self.k})")

    def to_json(self) -> dict:
        return {"A": sorted(self.A), "j": self.j, "k": self.k, "d": self.d}


def test_box(spec: TestBoxSpec) -> AxisBox:
    t = Dyadic.power_of_two(1 - spec.k)
    zero, one = Dyadic(0), Dyadic(1)
    lo, hi = [], []
    for i in range(spec.d):
        if i == spec.j:
            lo.append(zero), hi.append(t)
        elif i in spec.A:
            lo.append(t), hi.append(one)
        else:
            lo.append(zero), hi.append(one)
    return AxisBox(tuple(lo), tuple(hi))


test_box.__test__ = False


def test_box_volume(spec: TestBoxSpec) -> Fraction:
    """Closed form ``(1 - t)**|A| * t`` with ``t = 2**(1-k)``, exact."""
    t = Fraction(1, 2 ** (spec.k - 1))
    return (1 - t) ** len(spec.A) * t


test_box_volume.__test__ = False


def family_size(d: int, k: int) -> int:
    r = 2 ** (k - 2)
    return math.comb(d, r) * (d - r)


def colex_combinations(n: int, r: int) -> Iterator[tuple[int, ...]]:
    """All r-subsets of ``range(n)`` as sorted tuples, in colexicographic order."""
    if r == 0:
        yield ()
        return
    for top in range(r - 1, n):
        for rest in colex_combinations(top, r - 1):
            yield rest + (top,)


def _colex_key(A) -> tuple:
    return tuple(sorted(A, reverse=True))


def enumerate_test_family(d: int, k: int, at_most: bool = False,
                          cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[TestBoxSpec]:
    """Yield every ``TestBoxSpec`` once: ``A`` in colex order, then ``j`` ascending.

    By default ``|A| = 2**(k-2)`` exactly; ``at_most=True`` also yields the
    smaller ``A`` (sizes ascending), which the volume checks cover too.
    """
    r = 2 ** (k - 2)
    if k < 2:
        raise PreconditionError(f"k >= 2 violated (k={k})")
    if r >= d:
        raise PreconditionError(f"2**(k-2) < d violated (k={k}, d={d})")
    sizes = range(r + 1) if at_most else [r]
    count = sum(math.comb(d, a) * (d - a) for a in sizes)
    if count > cap:
        raise EnumerationCapError(f"test family has {count} boxes, above the cap {cap}")
    return _enumerate(d, k, sizes)


def _enumerate(d, k, sizes):
    for a in sizes:
        for A in colex_combinations(d, a):
            members = frozenset(A)
            for j in range(d):
                if j not in members:
                    yield TestBoxSpec(members, j, k, d)


@dataclass(frozen=True)
class Claim1Result:
    holds: bool
    k: int
    min_size: int
    min_volume: Fraction
    chain_ok: bool
    convexity_ok: bool

    @property
    def direct_ok(self) -> bool:
        return self.min_volume >= Fraction(1, 2 ** self.k)


def verify_claim1(d: int, k: int, grid: int = 64) -> Claim1Result:
    """Check ``(1 - t)**a * t >= 2**-k`` for ``0 <= a <= 2**(k-2)`` in exact arithmetic.

    Both the direct inequality and the two-step bound through
    ``1 - x >= 2**(-2x)`` are checked.  The convexity inequality is verified at
    ``x = i/grid`` for ``x`` in ``[0, 1/2]`` via ``(1 - x)**grid >= 2**(-2i)``,
    which avoids irrational powers.
    """
    if d < 2 or k < 2:
        raise PreconditionError(f"d >= 2 and k >= 2 required (d={d}, k={k})")
    r = 2 ** (k - 2)
    if r >= d:
        raise PreconditionError(f"2**(k-2) < d violated (k={k}, d={d})")
    t = Fraction(1, 2 ** (k - 1))
    target = Fraction(1, 2 ** k)
    vols = [(1 - t) ** a * t for a in range(r + 1)]
    min_size = min(range(r + 1), key=lambda a: vols[a])
    direct = all(v >= target for v in vols)
    # chain: (1-t)**r >= (2**(-2t))**r = 1/2, then t/2 = 2**-k
    chain = (1 - t) ** r >= Fraction(1, 2) and 2 * t * r <= 1 and t / 2 == target
    convex = all((1 - Fraction(i, grid)) ** grid >= Fraction(1, 4 ** i)
                 for i in range(grid // 2 + 1))
    return Claim1Result(direct and chain and convex, k, min_size, vols[min_size], chain, convex)


def log_inequality_scan(d_max: int = 10**6) -> tuple[bool, int, float]:
    """Check ``log(d - sqrt(d)/2) >= log(d)/3`` for ``2 <= d <= d_max``.

    Returns ``(holds, d_at_smallest_margin, smallest_margin)``.
    """
    d = np.arange(2, d_max + 1, dtype=float)
    margin = np.log(d - np.sqrt(d) / 2) - np.log(d) / 3
    i = int(np.argmin(margin))
    return bool(margin[i] >= 0), int(d[i]), float(margin[i])


# --- patterns, hitting, F_j --------------------------------------------------

def point_patterns(xs: PointSet, k: int, strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Boolean ``(n, d)`` matrices ``small[x, i] = 0 < x_i < t`` and ``large[x, i] = t < x_i < 1``.

    These are exactly the open intervals of the test boxes.  Every other axis
    of a test box is the open ``(0, 1)``, so a point with any coordinate at 0
    or 1 lies in no test box and gets empty patterns.  ``strict=False`` switches to ``x_i <= t`` and
    ``x_i >= t``; it exists only for fault injection and makes the reduction
    unsound.
    """
    t = float(Dyadic.power_of_two(1 - k))  # exact in binary floating point
    pts = xs.points
    if strict:
        inside = ((pts > 0) & (pts < 1)).all(axis=1, keepdims=True)
        return (pts < t) & inside, (pts > t) & inside
    return pts <= t, pts >= t


def _first_uncovered(P: np.ndarray, r: int, cols: np.ndarray) -> tuple[int, ...] | None:
    """Colex-first r-subset of ``cols`` contained in no row of ``P``, or None."""
    if r == 0:
        return None if P.shape[0] else ()
    if P.shape[0] == 0:
        return tuple(int(c) for c in cols[:r]) if len(cols) >= r else None
    if r == 1:
        missing = np.flatnonzero(~P.any(axis=0))
        return (int(cols[missing[0]]),) if missing.size else None
    for top in range(r - 1, len(cols)):
        rows = P[:, top]
        found = _first_uncovered(P[rows][:, :top], r - 1, cols[:top])
        if found is not None:
            return found + (int(cols[top]),)
    return None


def hits_all(xs: PointSet, d: int, k: int, strict: bool = True,
             cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[bool, TestBoxSpec | None]:
    """Does ``xs`` meet every box of the test family?

    A point hits ``B(A, j)`` iff ``x_j < t`` and ``x_i > t`` for all ``i`` in
    ``A``, so the check runs on the small/large patterns and never touches
    boxes one by one.  On failure the first missed box in enumeration order is
    returned.
    """
    if xs.dim != d:
        raise DimensionError(f"point set has dimension {xs.dim}, expected {d}")
    r = 2 ** (k - 2)
    if r >= d:
        raise PreconditionError(f"2**(k-2) < d violated (k={k}, d={d})")
    if family_size(d, k) > cap:
        raise EnumerationCapError(f"test family has {family_size(d, k)} boxes, above the cap {cap}")
    small, large = point_patterns(xs, k, strict)
    first = None
    for j in range(d):
        cols = np.array([i for i in range(d) if i != j])
        P = large[small[:, j]][:, cols]
        A = _first_uncovered(P, r, cols)
        if A is None:
            continue
        if first is None or (_colex_key(A), j) < (_colex_key(first[0]), first[1]):
            first = (A, j)
    if first is None:
        return True, None
    return False, TestBoxSpec(frozenset(first[0]), first[1], k, d)


def extract_family(xs: PointSet, k: int, strict: bool = True) -> SetFamily:
    """``F_j`` = indices of points whose ``j``-th coordinate is below ``2**(1-k)``."""
    t = float(Dyadic.power_of_two(1 - k))
    small = xs.points < t if strict else xs.points <= t
    return SetFamily(len(xs), tuple(frozenset(np.flatnonzero(small[:, j]).tolist())
                                    for j in range(xs.dim)))


# --- bound formulas ----------------------------------------------------------

def lower_bound_main(eps, d: int, c=PAPER_CONSTANT) -> float:
    """``c * log(d) / (eps**2 * log(1/eps))`` on ``1/(4 sqrt d) <= eps <= 1/4``."""
    _check_theorem_range(eps, d)
    eps = float(eps)
    return float(c) * math.log(d) / (eps * eps * math.log(1 / eps))


def intermediate_bound(d: int, k: int) -> float:
    """``2**(2k-4) * log(d - 2**(k-3)) / (10 log 2**(k-2))`` for ``k >= 3``.

    This is the cover-free ground-set bound evaluated at ``r = 2**(k-2)``.
    """
    if k < 3:
        raise PreconditionError(f"k >= 3 violated (k={k})")
    return alon_asodi_bound(d, 2 ** (k - 2))


def trivial_lower(eps) -> float:
    """Pigeonhole: ``N(eps, d) >= 1/eps - 1``."""
    if not 0 < eps < 1:
        raise PreconditionError(f"0 < eps < 1 violated (eps={eps})")
    return 1 / eps - 1


def ahr_lower(eps, d: int) -> float:
    """``N(eps, d) >= log2(d) / (8 eps)`` for ``d >= 2`` and ``0 < eps < 1/4``."""
    if d < 2:
        raise PreconditionError(f"d >= 2 violated (d={d})")
    if not 0 < eps < 0.25:
        raise PreconditionError(f"0 < eps < 1/4 violated (eps={eps})")
    return math.log2(d) / (8 * eps)


def bc_upper(eps, d: int, C: float) -> float:
    return C * d * d * math.log(d) / eps


def uvl_upper(eps, d: int, C: float) -> float:
    return C * math.log(d) * math.log(1 / eps) / (eps * eps)


def corollary_lower(n: int, d: int, c2: float, c1: float | None = None) -> float:
    """``disp*(n, d) >= c2 * sqrt(log d / n) / sqrt(log(n / log d))``.

    Needs ``2 log d <= n``; the upper side ``n <= c1 d`` is only checked when
    the caller supplies ``c1``.
    """
    if d < 2:
        raise PreconditionError(f"d >= 2 violated (d={d})")
    if n < 2 * math.log(d):
        raise PreconditionError(f"2*log(d) <= n violated (n={n}, d={d})")
    if c1 is not None and n > c1 * d:
        raise PreconditionError(f"n <= c1*d violated (n={n}, c1={c1}, d={d})")
    ld = math.log(d)
    return c2 * math.sqrt(ld / n) / math.sqrt(math.log(n / ld))


@dataclass(frozen=True)
class BoundEntry:
    name: str
    kind: str  # "lower" | "upper"
    quantity: str  # "N(eps,d)" | "disp*(n,d)"
    value: float | None
    constants: str  # "published", "caller" or "none"
    note: str = ""

    def to_json(self) -> dict:
        return dict(self.__dict__)


def reference_bounds(eps, d: int, C_bc: float | None = None, C_uvl: float | None = None,
                     c1: float | None = None, c2: float | None = None,
                     n: int | None = None) -> list[BoundEntry]:
    """Evaluate every reference bound that applies to ``(eps, d)``.

    Upper-bound constants and the corollary constants are not fixed by the
    literature; entries needing a missing constant are reported with
    ``value=None``.
    """
    if not 0 < eps < 1:
        raise PreconditionError(f"0 < eps < 1 violated (eps={eps})")
    if d < 2:
        raise PreconditionError(f"d >= 2 violated (d={d})")
    out = [BoundEntry("trivial", "lower", "N(eps,d)", trivial_lower(eps), "none")]
    if eps < 0.25:
        out.append(BoundEntry("ahr", "lower", "N(eps,d)", ahr_lower(eps, d), "published"))
    else:
        out.append(BoundEntry("ahr", "lower", "N(eps,d)", None, "published", "needs eps < 1/4"))
    if in_theorem_range(eps, d):
        out.append(BoundEntry("main", "lower", "N(eps,d)", lower_bound_main(eps, d), "published",
                              "c = 1/1920"))
        k = k_of_eps(eps).k
        if k >= 3:
            out.append(BoundEntry("intermediate", "lower", "N(eps,d)",
                                  intermediate_bound(d, k), "published", f"k = {k}"))
    else:
        out.append(BoundEntry("main", "lower", "N(eps,d)", None, "published",
                              "needs 1/(4 sqrt d) <= eps <= 1/4"))
    out.append(BoundEntry("bc", "upper", "N(eps,d)",
                          None if C_bc is None else bc_upper(eps, d, C_bc),
                          "caller", "" if C_bc is not None else "C_bc not supplied"))
    out.append(BoundEntry("uvl", "upper", "N(eps,d)",
                          None if C_uvl is None else uvl_upper(eps, d, C_uvl),
                          "caller", "" if C_uvl is not None else "C_uvl not supplied"))
    if n is not None and c2 is not None:
        note = "n <= c1*d checked" if c1 is not None else "n <= c1*d not checked (c1 not supplied)"
        out.append(BoundEntry("corollary", "lower", "disp*(n,d)",
                              corollary_lower(n, d, c2, c1), "caller", note))
    return out


# --- the reduction end to end --------------------------------------------------

@dataclass
class ReductionReport:
    d: int
    eps: float
    k: int
    family_size: int
    n: int
    hits_all: bool
    missing_box: TestBoxSpec | None = None
    certificate: CoverFreeCertificate | None = None
    bounds: dict = field(default_factory=dict)
    exceeds: dict = field(default_factory=dict)
    internal_error: str | None = None
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "d": self.d, "eps": self.eps, "k": self.k, "r": 2 ** (self.k - 2),
            "family_size": self.family_size, "n": self.n,
            "hits_all": self.hits_all,
            "missing_box": None if self.missing_box is None else self.missing_box.to_json(),
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "bounds": self.bounds, "exceeds": self.exceeds,
            "internal_error": self.internal_error,
        }


def run_reduction(xs: PointSet, eps, strict: bool = True, exact_cover_numbers: bool = False,
                  cap: int = DEFAULT_ENUMERATION_CAP) -> ReductionReport:
    """Hit-check ``xs`` against the test family for ``eps`` and push it through the bounds.

    If every box is hit, the extracted family must certify at ``r = 2**(k-2)``;
    a refutation in that situation is recorded in ``internal_error``.
    """
    t0 = time.perf_counter()
    d = xs.dim
    _check_theorem_range(eps, d)
    k = k_of_eps(eps).k
    r = 2 ** (k - 2)
    hit, missing = hits_all(xs, d, k, strict=strict, cap=cap)
    rep = ReductionReport(d, float(eps), k, family_size(d, k), len(xs), hit, missing)
    rep.bounds = {"main_lower": lower_bound_main(eps, d),
                  "intermediate_aa": intermediate_bound(d, k) if k >= 3 else None,
                  "trivial": trivial_lower(eps),
                  "ahr": ahr_lower(eps, d) if eps < 0.25 else None}
    rep.exceeds = {name: (None if v is None else rep.n > v) for name, v in rep.bounds.items()}
    if hit:
        rep.certificate = certify_cover_free(extract_family(xs, k, strict=strict), r,
                                             exact_numbers=exact_cover_numbers)
        if not rep.certificate.certified:
            j, A = rep.certificate.refutation
            rep.internal_error = (f"every test box is hit but F_{j} lies in the union of "
                                  f"F_i for i in {list(A)}")
    rep.seconds = time.perf_counter() - t0
    return rep
