"""Points, open axis-parallel boxes and exact dyadic arithmetic.

Boxes are open on every side: a point lying exactly on a face is outside.
That convention lives in :func:`box_contains` and its vectorised twin
:func:`contained_mask`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, PointFormatError

Number = float | Fraction


@dataclass(frozen=True)
class Dyadic:
    """Exact rational ``numerator / 2**exponent`` kept in canonical form."""

    numerator: int
    exponent: int = 0

    def __post_init__(self):
        if self.numerator < 0 or self.exponent < 0:
            raise ValueError("Dyadic needs numerator >= 0 and exponent >= 0")
        num, exp = self.numerator, self.exponent
        if num == 0:
            exp = 0
        else:
            while exp > 0 and num % 2 == 0:
                num //= 2
                exp -= 1
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def power_of_two(cls, p: int) -> "Dyadic":
        """``2**p`` for ``p <= 0`` (all box bounds we need live in [0, 1])."""
        if p > 0:
            return cls(2**p, 0)
        return cls(1, -p)

    @classmethod
    def from_value(cls, value: Number) -> "Dyadic":
        frac = Fraction(value)
        den = frac.denominator
        if den & (den - 1):
            raise ValueError(f"{value!r} is not a dyadic rational")
        return cls(frac.numerator, den.bit_length() - 1)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, 2**self.exponent)

    def __float__(self) -> float:
        return math.ldexp(self.numerator, -self.exponent)

    def __str__(self) -> str:
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/{2**self.exponent}"


def _exact(v) -> Fraction:
    if isinstance(v, Dyadic):
        return v.as_fraction()
    # every finite float is itself a dyadic rational, so this never rounds
    return Fraction(v)


@dataclass(frozen=True)
class AxisBox:
    """Open box ``prod_i (lo[i], hi[i])`` inside the unit cube.

    Bounds may be floats, :class:`~fractions.Fraction` or :class:`Dyadic`;
    the exact volume is always available because floats are dyadic.
    """

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(self.lo)
        hi = tuple(self.hi)
        if len(lo) != len(hi) or not lo:
            raise DimensionError("lo and hi must be non-empty and of equal length")
        for i, (a, b) in enumerate(zip(lo, hi)):
            if not (0 <= _exact(a) < _exact(b) <= 1):
                raise ValueError(f"axis {i}: need 0 <= lo < hi <= 1, got ({a}, {b})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return box_volume(self)

    def exact_volume(self) -> Fraction:
        return box_volume_exact(self)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([float(v) for v in self.lo]),
                np.array([float(v) for v in self.hi]))

    def to_json(self) -> dict:
        return {"lo": [float(v) for v in self.lo], "hi": [float(v) for v in self.hi]}


@dataclass(frozen=True)
class PointSet:
    """A finite point set in ``[0, 1]^dim`` stored as an ``(n, dim)`` float array."""

    dim: int
    points: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        pts = np.array(self.points, dtype=float).reshape(-1, self.dim)
        if pts.size and (pts.min() < 0.0 or pts.max() > 1.0 or not np.isfinite(pts).all()):
            raise ValueError("point coordinates must lie in [0, 1]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]], dim: int | None = None,
                  provenance: str = "") -> "PointSet":
        rows = [list(map(float, r)) for r in rows]
        if dim is None:
            if not rows:
                raise ValueError("cannot infer dimension of an empty point set")
            dim = len(rows[0])
        if any(len(r) != dim for r in rows):
            raise DimensionError("all points must have the same dimension")
        return cls(dim, np.array(rows, dtype=float).reshape(-1, dim), provenance)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    def with_points(self, extra: np.ndarray) -> "PointSet":
        return PointSet(self.dim, np.vstack([self.points, np.reshape(extra, (-1, self.dim))]),
                        self.provenance)


def box_volume(b: AxisBox) -> float:
    return math.prod(float(h) - float(l) for l, h in zip(b.lo, b.hi))


def box_volume_exact(b: AxisBox) -> Fraction:
    return math.prod((_exact(h) - _exact(l) for l, h in zip(b.lo, b.hi)), start=Fraction(1))


def box_contains(b: AxisBox, x: Sequence[float]) -> bool:
    """True iff ``lo[i] < x[i] < hi[i]`` on every axis (open box)."""
    if len(x) != b.dim:
        raise DimensionError(f"point has dimension {len(x)}, box has {b.dim}")
    return all(_exact(l) < _exact(v) < _exact(h) for l, v, h in zip(b.lo, x, b.hi))


def contained_mask(b: AxisBox, xs: PointSet) -> np.ndarray:
    """Vectorised :func:`box_contains` over a point set (float comparisons)."""
    if xs.dim != b.dim:
        raise DimensionError(f"point set has dimension {xs.dim}, box has {b.dim}")
    lo, hi = b.as_arrays()
    return ((xs.points > lo) & (xs.points < hi)).all(axis=1)


def box_is_empty(b: AxisBox, xs: PointSet) -> tuple[bool, int | None]:
    """Return ``(True, None)`` if no point of ``xs`` lies in ``b``,
    else ``(False, index)`` of the first contained point."""
    inside = np.flatnonzero(contained_mask(b, xs))
    if inside.size:
        return False, int(inside[0])
    return True, None


# --- CSV point files -------------------------------------------------------

def parse_points_csv(text: str) -> PointSet:
    """Parse the point CSV format.

    One point per row, ``d`` numeric columns, optional ``x1,...,xd`` header and
    ``#`` comment lines (``# provenance: ...`` is kept).
    """
    provenance = ""
    rows: list[list[float]] = []
    dim = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("provenance:"):
                provenance = body[len("provenance:"):].strip()
            continue
        fields = next(csv.reader([stripped]))
        if not rows and dim is None and fields and all(
                f.strip() == f"x{i + 1}" for i, f in enumerate(fields)):
            dim = len(fields)
            continue
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise PointFormatError(f"row {lineno}: non-numeric value in {stripped!r}") from None
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            raise PointFormatError(f"row {lineno}: expected {dim} columns, got {len(values)}")
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise PointFormatError(f"row {lineno}: coordinate outside [0, 1]")
        rows.append(values)
    if dim is None:
        raise PointFormatError("no header and no data rows; dimension unknown")
    return PointSet(dim, np.array(rows, dtype=float).reshape(-1, dim), provenance)


def read_points_csv(path: str | Path) -> PointSet:
    return parse_points_csv(Path(path).read_text())


def format_points_csv(xs: PointSet) -> str:
    out = io.StringIO()
    if xs.provenance:
        out.write(f"# provenance: {xs.provenance}\n")
    out.write(",".join(f"x{i + 1}" for i in range(xs.dim)) + "\n")
    for row in xs.points:
        out.write(",".join(repr(float(v)) for v in row) + "\n")
    return out.getvalue()


def write_points_csv(xs: PointSet, path: str | Path) -> None:
    Path(path).write_text(format_points_csv(xs))
