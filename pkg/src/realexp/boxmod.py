"""Box modules: interval-product supports, canonical maps, cell evaluation.

A box module k[B] has support B = I_1 x ... x I_n, each I_i an interval with
open, closed, or infinite ends. Every module the engine manipulates (free
modules, maximal-ideal analogues, orthant ideals, cube quotients, truncation
towers) is a finite direct sum of boxes.

Morphisms are scalar multiples of the canonical identity-on-overlap map; a
monomial shift k[B] -> k[B'] is encoded by shifting the source box so the map
becomes canonical. Legality of the canonical map is a graded-homomorphism
condition that is decided coordinatewise.

Homological bookkeeping happens on the cell arrangement of the critical
values: every box in play is constant on every cell, so evaluation is purely
symbolic (endpoint comparisons) and never constructs numeric representatives.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ArrangementMismatch
from .exponents import (
    DEFAULT_BASIS,
    EQUAL,
    GREATER,
    LESS,
    ExponentValue,
    ExponentVector,
    compare,
)


@dataclass(frozen=True)
class IntervalSpec:
    """One coordinate interval. `hi=None` means the end is +infinity."""

    lo: ExponentValue
    lo_closed: bool
    hi: Optional[ExponentValue]
    hi_closed: bool

    def __post_init__(self):
        if self.hi is None:
            if self.hi_closed:
                raise ValueError("infinite upper end cannot be closed")
            return
        c = compare(self.lo, self.hi)
        if c == GREATER:
            raise ValueError("empty interval: lo > hi")
        if c == EQUAL and not (self.lo_closed and self.hi_closed):
            raise ValueError("degenerate interval must be closed on both ends")

    def contains(self, t):
        c = compare(self.lo, t)
        if c == GREATER or (c == EQUAL and not self.lo_closed):
            return False
        if self.hi is None:
            return True
        c = compare(t, self.hi)
        if c == GREATER or (c == EQUAL and not self.hi_closed):
            return False
        return True

    def endpoints(self):
        out = [self.lo]
        if self.hi is not None:
            out.append(self.hi)
        return out

    def label(self):
        left = "[" if self.lo_closed else "("
        if self.hi is None:
            return f"{left}{self.lo},inf)"
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo},{self.hi}{right}"

    def to_json(self):
        hi = "inf" if self.hi is None else self.hi.to_json()
        return {
            "lo": {"v": self.lo.to_json(), "closed": self.lo_closed},
            "hi": {"v": hi, "closed": self.hi_closed},
        }


def interval(lo, lo_closed=True, hi=None, hi_closed=False, basis=None):
    b = basis or DEFAULT_BASIS
    lo = lo if isinstance(lo, ExponentValue) else b.value(lo)
    if hi is not None and not isinstance(hi, ExponentValue):
        hi = b.value(hi)
    return IntervalSpec(lo, lo_closed, hi, hi_closed)


@dataclass(frozen=True)
class BoxModule:
    """k[B] for a product of intervals B; evaluation at a degree is k or 0."""

    intervals: tuple

    @property
    def n(self):
        return len(self.intervals)

    def contains(self, v):
        return all(iv.contains(t) for iv, t in zip(self.intervals, v))

    def is_free(self):
        return all(iv.lo_closed and iv.hi is None for iv in self.intervals)

    def open_coords(self):
        return frozenset(
            i for i, iv in enumerate(self.intervals) if not iv.lo_closed
        )

    def corner(self):
        return ExponentVector(tuple(iv.lo for iv in self.intervals))

    def label(self):
        return " x ".join(iv.label() for iv in self.intervals)

    def to_json(self):
        return {"intervals": [iv.to_json() for iv in self.intervals]}

    def __repr__(self):
        return f"Box[{self.label()}]"


def box(*intervals):
    return BoxModule(tuple(intervals))


def box_product(a, b):
    """Tensor over the field of boxes in disjoint variable blocks."""
    return BoxModule(a.intervals + b.intervals)


def free_box(corner):
    """R(-corner): the free module on one generator in degree `corner`."""
    return BoxModule(tuple(IntervalSpec(c, True, None, False) for c in corner))


def point_box(corner):
    return BoxModule(
        tuple(IntervalSpec(c, True, c, True) for c in corner)
    )


def orthant_box(n, sigma, basis=None, corner=None):
    """The orthant ideal I_sigma: lower face at the corner (default 0), open
    exactly in the coordinates of sigma, infinite upper ends."""
    b = basis or DEFAULT_BASIS
    sigma = set(sigma)
    if corner is None:
        corner = ExponentVector(tuple(b.zero() for _ in range(n)))
    return BoxModule(
        tuple(
            IntervalSpec(corner[i], i not in sigma, None, False)
            for i in range(n)
        )
    )


def residue_box(n, basis=None):
    """k = k[{0}^n]."""
    b = basis or DEFAULT_BASIS
    return point_box(ExponentVector(tuple(b.zero() for _ in range(n))))


def box_from_json(obj, basis=None):
    from .exponents import value_from_json

    b = basis or DEFAULT_BASIS
    ivs = []
    for entry in obj["intervals"]:
        lo = value_from_json(entry["lo"]["v"], b)
        hi_raw = entry["hi"]["v"]
        hi = None if hi_raw == "inf" else value_from_json(hi_raw, b)
        ivs.append(IntervalSpec(lo, entry["lo"]["closed"], hi, entry["hi"]["closed"]))
    return BoxModule(tuple(ivs))


# -- canonical morphisms ------------------------------------------------------


def _coord_overlap_nonempty(i, j):
    """Does I intersect J (1 coordinate)?"""
    # max of lower ends
    c = compare(i.lo, j.lo)
    if c == GREATER:
        lo, lo_closed = i.lo, i.lo_closed
    elif c == LESS:
        lo, lo_closed = j.lo, j.lo_closed
    else:
        lo, lo_closed = i.lo, i.lo_closed and j.lo_closed
    # min of upper ends
    if i.hi is None and j.hi is None:
        return True
    if i.hi is None:
        hi, hi_closed = j.hi, j.hi_closed
    elif j.hi is None:
        hi, hi_closed = i.hi, i.hi_closed
    else:
        c = compare(i.hi, j.hi)
        if c == LESS:
            hi, hi_closed = i.hi, i.hi_closed
        elif c == GREATER:
            hi, hi_closed = j.hi, j.hi_closed
        else:
            hi, hi_closed = i.hi, i.hi_closed and j.hi_closed
    c = compare(lo, hi)
    if c == GREATER:
        return False
    if c == EQUAL:
        return lo_closed and hi_closed
    return True


def overlap_nonempty(source, target):
    return all(
        _coord_overlap_nonempty(i, j)
        for i, j in zip(source.intervals, target.intervals)
    )


def can_map(source, target):
    """Is the identity-on-overlap map k[B_s] -> k[B_t] a graded module hom?

    With a nonempty overlap this fails exactly when the source has support
    below the target's lower face (an element would map to zero and later
    multiply back into the overlap) or the target has support above the
    source's upper face (an image would escape the source's shadow). Both
    conditions are checked coordinatewise. An empty overlap gives the zero
    map, which is vacuously a homomorphism.
    """
    if source.n != target.n:
        raise ValueError("ambient dimension mismatch")
    if not overlap_nonempty(source, target):
        return True
    for s, t in zip(source.intervals, target.intervals):
        # source may not extend below the target's lower end
        c = compare(s.lo, t.lo)
        if c == LESS:
            return False
        if c == EQUAL and s.lo_closed and not t.lo_closed:
            return False
        # target may not extend above the source's upper end
        if s.hi is not None:
            if t.hi is None:
                return False
            c = compare(t.hi, s.hi)
            if c == GREATER:
                return False
            if c == EQUAL and t.hi_closed and not s.hi_closed:
                return False
    return True


@dataclass(frozen=True)
class CanonicalMorphism:
    """scalar * (identity on B_source intersect B_target), zero elsewhere."""

    source: BoxModule
    target: BoxModule
    scalar: Fraction = Fraction(1)

    def __post_init__(self):
        if not can_map(self.source, self.target):
            raise ValueError(
                f"no canonical morphism {self.source} -> {self.target}"
            )

    def is_zero(self):
        return self.scalar == 0 or not overlap_nonempty(self.source, self.target)

    def scaled(self, c):
        return CanonicalMorphism(self.source, self.target, self.scalar * Fraction(c))

    def evaluate_at(self, v):
        """Matrix entry of the map on the degree-v component."""
        if self.source.contains(v) and self.target.contains(v):
            return self.scalar
        return Fraction(0)

    def evaluate_on_cell(self, arrangement, cell):
        if arrangement.cell_in_box(cell, self.source) and arrangement.cell_in_box(
            cell, self.target
        ):
            return self.scalar
        return Fraction(0)


def minkowski_orthant(box_module, sigma):
    """Minkowski sum of the box with the full orthant open along sigma.

    Lower ends keep their value, becoming open in the sigma coordinates;
    every upper end becomes infinite.
    """
    sigma = _normalize_sigma(sigma, box_module.n)
    ivs = []
    for i, iv in enumerate(box_module.intervals):
        lo_closed = iv.lo_closed and i not in sigma
        ivs.append(IntervalSpec(iv.lo, lo_closed, None, False))
    return BoxModule(tuple(ivs))


def _normalize_sigma(sigma, n):
    sigma = list(sigma)
    if sigma and all(isinstance(s, bool) for s in sigma):
        if len(sigma) != n:
            raise ValueError("flag list length mismatch")
        return {i for i, f in enumerate(sigma) if f}
    return set(sigma)


# -- cell arrangements --------------------------------------------------------


class CellArrangement:
    """Partition of R^n by critical values: points and open gaps per axis.

    Pieces on one axis with m criticals c_1 < ... < c_m are indexed
    0..2m: even indices are the open intervals (-inf,c_1), (c_1,c_2), ...,
    (c_m,+inf) and odd index 2i+1 is the point {c_{i+1}}. A cell is a tuple
    of piece indices. Everything is decided by exact comparisons.
    """

    def __init__(self, criticals):
        self.criticals = tuple(tuple(cs) for cs in criticals)

    @property
    def n(self):
        return len(self.criticals)

    def pieces(self, axis):
        return 2 * len(self.criticals[axis]) + 1

    def cell_count(self):
        total = 1
        for axis in range(self.n):
            total *= self.pieces(axis)
        return total

    def cells(self):
        def rec(axis):
            if axis == self.n:
                yield ()
                return
            for rest in rec(axis + 1):
                for p in range(self.pieces(axis)):
                    yield (p,) + rest

        # deterministic lexicographic order
        out = sorted(rec(0))
        return out

    def _find(self, axis, value):
        """Index of `value` among the axis criticals, or None."""
        cs = self.criticals[axis]
        lo, hi = 0, len(cs) - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            c = compare(value, cs[mid])
            if c == EQUAL:
                return mid
            if c == LESS:
                hi = mid - 1
            else:
                lo = mid + 1
        return None

    def check_box(self, box_module):
        """Every finite endpoint of the box must be a critical value."""
        for axis, iv in enumerate(box_module.intervals):
            for v in iv.endpoints():
                if self._find(axis, v) is None:
                    raise ArrangementMismatch(
                        f"endpoint {v} of {box_module} not critical on axis {axis}"
                    )

    def piece_bounds(self, axis, piece):
        """(lower value or None for -inf, upper value or None for +inf,
        is_point)."""
        cs = self.criticals[axis]
        if piece % 2 == 1:
            c = cs[(piece - 1) // 2]
            return c, c, True
        k = piece // 2
        lo = cs[k - 1] if k > 0 else None
        hi = cs[k] if k < len(cs) else None
        return lo, hi, False

    def piece_in_interval(self, axis, piece, iv):
        lo, hi, is_point = self.piece_bounds(axis, piece)
        if is_point:
            return iv.contains(lo)
        # open piece (lo, hi); endpoints of iv are critical, so the piece is
        # entirely inside or outside
        if lo is None:
            return False  # finite lower ends only
        c = compare(iv.lo, lo)
        if c == GREATER:
            return False
        if iv.hi is None:
            return True
        if hi is None:
            return False
        return compare(hi, iv.hi) != GREATER

    def cell_in_box(self, cell, box_module):
        return all(
            self.piece_in_interval(axis, piece, iv)
            for axis, (piece, iv) in enumerate(zip(cell, box_module.intervals))
        )

    def locate(self, v):
        """Cell containing a degree vector."""
        cell = []
        for axis, t in enumerate(v):
            cs = self.criticals[axis]
            idx = self._find(axis, t)
            if idx is not None:
                cell.append(2 * idx + 1)
                continue
            # count criticals below t
            below = 0
            for c in cs:
                if compare(c, t) == LESS:
                    below += 1
                else:
                    break
            cell.append(2 * below)
        return tuple(cell)

    def representative(self, cell):
        """A degree inside the cell (rational offsets off the criticals)."""
        coords = []
        for axis, piece in enumerate(cell):
            lo, hi, is_point = self.piece_bounds(axis, piece)
            if is_point:
                coords.append(lo)
            elif lo is None and hi is None:
                coords.append(DEFAULT_BASIS.zero())
            elif lo is None:
                coords.append(hi - 1)
            elif hi is None:
                coords.append(lo + 1)
            else:
                coords.append((lo + hi) / 2)
        return ExponentVector(tuple(coords))

    def piece_label(self, axis, piece):
        lo, hi, is_point = self.piece_bounds(axis, piece)
        if is_point:
            return f"{{{lo}}}"
        left = "(-inf" if lo is None else f"({lo}"
        right = "inf)" if hi is None else f"{hi})"
        return f"{left},{right}"

    def cell_label(self, cell):
        return " x ".join(self.piece_label(a, p) for a, p in enumerate(cell))

    def refined(self, extra_per_axis):
        """New arrangement with extra critical values adjoined."""
        new = []
        for axis in range(self.n):
            vals = list(self.criticals[axis]) + list(extra_per_axis[axis])
            new.append(sort_values(vals))
        return CellArrangement(new)

    def piece_map_to(self, coarser, axis):
        """For each piece of self on `axis`, the containing piece of the
        coarser arrangement (whose criticals are a subset)."""
        out = []
        for piece in range(self.pieces(axis)):
            lo, hi, is_point = self.piece_bounds(axis, piece)
            if is_point:
                idx = coarser._find(axis, lo)
                if idx is not None:
                    out.append(2 * idx + 1)
                    continue
                ref = lo
            else:
                # any interior probe: resolve by counting coarse criticals
                # at or below the piece's lower bound
                ref = lo
            below = 0
            for c in coarser.criticals[axis]:
                cc = compare(c, ref) if ref is not None else GREATER
                if cc == LESS or (cc == EQUAL and not is_point):
                    below += 1
                else:
                    break
            out.append(2 * below)
        return out

    def cell_map_to(self, coarser):
        maps = [self.piece_map_to(coarser, axis) for axis in range(self.n)]
        return lambda cell: tuple(m[p] for m, p in zip(maps, cell))

    def to_json(self):
        return {
            "criticals": [[c.to_json() for c in cs] for cs in self.criticals]
        }


def sort_values(values):
    """Sort and deduplicate exponent values by exact comparison."""
    out = []
    for v in values:
        placed = False
        for i, w in enumerate(out):
            c = compare(v, w)
            if c == EQUAL:
                placed = True
                break
            if c == LESS:
                out.insert(i, v)
                placed = True
                break
        if not placed:
            out.append(v)
    return tuple(out)


def build_arrangement(boxes, n=None, extra_values=None, include_origin=True):
    """Arrangement of all box endpoints (plus 0) per coordinate."""
    boxes = list(boxes)
    if n is None:
        if not boxes:
            raise ValueError("need boxes or an explicit dimension")
        n = boxes[0].n
    for b in boxes:
        if b.n != n:
            raise ValueError("ambient dimension mismatch")
    per_axis = [[] for _ in range(n)]
    if include_origin and n:
        basis = (
            boxes[0].intervals[0].lo.basis if boxes else DEFAULT_BASIS
        )
        for axis in range(n):
            per_axis[axis].append(basis.zero())
    for b in boxes:
        for axis, iv in enumerate(b.intervals):
            per_axis[axis].extend(iv.endpoints())
    if extra_values:
        for axis in range(n):
            per_axis[axis].extend(extra_values[axis])
    return CellArrangement([sort_values(vs) for vs in per_axis])
