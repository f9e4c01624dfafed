"""Finite chain complexes of box-module sums and their cellwise homology.

A BoxComplex stores, per homological degree, a list of box modules and a
sparse matrix of canonical morphisms mapping degree i to degree i-1. On every
cell of the joint critical arrangement each box evaluates to 0 or k and each
morphism to a scalar, so the complex restricts to a finite complex of vector
spaces per cell; homology is computed there by exact rank computations and
collected into a table indexed by (cell, degree).

Tensor products follow the Koszul sign convention: the differential acting
through the second factor picks up (-1)^p where p is the homological degree
of the first factor.
"""

import random
from dataclasses import dataclass
from fractions import Fraction

from .boxmod import (
    BoxModule,
    CanonicalMorphism,
    box_from_json,
    box_product,
    build_arrangement,
    free_box,
)
from .errors import NotFree, RealexpError
from .exponents import ExponentVector
from .linalg import QQ, FieldConfig, PrimeField, rank


class CrosscheckFailed(RealexpError):
    """Prime-field homology disagreed with the rational recomputation."""


class BoxComplex:
    """Chain complex: terms[i] is a tuple of boxes, diffs[i] maps C_i -> C_{i-1}.

    diffs[i] is a dict {(row, col): CanonicalMorphism} with row indexing
    terms[i-1] and col indexing terms[i]. Zero entries (scalar zero or empty
    overlap) are dropped at construction; every stored entry is validated
    against its terms.
    """

    def __init__(self, n, terms, diffs):
        self.n = n
        self.terms = {i: tuple(boxes) for i, boxes in terms.items() if boxes}
        self.diffs = {}
        for i, entries in diffs.items():
            kept = {}
            for (r, c), mor in entries.items():
                if mor.is_zero():
                    continue
                if i not in self.terms or (i - 1) not in self.terms:
                    raise ValueError(f"differential {i} without both terms")
                if mor.source != self.terms[i][c] or mor.target != self.terms[i - 1][r]:
                    raise ValueError(f"entry ({r},{c}) of d_{i} mismatches terms")
                kept[(r, c)] = mor
            if kept:
                self.diffs[i] = kept

    def degrees(self):
        return sorted(self.terms)

    def top_degree(self):
        return max(self.terms) if self.terms else 0

    def term(self, i):
        return self.terms.get(i, ())

    def all_boxes(self):
        out = []
        for i in self.degrees():
            out.extend(self.terms[i])
        return out

    def length(self):
        degs = self.degrees()
        return (degs[-1] - degs[0]) if degs else 0

    def arrangement(self, extra_boxes=(), extra_values=None):
        return build_arrangement(
            list(self.all_boxes()) + list(extra_boxes),
            n=self.n,
            extra_values=extra_values,
        )

    # -- cellwise and degreewise instantiation --------------------------------

    def present(self, i, arr, cell):
        return [
            idx
            for idx, b in enumerate(self.term(i))
            if arr.cell_in_box(cell, b)
        ]

    def matrix_on_cell(self, i, arr, cell, field=QQ, rows=None, cols=None):
        if rows is None:
            rows = self.present(i - 1, arr, cell)
        if cols is None:
            cols = self.present(i, arr, cell)
        entries = self.diffs.get(i, {})
        matrix = [[field.zero] * len(cols) for _ in rows]
        for ri, r in enumerate(rows):
            for ci, c in enumerate(cols):
                mor = entries.get((r, c))
                if mor is not None:
                    matrix[ri][ci] = field.convert(mor.evaluate_on_cell(arr, cell))
        return matrix

    def matrix_at_degree(self, i, v, field=QQ):
        rows = [ri for ri, b in enumerate(self.term(i - 1)) if b.contains(v)]
        cols = [ci for ci, b in enumerate(self.term(i)) if b.contains(v)]
        entries = self.diffs.get(i, {})
        matrix = [[field.zero] * len(cols) for _ in rows]
        for ri, r in enumerate(rows):
            for ci, c in enumerate(cols):
                mor = entries.get((r, c))
                if mor is not None:
                    matrix[ri][ci] = field.convert(mor.evaluate_at(v))
        return matrix

    # -- serialization ---------------------------------------------------------

    def to_json(self):
        boxes = []
        ids = {}
        for i in self.degrees():
            for b in self.terms[i]:
                if b not in ids:
                    ids[b] = f"b{len(boxes)}"
                    boxes.append(b)
        return {
            "n": self.n,
            "boxes": {ids[b]: b.to_json() for b in boxes},
            "terms": {str(i): [ids[b] for b in self.terms[i]] for i in self.degrees()},
            "differentials": {
                str(i): [
                    {"row": r, "col": c, "scalar": str(m.scalar)}
                    for (r, c), m in sorted(self.diffs[i].items())
                ]
                for i in sorted(self.diffs)
            },
        }

    @staticmethod
    def from_json(obj, basis=None):
        boxes = {bid: box_from_json(bj, basis) for bid, bj in obj["boxes"].items()}
        terms = {
            int(i): tuple(boxes[bid] for bid in ids)
            for i, ids in obj["terms"].items()
        }
        diffs = {}
        for i, entries in obj.get("differentials", {}).items():
            i = int(i)
            diffs[i] = {
                (e["row"], e["col"]): CanonicalMorphism(
                    terms[i][e["col"]], terms[i - 1][e["row"]], Fraction(e["scalar"])
                )
                for e in entries
            }
        return BoxComplex(obj["n"], terms, diffs)


@dataclass(frozen=True)
class Violation:
    """First failure found by verify_complex."""

    kind: str  # "d2"
    cell: tuple
    degree: int
    entry: tuple

    def __repr__(self):
        return f"Violation({self.kind} at degree {self.degree}, cell {self.cell}, entry {self.entry})"


def verify_complex(complex_, field=QQ, arrangement=None):
    """Check d o d = 0 cellwise. Returns None if ok, else the first Violation.

    Entry legality (every stored morphism passes can_map against its terms)
    is enforced at construction time, so only the matrix identity remains.
    """
    arr = arrangement or complex_.arrangement()
    for b in complex_.all_boxes():
        arr.check_box(b)
    degrees = sorted(complex_.diffs)
    for cell in arr.cells():
        for i in degrees:
            if (i + 1) not in complex_.diffs:
                continue
            rows = complex_.present(i - 1, arr, cell)
            mids = complex_.present(i, arr, cell)
            cols = complex_.present(i + 1, arr, cell)
            if not rows or not mids or not cols:
                continue
            a = complex_.matrix_on_cell(i, arr, cell, field, rows=rows, cols=mids)
            b = complex_.matrix_on_cell(i + 1, arr, cell, field, rows=mids, cols=cols)
            for ri in range(len(rows)):
                for ci in range(len(cols)):
                    acc = field.zero
                    for mi in range(len(mids)):
                        acc = field.add(acc, field.mul(a[ri][mi], b[mi][ci]))
                    if not field.iszero(acc):
                        return Violation("d2", cell, i + 1, (rows[ri], cols[ci]))
    return None


class CellHomologyTable:
    """Per-cell homology dimensions over the coefficient field."""

    def __init__(self, arrangement, entries, degrees, n):
        self.arrangement = arrangement
        self.entries = dict(entries)  # {(cell, degree): positive int}
        self.degrees = tuple(degrees)
        self.n = n

    def dim(self, cell, degree):
        return self.entries.get((cell, degree), 0)

    def dims_at_degree(self, v):
        cell = self.arrangement.locate(v)
        return {i: self.dim(cell, i) for i in self.degrees}

    def nonzero(self):
        return sorted(self.entries.items())

    def total_dim(self, degree):
        return sum(d for (cell, i), d in self.entries.items() if i == degree)

    def to_json(self):
        cells = {}
        for (cell, i), d in sorted(self.entries.items()):
            key = self.arrangement.cell_label(cell)
            cells.setdefault(key, {})[str(i)] = d
        return {
            "n": self.n,
            "degrees": list(self.degrees),
            "criticals": [
                [str(c) for c in cs] for cs in self.arrangement.criticals
            ],
            "cells": {k: cells[k] for k in sorted(cells)},
        }

    def to_csv(self):
        lines = ["cell," + ",".join(f"H{i}" for i in self.degrees)]
        for cell in self.arrangement.cells():
            dims = [self.dim(cell, i) for i in self.degrees]
            if any(dims):
                lines.append(
                    '"' + self.arrangement.cell_label(cell) + '",'
                    + ",".join(map(str, dims))
                )
        return "\n".join(lines) + "\n"

    def ascii_grid(self, degree):
        """Human-readable grid of one homological degree; n <= 2 only."""
        arr = self.arrangement
        if self.n == 0:
            return str(self.dim((), degree))
        if self.n == 1:
            labels = [arr.piece_label(0, p) for p in range(arr.pieces(0))]
            vals = [str(self.dim((p,), degree)) for p in range(arr.pieces(0))]
            width = [max(len(a), len(b)) for a, b in zip(labels, vals)]
            top = " | ".join(l.rjust(w) for l, w in zip(labels, width))
            bot = " | ".join(v.rjust(w) for v, w in zip(vals, width))
            return top + "\n" + bot
        if self.n != 2:
            raise ValueError("ascii grids are for n <= 2")
        xs = range(self.arrangement.pieces(0))
        ys = range(self.arrangement.pieces(1))
        col_labels = [arr.piece_label(0, p) for p in xs]
        row_labels = [arr.piece_label(1, p) for p in ys]
        rw = max(len(l) for l in row_labels)
        widths = [
            max(len(cl), *(len(str(self.dim((x, y), degree))) for y in ys))
            for x, cl in zip(xs, col_labels)
        ]
        lines = [
            " " * rw
            + " | "
            + " | ".join(cl.rjust(w) for cl, w in zip(col_labels, widths))
        ]
        for y in reversed(list(ys)):
            row = [str(self.dim((x, y), degree)).rjust(w) for x, w in zip(xs, widths)]
            lines.append(row_labels[y].rjust(rw) + " | " + " | ".join(row))
        return "\n".join(lines)


def homology(complex_, field_config=None, arrangement=None, crosscheck_fraction=0.1, seed=7):
    """Cellwise homology table of a verified complex.

    Over a prime field a deterministic sample of cells is recomputed over the
    rationals as a consistency cross-check.
    """
    cfg = field_config or FieldConfig()
    field = cfg.field()
    if not complex_.terms:
        return CellHomologyTable(arrangement or build_arrangement([], n=complex_.n), {}, (), complex_.n)
    arr = arrangement or complex_.arrangement()
    for b in complex_.all_boxes():
        arr.check_box(b)
    degs = complex_.degrees()
    degrees = range(min(degs), max(degs) + 1)
    entries = {}
    cells = arr.cells()
    crosscheck_cells = set()
    if isinstance(field, PrimeField) and crosscheck_fraction > 0:
        rng = random.Random(seed)
        k = max(1, int(len(cells) * crosscheck_fraction))
        crosscheck_cells = set(
            tuple(c) for c in rng.sample(list(cells), min(k, len(cells)))
        )
    for cell in cells:
        dims = {}
        ranks = {}
        present = {i: complex_.present(i, arr, cell) for i in degrees}
        for i in degrees:
            dims[i] = len(present[i])
        for i in degrees:
            if dims.get(i) and dims.get(i - 1):
                m = complex_.matrix_on_cell(
                    i, arr, cell, field, rows=present[i - 1], cols=present[i]
                )
                ranks[i] = rank(m, field)
            else:
                ranks[i] = 0
        ranks[max(degrees) + 1] = 0
        for i in degrees:
            h = dims[i] - ranks[i] - ranks[i + 1]
            if h < 0:
                raise RealexpError(f"negative homology at {cell}, degree {i}")
            if h:
                entries[(cell, i)] = h
        if cell in crosscheck_cells:
            for i in degrees:
                mq = complex_.matrix_on_cell(
                    i, arr, cell, QQ, rows=present[i - 1], cols=present[i]
                )
                if rank(mq, QQ) != ranks[i]:
                    raise CrosscheckFailed(
                        f"rank mismatch mod p at cell {cell}, degree {i}"
                    )
    return CellHomologyTable(arr, entries, degrees, complex_.n)


def homology_at_degree(complex_, v, field=QQ):
    """Brute-force homology dimensions of the complex at one degree vector.

    Independent of the cell machinery: boxes are tested by direct interval
    membership and ranks computed on the instantiated matrices.
    """
    degs = complex_.degrees()
    if not degs:
        return {}
    degrees = range(min(degs), max(degs) + 1)
    dims = {
        i: sum(1 for b in complex_.term(i) if b.contains(v)) for i in degrees
    }
    ranks = {}
    for i in degrees:
        m = complex_.matrix_at_degree(i, v, field)
        ranks[i] = rank(m, field) if m and m[0] else 0
    ranks[max(degrees) + 1] = 0
    return {i: dims[i] - ranks[i] - ranks[i + 1] for i in degrees}


# -- constructions -------------------------------------------------------------


@dataclass(frozen=True)
class TensorLayout:
    """Bookkeeping for a tensor product: block (p, q, i, j) per summand."""

    blocks: dict  # {degree: tuple of (p, q, i, j)}

    def index(self, m, block):
        return self.blocks[m].index(block)


def tensor_with_layout(c_left, c_right):
    """Tensor product over the field of complexes in disjoint variable blocks.

    Terms in degree m are all products (left term of degree p) x (right term
    of degree q) with p + q = m; the right-hand differential carries the sign
    (-1)^p.
    """
    n = c_left.n + c_right.n
    blocks = {}
    terms = {}
    for p in c_left.degrees():
        for q in c_right.degrees():
            m = p + q
            for i in range(len(c_left.term(p))):
                for j in range(len(c_right.term(q))):
                    blocks.setdefault(m, []).append((p, q, i, j))
    for m in blocks:
        blocks[m].sort()
        terms[m] = tuple(
            box_product(c_left.term(p)[i], c_right.term(q)[j])
            for (p, q, i, j) in blocks[m]
        )
    index = {
        m: {blk: pos for pos, blk in enumerate(blks)}
        for m, blks in blocks.items()
    }
    diffs = {}
    for m, blks in blocks.items():
        if (m - 1) not in blocks:
            continue
        entries = {}
        for col, (p, q, i, j) in enumerate(blks):
            for (r, c), mor in c_left.diffs.get(p, {}).items():
                if c != i:
                    continue
                row = index[m - 1].get((p - 1, q, r, j))
                if row is None:
                    continue
                entries[(row, col)] = CanonicalMorphism(
                    terms[m][col], terms[m - 1][row], mor.scalar
                )
            sign = -1 if p % 2 else 1
            for (r, c), mor in c_right.diffs.get(q, {}).items():
                if c != j:
                    continue
                row = index[m - 1].get((p, q - 1, i, r))
                if row is None:
                    continue
                entries[(row, col)] = CanonicalMorphism(
                    terms[m][col], terms[m - 1][row], mor.scalar * sign
                )
        diffs[m] = entries
    return (
        BoxComplex(n, terms, diffs),
        TensorLayout({m: tuple(blks) for m, blks in blocks.items()}),
    )


def tensor(c_left, c_right):
    return tensor_with_layout(c_left, c_right)[0]


def tensor_total(c_left, c_right):
    """Total complex of the double complex F x K.

    For these finite complexes the total complex coincides with the tensor
    product; the explicit block layout is retained for lifting constructions.
    """
    return tensor_with_layout(c_left, c_right)


def point_complex():
    """The unit for tensor: the field k in degree 0, over zero variables."""
    return BoxComplex(0, {0: (BoxModule(()),)}, {})


def direct_sum(complexes):
    """Direct sum of complexes over the same variables (no cross terms)."""
    if not complexes:
        raise ValueError("empty direct sum")
    n = complexes[0].n
    terms = {}
    diffs = {}
    offsets = []
    for c in complexes:
        if c.n != n:
            raise ValueError("ambient dimension mismatch")
        offsets.append({i: len(terms.get(i, ())) for i in c.degrees()})
        for i in c.degrees():
            terms[i] = tuple(terms.get(i, ())) + c.terms[i]
    for c, off in zip(complexes, offsets):
        for i, entries in c.diffs.items():
            tgt = diffs.setdefault(i, {})
            ro = off.get(i - 1, 0)
            co = off[i]
            for (r, cc), mor in entries.items():
                tgt[(r + ro, cc + co)] = mor
    return BoxComplex(n, terms, diffs)


def dualize_free(complex_):
    """Free dual of a complex of free boxes, reindexed homologically.

    Term j of the result is the dual of term (top - j) of the input, a free
    box with corner at minus the original corner; differentials are the
    transposes with the same scalars. Cohomological degree q of the dual
    corresponds to homological degree top - q of the result.
    """
    for b in complex_.all_boxes():
        if not b.is_free():
            raise NotFree(f"{b} has an open or bounded face")
    degs = complex_.degrees()
    if not degs:
        return BoxComplex(complex_.n, {}, {})
    lo, hi = degs[0], degs[-1]
    terms = {}
    for j in range(0, hi - lo + 1):
        orig = complex_.term(hi - j)
        terms[j] = tuple(free_box(-b.corner()) for b in orig)
    diffs = {}
    for j in range(1, hi - lo + 1):
        i = hi - j + 1  # original differential C_i -> C_{i-1}
        entries = {}
        for (r, c), mor in complex_.diffs.get(i, {}).items():
            entries[(c, r)] = CanonicalMorphism(
                terms[j][r], terms[j - 1][c], mor.scalar
            )
        if entries:
            diffs[j] = entries
    return BoxComplex(complex_.n, terms, diffs)


def tables_agree(table_a, table_b):
    """Do two homology tables agree as functions on R^n?

    Compares on the common refinement of the two arrangements; each table is
    constant on the refined cells by refinement invariance.
    """
    if table_a.n != table_b.n:
        return False, "dimension mismatch"
    joint = table_a.arrangement.refined(
        [list(cs) for cs in table_b.arrangement.criticals]
    )
    map_a = joint.cell_map_to(table_a.arrangement)
    map_b = joint.cell_map_to(table_b.arrangement)
    degrees = sorted(set(table_a.degrees) | set(table_b.degrees))
    for cell in joint.cells():
        ca, cb = map_a(cell), map_b(cell)
        for i in degrees:
            if table_a.dim(ca, i) != table_b.dim(cb, i):
                return False, (joint.cell_label(cell), i)
    return True, None
