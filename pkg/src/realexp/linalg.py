"""Exact linear algebra over the coefficient field (rationals or GF(p)).

Rank computation over the rationals is fraction-free: rows are scaled to
integers and eliminated with the Bareiss two-term update, so no rational
arithmetic happens inside the elimination loop. Prime fields use ordinary
modular elimination. Solvers use reduced row echelon form with least-index
pivoting, which makes every solution the engine picks deterministic.
"""

from dataclasses import dataclass
from fractions import Fraction


def _is_prime(p):
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


class Rationals:
    """Exact rational coefficient field."""

    name = "QQ"

    def convert(self, x):
        return Fraction(x)

    def iszero(self, x):
        return x == 0

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        return a / b

    def neg(self, a):
        return -a

    zero = Fraction(0)
    one = Fraction(1)

    def __repr__(self):
        return "QQ"


class PrimeField:
    """Integers modulo a prime p."""

    def __init__(self, p):
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.name = f"GF({p})"
        self.zero = 0
        self.one = 1 % p

    def convert(self, x):
        x = Fraction(x)
        num = x.numerator % self.p
        den = x.denominator % self.p
        if den == 0:
            raise ZeroDivisionError(f"denominator divisible by {self.p}")
        return num * pow(den, -1, self.p) % self.p

    def iszero(self, x):
        return x % self.p == 0

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def div(self, a, b):
        return a * pow(b, -1, self.p) % self.p

    def neg(self, a):
        return (-a) % self.p

    def __repr__(self):
        return self.name


QQ = Rationals()


@dataclass(frozen=True)
class FieldConfig:
    """Choice of coefficient field: exact rationals or a prime field."""

    kind: str = "QQ"  # "QQ" or "GF"
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("QQ", "GF"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "GF" and not _is_prime(self.p or 0):
            raise ValueError(f"GF requires a prime, got {self.p}")

    def field(self):
        return QQ if self.kind == "QQ" else PrimeField(self.p)

    def to_json(self):
        return {"kind": self.kind} if self.kind == "QQ" else {"kind": "GF", "p": self.p}

    @staticmethod
    def from_json(obj):
        return FieldConfig(obj.get("kind", "QQ"), obj.get("p"))


def rank(matrix, field=QQ):
    """Rank of a dense matrix of field elements (or Fractions/ints)."""
    if not matrix or not matrix[0]:
        return 0
    if isinstance(field, PrimeField):
        return _rank_modp(matrix, field.p)
    return _rank_bareiss(matrix)


def _rank_bareiss(matrix):
    # clear denominators row by row, then fraction-free elimination over ZZ
    rows = []
    for row in matrix:
        fr = [Fraction(x) for x in row]
        den = 1
        for x in fr:
            den = den * x.denominator // _igcd(den, x.denominator)
        rows.append([int(x * den) for x in fr])
    m, n = len(rows), len(rows[0])
    r = 0
    prev = 1
    for c in range(n):
        piv = None
        for i in range(r, m):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pivot = rows[r][c]
        for i in range(r + 1, m):
            ric = rows[i][c]
            rows[i] = [
                (pivot * rows[i][j] - ric * rows[r][j]) // prev for j in range(n)
            ]
        prev = pivot
        r += 1
        if r == m:
            break
    return r


def _rank_modp(matrix, p):
    rows = [[int(x) % p for x in row] for row in matrix]
    m, n = len(rows), len(rows[0])
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, m):
            if rows[i][c] % p:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == m:
            break
    return r


def rref(matrix, field=QQ):
    """Reduced row echelon form. Returns (rows, pivot_columns).

    Least-index pivoting: the first row with a nonzero entry in the current
    column is chosen, columns are scanned left to right.
    """
    rows = [[field.convert(x) for x in row] for row in matrix]
    if not rows:
        return [], []
    n = len(rows[0])
    pivots = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, len(rows)):
            if not field.iszero(rows[i][c]):
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = field.div(field.one, rows[r][c])
        rows[r] = [field.mul(inv, x) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not field.iszero(rows[i][c]):
                f = rows[i][c]
                rows[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def solve_affine(A, b, field=QQ):
    """All solutions of A x = b: returns (particular, nullspace_basis) or None.

    The particular solution sets every free variable to zero (deterministic).
    """
    if not A:
        if any(not field.iszero(field.convert(x)) for x in b):
            return None
        return [], []
    n = len(A[0])
    aug = [list(row) + [bb] for row, bb in zip(A, b)]
    rows, pivots = rref(aug, field)
    # consistency: a pivot in the last column means no solution
    if n in pivots:
        return None
    pivot_of_col = {c: r for r, c in enumerate(pivots)}
    particular = [field.zero] * n
    for c, r in pivot_of_col.items():
        particular[c] = rows[r][n]
    free_cols = [c for c in range(n) if c not in pivot_of_col]
    basis = []
    for fc in free_cols:
        vec = [field.zero] * n
        vec[fc] = field.one
        for c, r in pivot_of_col.items():
            vec[c] = field.neg(rows[r][fc])
        basis.append(vec)
    return particular, basis


def nullspace(A, field=QQ):
    """Basis of the kernel of A (list of length-n vectors)."""
    if not A:
        return []
    sol = solve_affine(A, [field.zero] * len(A), field)
    return sol[1]


def sparse_rank(entries, nrows, ncols, field=QQ):
    """Rank of a sparse matrix given as {(i, j): value}.

    Elimination keeps rows as column->value dicts and prefers unit pivots,
    which keeps Koszul-style incidence matrices fraction-free in practice.
    """
    rows = {}
    for (i, j), v in entries.items():
        v = field.convert(v)
        if field.iszero(v):
            continue
        rows.setdefault(i, {})[j] = v
    live = dict(rows)
    rk = 0
    while live:
        # pick the sparsest row, unit-pivot rows first
        def _key(item):
            i, row = item
            has_unit = any(v == field.one or v == field.neg(field.one) for v in row.values())
            return (not has_unit, len(row), i)

        i, row = min(live.items(), key=_key)
        del live[i]
        if not row:
            continue
        rk += 1
        c = min(row)
        pv = row[c]
        touched = [ii for ii, rr in live.items() if c in rr]
        for ii in touched:
            rr = live[ii]
            f = field.div(rr[c], pv)
            for j, v in row.items():
                new = field.sub(rr.get(j, field.zero), field.mul(f, v))
                if field.iszero(new):
                    rr.pop(j, None)
                else:
                    rr[j] = new
        live = {ii: rr for ii, rr in live.items() if rr}
    return rk


def _igcd(a, b):
    while b:
        a, b = b, a % b
    return a if a >= 0 else -a
