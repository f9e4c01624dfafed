"""Exact integer lattice algebra: Hermite-style elimination, membership, kernels.

All solvers work on plain Python integers, so results are exact at any size.
Matrices are lists of row lists. The workhorse is a row-echelon reduction by
unimodular row operations (extended-gcd pivoting), with an optional
transformation matrix carried along, exactly the classical Hermite normal form
computation.
"""

from fractions import Fraction


def xgcd(a, b):
    # Invariants: x*a + y*b == g and next_x*a + next_y*b == next_g.
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def _echelonize(rows, transform):
    """Bring `rows` to row echelon form by unimodular operations, in place.

    Applies the same operations to `transform`. Returns the list of pivot
    column indices (one per nonzero row, increasing).
    """
    if not rows:
        return []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        # eliminate column c below row r, accumulating the gcd into row r
        for i in range(r + 1, len(rows)):
            if rows[i][c] == 0:
                continue
            a, b = rows[r][c], rows[i][c]
            if a == 0:
                rows[r], rows[i] = rows[i], rows[r]
                transform[r], transform[i] = transform[i], transform[r]
                continue
            if b % a == 0:
                q = b // a
                rows[i] = [x - q * y for x, y in zip(rows[i], rows[r])]
                transform[i] = [x - q * y for x, y in zip(transform[i], transform[r])]
            else:
                x, y, g = xgcd(a, b)
                mbg, ag = -b // g, a // g
                new_r = [x * u + y * v for u, v in zip(rows[r], rows[i])]
                new_i = [mbg * u + ag * v for u, v in zip(rows[r], rows[i])]
                rows[r], rows[i] = new_r, new_i
                new_tr = [x * u + y * v for u, v in zip(transform[r], transform[i])]
                new_ti = [mbg * u + ag * v for u, v in zip(transform[r], transform[i])]
                transform[r], transform[i] = new_tr, new_ti
        if rows[r][c] != 0:
            if rows[r][c] < 0:
                rows[r] = [-x for x in rows[r]]
                transform[r] = [-x for x in transform[r]]
            pivots.append(c)
            r += 1
            if r == len(rows):
                break
    return pivots


def solve_integer(A, b):
    """Solve A @ lam == b for an integer vector lam, or return None.

    A is an m x g integer matrix (list of m rows of length g), b a length-m
    integer vector. Works by echelonizing the transposed system: the rows of
    A^T span the lattice of reachable right-hand sides.
    """
    m = len(A)
    g = len(A[0]) if A else 0
    if m == 0 or g == 0:
        if any(b):
            return None if g == 0 else None
        return [0] * g
    rows = [[A[i][j] for i in range(m)] for j in range(g)]  # A^T, g rows
    transform = [[1 if i == j else 0 for i in range(g)] for j in range(g)]
    pivots = _echelonize(rows, transform)
    # reduce b against the echelon rows, tracking the combination
    residual = list(b)
    mu = [0] * g
    for r, c in enumerate(pivots):
        if residual[c] == 0:
            continue
        p = rows[r][c]
        if residual[c] % p != 0:
            return None
        q = residual[c] // p
        residual = [x - q * y for x, y in zip(residual, rows[r])]
        mu[r] = q
    if any(residual):
        return None
    # lam = sum_r mu[r] * transform[r]
    lam = [0] * g
    for r in range(g):
        if mu[r]:
            lam = [x + mu[r] * y for x, y in zip(lam, transform[r])]
    return lam


def kernel_basis(A):
    """Basis of the integer kernel {lam : A @ lam == 0} of an m x g matrix."""
    m = len(A)
    g = len(A[0]) if A else 0
    if g == 0:
        return []
    if m == 0:
        return [[1 if i == j else 0 for i in range(g)] for j in range(g)]
    rows = [[A[i][j] for i in range(m)] for j in range(g)]  # A^T
    transform = [[1 if i == j else 0 for i in range(g)] for j in range(g)]
    pivots = _echelonize(rows, transform)
    rank = len(pivots)
    return [transform[r] for r in range(rank, g) ]


def hnf(rows):
    """Canonical Hermite normal form of the lattice spanned by integer rows.

    Pivots positive, entries above each pivot reduced to [0, pivot). Zero rows
    are dropped. The result depends only on the spanned lattice.
    """
    work = [list(r) for r in rows if any(r)]
    if not work:
        return []
    transform = [[0] * len(work) for _ in work]  # unused, placeholder shape
    for i in range(len(work)):
        transform[i] = [1 if j == i else 0 for j in range(len(work))]
    pivots = _echelonize(work, transform)
    work = work[: len(pivots)]
    # reduce above pivots
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        p = work[r][c]
        for i in range(r):
            q = work[i][c] // p
            if q:
                work[i] = [x - q * y for x, y in zip(work[i], work[r])]
    return work


def hnf_fractions(vectors):
    """Canonical generators of the lattice spanned by vectors of Fractions.

    Scales by the common denominator, runs integer HNF, scales back.
    """
    vecs = [list(map(Fraction, v)) for v in vectors if any(v)]
    if not vecs:
        return []
    den = 1
    for v in vecs:
        for x in v:
            den = den * x.denominator // _gcd(den, x.denominator)
    int_rows = [[int(x * den) for x in v] for v in vecs]
    reduced = hnf(int_rows)
    return [[Fraction(x, den) for x in row] for row in reduced]


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a if a >= 0 else -a
