"""Exact arithmetic and ordering for finitely generated exponent groups in R^n.

Values are formal integer (internally: rational) combinations of declared
constants plus an exact rational part. Equality is decided coefficientwise,
which is sound for the declared independence structure; signs of nonzero
values are decided by refining certified interval enclosures of the
constants until zero is excluded. Hitting the digit cap raises
PrecisionExhausted rather than guessing: it signals an undeclared linear
relation between constants.

Group membership, ray intersections and open-cone tests are purely symbolic:
they reduce to integer lattice problems over the coefficient vectors and are
solved by exact Hermite-style elimination, with no floating point anywhere.
"""

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import mpmath
from mpmath.libmp import to_rational

from .errors import NotInGroup, PrecisionExhausted
from . import lattice

LESS, EQUAL, GREATER = -1, 0, 1

_iv_lock = threading.Lock()


def _mpi_to_fractions(x):
    a, b = x._mpi_
    pa, qa = to_rational(a)
    pb, qb = to_rational(b)
    return Fraction(int(pa), int(qa)), Fraction(int(pb), int(qb))


def _builtin_enclosure(name):
    def enclose(digits):
        with _iv_lock:
            old = mpmath.iv.dps
            try:
                mpmath.iv.dps = digits + 5
                x = mpmath.iv.pi if name == "pi" else mpmath.iv.exp(1)
                return _mpi_to_fractions(x)
            finally:
                mpmath.iv.dps = old

    return enclose


def _fixed_enclosure(lo, hi):
    pair = (Fraction(lo), Fraction(hi))
    if pair[0] >= pair[1]:
        raise ValueError("enclosure needs lo < hi")
    return lambda digits: pair


@dataclass(frozen=True)
class SymbolSpec:
    """One irrational constant: a name, an independence class id (>= 1), and
    a refinable certified enclosure."""

    name: str
    cls: int
    enclosure: Callable[[int], tuple]

    def __repr__(self):
        return f"SymbolSpec({self.name!r}, class={self.cls})"


class ConstantBasis:
    """Declared constants with certified enclosures and independence classes.

    The rationals form the implicit class 0 with exact values; each declared
    class, together with 1, is trusted to be Q-linearly independent. Cross
    class coincidences are undeclared and surface as PrecisionExhausted.
    """

    def __init__(self, symbols=(), digit_cap=256):
        self.symbols = tuple(symbols)
        self.digit_cap = digit_cap
        self._by_name = {s.name: s for s in self.symbols}
        if len(self._by_name) != len(self.symbols):
            raise ValueError("duplicate symbol names")
        self._cache = {}

    def spec(self, name):
        return self._by_name[name]

    def has(self, name):
        return name in self._by_name

    def enclosure(self, name, digits):
        key = (name, digits)
        got = self._cache.get(key)
        if got is None:
            got = self._by_name[name].enclosure(digits)
            self._cache[key] = got
        return got

    def value(self, x):
        """Build an ExponentValue from an int, Fraction, rational string, or
        a declared symbol name."""
        if isinstance(x, ExponentValue):
            if x.basis is not self:
                raise ValueError("value belongs to a different basis")
            return x
        if isinstance(x, str) and x in self._by_name:
            return ExponentValue(self, Fraction(0), ((x, Fraction(1)),))
        return ExponentValue(self, Fraction(x), ())

    def zero(self):
        return ExponentValue(self, Fraction(0), ())

    def symbol(self, name):
        return self.value(name)

    def vector(self, *entries):
        return ExponentVector(tuple(self.value(x) for x in entries))


def default_basis():
    """Basis with pi and e in separate independence classes.

    Models the unrestricted exponent setting: exact rationals plus the
    constants this engine's worked computations actually use.
    """
    return ConstantBasis(
        (
            SymbolSpec("pi", 1, _builtin_enclosure("pi")),
            SymbolSpec("e", 2, _builtin_enclosure("e")),
        )
    )


DEFAULT_BASIS = default_basis()


@dataclass(frozen=True)
class ExponentValue:
    """A point of the exponent line: rational part plus symbol combination.

    Coefficients are stored as Fractions; group generators declared through
    the public interfaces use integer coefficients, while rational
    coefficients appear internally (cell representatives, midpoints).
    """

    basis: ConstantBasis
    rat: Fraction
    coeffs: tuple  # sorted ((name, Fraction), ...) with nonzero Fractions

    def _lift(self, other):
        if isinstance(other, ExponentValue):
            if other.basis is not self.basis:
                raise ValueError("mixed bases")
            return other
        return ExponentValue(self.basis, Fraction(other), ())

    def __add__(self, other):
        o = self._lift(other)
        d = dict(self.coeffs)
        for name, c in o.coeffs:
            d[name] = d.get(name, Fraction(0)) + c
        cleaned = tuple(sorted((n, c) for n, c in d.items() if c != 0))
        return ExponentValue(self.basis, self.rat + o.rat, cleaned)

    __radd__ = __add__

    def __neg__(self):
        return ExponentValue(
            self.basis, -self.rat, tuple((n, -c) for n, c in self.coeffs)
        )

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, scalar):
        s = Fraction(scalar)
        if s == 0:
            return ExponentValue(self.basis, Fraction(0), ())
        return ExponentValue(
            self.basis, self.rat * s, tuple((n, c * s) for n, c in self.coeffs)
        )

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (Fraction(1) / Fraction(scalar))

    def is_zero(self):
        return self.rat == 0 and not self.coeffs

    def is_rational(self):
        return not self.coeffs

    def coeff(self, name):
        for n, c in self.coeffs:
            if n == name:
                return c
        return Fraction(0)

    def enclosure(self, digits):
        lo = hi = self.rat
        for name, c in self.coeffs:
            a, b = self.basis.enclosure(name, digits)
            if c >= 0:
                lo, hi = lo + c * a, hi + c * b
            else:
                lo, hi = lo + c * b, hi + c * a
        return lo, hi

    def sign(self):
        """Exact sign in {-1, 0, 1}; refines enclosures as needed."""
        if self.is_zero():
            return 0
        if not self.coeffs:
            return 1 if self.rat > 0 else -1
        digits = 16
        while digits <= self.basis.digit_cap:
            lo, hi = self.enclosure(digits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            digits *= 2
        raise PrecisionExhausted(
            f"cannot separate {self} from 0 within "
            f"{self.basis.digit_cap} digits; undeclared relation?"
        )

    def __lt__(self, other):
        return compare(self, self._lift(other)) == LESS

    def __le__(self, other):
        return compare(self, self._lift(other)) != GREATER

    def __gt__(self, other):
        return compare(self, self._lift(other)) == GREATER

    def __ge__(self, other):
        return compare(self, self._lift(other)) != LESS

    def __repr__(self):
        parts = []
        if self.rat or not self.coeffs:
            parts.append(str(self.rat))
        for n, c in self.coeffs:
            parts.append(n if c == 1 else f"{c}*{n}")
        return "+".join(parts).replace("+-", "-")

    def to_json(self):
        obj = {}
        if self.rat:
            obj["1"] = str(self.rat)
        for n, c in self.coeffs:
            obj[n] = str(c) if c.denominator != 1 else int(c)
        return obj


def compare(a, b):
    """Trichotomous comparison: LESS, EQUAL, or GREATER.

    Equal iff the formal coefficients agree; otherwise the enclosure of a - b
    is refined (digits doubling, up to the basis cap) until it excludes 0.
    """
    d = a - b
    if d.is_zero():
        return EQUAL
    return d.sign()


def value_min(a, b):
    return a if compare(a, b) != GREATER else b


def value_max(a, b):
    return a if compare(a, b) != LESS else b


@dataclass(frozen=True)
class ExponentVector:
    """A degree in R^n: a fixed-length tuple of exponent values."""

    entries: tuple

    def __post_init__(self):
        if not all(isinstance(e, ExponentValue) for e in self.entries):
            raise TypeError("entries must be ExponentValues")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __add__(self, other):
        return ExponentVector(tuple(x + y for x, y in zip(self.entries, other.entries)))

    def __sub__(self, other):
        return ExponentVector(tuple(x - y for x, y in zip(self.entries, other.entries)))

    def __neg__(self):
        return ExponentVector(tuple(-x for x in self.entries))

    def __mul__(self, scalar):
        return ExponentVector(tuple(x * scalar for x in self.entries))

    __rmul__ = __mul__

    def is_zero(self):
        return all(x.is_zero() for x in self.entries)

    def __repr__(self):
        return "(" + ", ".join(map(repr, self.entries)) + ")"

    def to_json(self):
        return [x.to_json() for x in self.entries]


def is_nonnegative(v):
    return all(x.sign() >= 0 for x in v)


def is_strictly_positive(v):
    return all(x.sign() > 0 for x in v)


def meet(a, b):
    """Coordinatewise minimum; the greatest lower bound of two degrees."""
    return ExponentVector(tuple(value_min(x, y) for x, y in zip(a, b)))


def join(a, b):
    return ExponentVector(tuple(value_max(x, y) for x, y in zip(a, b)))


class ExponentGroup:
    """A finitely generated subgroup of R^n over a constant basis."""

    def __init__(self, n, generators, basis=None):
        self.n = n
        self.generators = tuple(generators)
        for g in self.generators:
            if len(g) != n:
                raise ValueError("generator length mismatch")
        self.basis = basis if basis is not None else (
            self.generators[0][0].basis if self.generators else DEFAULT_BASIS
        )

    # -- symbolic lattice systems -------------------------------------------

    def _symbols_in_coord(self, i, extra=()):
        names = set()
        for g in self.generators:
            names.update(n for n, _ in g[i].coeffs)
        for v in extra:
            names.update(n for n, _ in v[i].coeffs)
        return sorted(names)

    def _system(self, coords, target=None):
        """Integer system A lam = b expressing: sum lam_j gen_j agrees with
        `target` (or vanishes) on the given coordinates, coefficientwise.

        One rational-part row and one row per symbol, per coordinate; rows
        are scaled to integers by the common denominator.
        """
        rows, rhs = [], []
        extra = (target,) if target is not None else ()
        for i in coords:
            for key in ["1"] + self._symbols_in_coord(i, extra):
                if key == "1":
                    coefs = [g[i].rat for g in self.generators]
                    b = target[i].rat if target is not None else Fraction(0)
                else:
                    coefs = [g[i].coeff(key) for g in self.generators]
                    b = target[i].coeff(key) if target is not None else Fraction(0)
                den = 1
                for x in coefs + [b]:
                    den = den * x.denominator // _igcd(den, x.denominator)
                rows.append([int(x * den) for x in coefs])
                rhs.append(int(b * den))
        return rows, rhs

    def member_witness(self, v):
        """Integer coefficients writing v in the generators, or None."""
        if len(v) != self.n:
            raise ValueError("dimension mismatch")
        rows, rhs = self._system(range(self.n), v)
        if not self.generators:
            return [] if all(x == 0 for x in rhs) else None
        return lattice.solve_integer(rows, rhs)

    def is_member(self, v):
        return self.member_witness(v) is not None

    def ray_intersection(self, axis):
        """Generators (as scalar values) of the subgroup of axis points in G.

        Solves the vanishing of all other coordinates as an integer system,
        projects the kernel lattice to the axis, and canonicalizes the
        resulting value lattice by Hermite reduction.
        """
        other = [j for j in range(self.n) if j != axis]
        rows, _ = self._system(other)
        if not self.generators:
            return []
        kern = lattice.kernel_basis(rows) if rows else [
            [1 if i == j else 0 for i in range(len(self.generators))]
            for j in range(len(self.generators))
        ]
        values = []
        for lam in kern:
            val = self.basis.zero()
            for c, g in zip(lam, self.generators):
                if c:
                    val = val + g[axis] * c
            if not val.is_zero():
                values.append(val)
        if not values:
            return []
        names = sorted({n for v in values for n, _ in v.coeffs})
        vecs = [[v.rat] + [v.coeff(n) for n in names] for v in values]
        reduced = lattice.hnf_fractions(vecs)
        out = []
        for row in reduced:
            val = ExponentValue(
                self.basis,
                Fraction(row[0]),
                tuple((n, Fraction(c)) for n, c in zip(names, row[1:]) if c != 0),
            )
            out.append(val)
        return out

    def axis_vector(self, axis, value):
        zero = self.basis.zero()
        return ExponentVector(
            tuple(value if i == axis else zero for i in range(self.n))
        )

    def in_open_cone(self, v):
        """Is v in the open positive cone: every coordinate-ray projection
        strictly positive and itself a member of G?

        Requires v in the nonnegative cone of G (checked; NotInGroup if not).
        """
        if self.member_witness(v) is None:
            raise NotInGroup(f"{v} is not in the group")
        if not is_nonnegative(v):
            raise NotInGroup(f"{v} is not in the positive cone")
        for i in range(self.n):
            if v[i].sign() <= 0:
                return False
            if not self.is_member(self.axis_vector(i, v[i])):
                return False
        return True

    def in_relative_open_cone(self, v, sigma):
        """Open-cone test restricted to the coordinates in sigma: strictly
        positive ray projections in G there, exactly zero elsewhere."""
        if self.member_witness(v) is None:
            raise NotInGroup(f"{v} is not in the group")
        for i in range(self.n):
            if i in sigma:
                if v[i].sign() <= 0:
                    return False
                if not self.is_member(self.axis_vector(i, v[i])):
                    return False
            elif v[i].sign() != 0:
                return False
        return True

    # -- serialization -------------------------------------------------------

    def to_json(self):
        basis_json = []
        for s in self.basis.symbols:
            entry = {"name": s.name, "class": s.cls}
            if s.name not in ("pi", "e"):
                lo, hi = s.enclosure(0)
                entry["lo"], entry["hi"] = str(lo), str(hi)
            basis_json.append(entry)
        return {
            "n": self.n,
            "basis": basis_json,
            "generators": [g.to_json() for g in self.generators],
        }

    @staticmethod
    def from_json(obj):
        symbols = []
        for entry in obj.get("basis", []):
            name = entry["name"]
            cls = int(entry["class"])
            if "lo" in entry:
                enc = _fixed_enclosure(_parse_fraction(entry["lo"]),
                                       _parse_fraction(entry["hi"]))
            elif name in ("pi", "e"):
                enc = _builtin_enclosure(name)
            else:
                raise ValueError(f"symbol {name!r} needs lo/hi bounds")
            symbols.append(SymbolSpec(name, cls, enc))
        basis = ConstantBasis(symbols)
        gens = []
        for gen in obj.get("generators", []):
            gens.append(ExponentVector(tuple(value_from_json(e, basis) for e in gen)))
        return ExponentGroup(int(obj["n"]), gens, basis)


def value_from_json(obj, basis):
    rat = Fraction(0)
    coeffs = []
    for key, raw in obj.items():
        c = _parse_fraction(raw)
        if key == "1":
            rat = c
        else:
            if not basis.has(key):
                raise ValueError(f"unknown symbol {key!r}")
            if c != 0:
                coeffs.append((key, c))
    return ExponentValue(basis, rat, tuple(sorted(coeffs)))


def _parse_fraction(raw):
    if isinstance(raw, int):
        return Fraction(raw)
    s = str(raw)
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    if "." in s or "e" in s.lower():
        from decimal import Decimal

        return Fraction(Decimal(s))
    return Fraction(int(s))


def dense_example_group():
    """The 2d group generated by (2,0), (pi,0), (1,1), (0,e).

    Its intersection with each axis is dense, yet the open cone is a proper
    subset of the positive members: (1,1) projects outside the group.
    """
    b = default_basis()
    gens = (
        b.vector(2, 0),
        ExponentVector((b.symbol("pi"), b.zero())),
        b.vector(1, 1),
        ExponentVector((b.zero(), b.symbol("e"))),
    )
    return ExponentGroup(2, gens, b)


def rational_lattice_group(n, denominator):
    """The full rational lattice (1/denominator) Z^n."""
    b = default_basis()
    step = Fraction(1, denominator)
    gens = []
    for i in range(n):
        gens.append(
            ExponentVector(
                tuple(b.value(step if j == i else 0) for j in range(n))
            )
        )
    return ExponentGroup(n, gens, b)


def _igcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a
