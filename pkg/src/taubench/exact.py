"""Exact arithmetic substrate: Gaussian rationals, truncated series, linear solving.

All coefficients live in Q(i) so that imaginary couplings (i*lambda terms,
the cubic vertex weight i/6) need no special casing anywhere downstream.
Series are multivariate polynomials truncated at a configurable weighted
total degree; arithmetic drops every term whose weighted degree exceeds the
cap, consistently on both sides of products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, InconsistentSystem, RankDeficient

Exponents = tuple[int, ...]


def rational_to_str(q: Fraction) -> str:
    """Serialize p/q, omitting the denominator when it is 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rational_from_str(s: str) -> Fraction:
    return Fraction(s)


def double_factorial(n: int) -> int:
    """Odd double factorial with the convention (-1)!! = 1."""
    if n < -1:
        raise DomainError(f"double factorial undefined for {n}")
    result = 1
    while n > 1:
        result *= n
        n -= 2
    return result


@dataclass(frozen=True)
class GaussianRational:
    """Element of Q(i), always stored with reduced Fraction parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        return GaussianRational(Fraction(value))

    def __add__(self, other):
        other = GaussianRational.of(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.of(other))

    def __rsub__(self, other):
        return GaussianRational.of(other) + (-self)

    def __mul__(self, other):
        other = GaussianRational.of(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.of(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return self * GaussianRational(other.re / norm, -other.im / norm)

    def __rtruediv__(self, other):
        return GaussianRational.of(other) / self

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def is_real(self) -> bool:
        return self.im == 0

    def __str__(self) -> str:
        if self.im == 0:
            return rational_to_str(self.re)
        return f"{rational_to_str(self.re)}+{rational_to_str(self.im)}i"


GR_ZERO = GaussianRational()
GR_ONE = GaussianRational(Fraction(1))
GR_I = GaussianRational(Fraction(0), Fraction(1))


class TruncatedSeries:
    """Multivariate polynomial over Q(i) truncated at a weighted degree cap.

    Terms map exponent tuples (one slot per variable) to nonzero coefficients.
    Two series are compatible when their variable names, weights and cap agree.
    """

    __slots__ = ("variables", "weights", "cap", "terms")

    def __init__(
        self,
        variables: Sequence[str],
        weights: Sequence[int],
        cap: int,
        terms: Mapping[Exponents, GaussianRational] | None = None,
    ):
        if len(variables) != len(weights):
            raise DomainError("variables and weights must have equal length")
        if any(w <= 0 for w in weights):
            raise DomainError("weights must be positive")
        self.variables = tuple(variables)
        self.weights = tuple(weights)
        self.cap = int(cap)
        clean: dict[Exponents, GaussianRational] = {}
        if terms:
            for expo, coeff in terms.items():
                coeff = GaussianRational.of(coeff)
                if not coeff:
                    continue
                expo = tuple(expo)
                if len(expo) != len(self.variables):
                    raise DomainError("exponent tuple has wrong arity")
                if self.degree_of(expo) <= self.cap:
                    clean[expo] = coeff
        self.terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, variables, weights, cap) -> "TruncatedSeries":
        return cls(variables, weights, cap)

    @classmethod
    def constant(cls, variables, weights, cap, value) -> "TruncatedSeries":
        zero_expo = (0,) * len(variables)
        return cls(variables, weights, cap, {zero_expo: GaussianRational.of(value)})

    @classmethod
    def variable(cls, variables, weights, cap, name) -> "TruncatedSeries":
        idx = list(variables).index(name)
        expo = tuple(1 if i == idx else 0 for i in range(len(variables)))
        return cls(variables, weights, cap, {expo: GR_ONE})

    # -- structure ----------------------------------------------------

    def degree_of(self, expo: Exponents) -> int:
        return sum(e * w for e, w in zip(expo, self.weights))

    def compatible(self, other: "TruncatedSeries") -> bool:
        return (
            self.variables == other.variables
            and self.weights == other.weights
            and self.cap == other.cap
        )

    def _require_compatible(self, other):
        if not self.compatible(other):
            raise DomainError("incompatible series (variables/weights/cap differ)")

    def coefficient(self, expo: Iterable[int]) -> GaussianRational:
        return self.terms.get(tuple(expo), GR_ZERO)

    def constant_term(self) -> GaussianRational:
        return self.coefficient((0,) * len(self.variables))

    def is_zero(self) -> bool:
        return not self.terms

    def min_degree(self) -> int:
        if not self.terms:
            return self.cap + 1
        return min(self.degree_of(e) for e in self.terms)

    def with_cap(self, cap: int) -> "TruncatedSeries":
        return TruncatedSeries(self.variables, self.weights, cap, self.terms)

    def homogeneous_part(self, degree: int) -> "TruncatedSeries":
        return TruncatedSeries(
            self.variables,
            self.weights,
            self.cap,
            {e: c for e, c in self.terms.items() if self.degree_of(e) == degree},
        )

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.variables, self.weights, self.cap, other)
        self._require_compatible(other)
        terms = dict(self.terms)
        for expo, coeff in other.terms.items():
            acc = terms.get(expo, GR_ZERO) + coeff
            if acc:
                terms[expo] = acc
            else:
                terms.pop(expo, None)
        return TruncatedSeries(self.variables, self.weights, self.cap, terms)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(
            self.variables, self.weights, self.cap,
            {e: -c for e, c in self.terms.items()},
        )

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.variables, self.weights, self.cap, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, value) -> "TruncatedSeries":
        value = GaussianRational.of(value)
        if not value:
            return TruncatedSeries.zero(self.variables, self.weights, self.cap)
        return TruncatedSeries(
            self.variables, self.weights, self.cap,
            {e: c * value for e, c in self.terms.items()},
        )

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._require_compatible(other)
        terms: dict[Exponents, GaussianRational] = {}
        degrees_b = {e: other.degree_of(e) for e in other.terms}
        for ea, ca in self.terms.items():
            da = self.degree_of(ea)
            for eb, cb in other.terms.items():
                if da + degrees_b[eb] > self.cap:
                    continue
                expo = tuple(x + y for x, y in zip(ea, eb))
                acc = terms.get(expo, GR_ZERO) + ca * cb
                if acc:
                    terms[expo] = acc
                else:
                    terms.pop(expo, None)
        return TruncatedSeries(self.variables, self.weights, self.cap, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise DomainError("negative powers are not defined for series")
        result = TruncatedSeries.constant(self.variables, self.weights, self.cap, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedSeries)
            and self.compatible(other)
            and self.terms == other.terms
        )

    def __repr__(self):
        if not self.terms:
            return "<series 0>"
        bits = []
        for expo in sorted(self.terms):
            mono = "*".join(
                f"{v}^{e}" if e > 1 else v
                for v, e in zip(self.variables, expo)
                if e
            )
            bits.append(f"({self.terms[expo]}){('*' + mono) if mono else ''}")
        return "<series " + " + ".join(bits) + ">"

    # -- calculus -----------------------------------------------------

    def diff(self, name: str, order: int = 1) -> "TruncatedSeries":
        """Exact partial derivative; reliable to cap - order*weight(name)."""
        if order < 0:
            raise DomainError("derivative order must be >= 0")
        if name not in self.variables:
            raise DomainError(f"unknown variable {name!r}")
        idx = self.variables.index(name)
        terms = dict(self.terms)
        for _ in range(order):
            nxt: dict[Exponents, GaussianRational] = {}
            for expo, coeff in terms.items():
                k = expo[idx]
                if k == 0:
                    continue
                new = list(expo)
                new[idx] = k - 1
                nxt[tuple(new)] = coeff * k
            terms = nxt
        return TruncatedSeries(self.variables, self.weights, self.cap, terms)

    def exp(self) -> "TruncatedSeries":
        """exp of a series with zero constant term, truncated at cap."""
        if self.constant_term():
            raise DomainError("series_exp requires zero constant term")
        result = TruncatedSeries.constant(self.variables, self.weights, self.cap, 1)
        if self.is_zero():
            return result
        power = result
        kmax = self.cap // max(1, self.min_degree())
        factorial = 1
        for k in range(1, kmax + 1):
            power = power * self
            factorial *= k
            result = result + power.scale(Fraction(1, factorial))
        return result

    def log(self) -> "TruncatedSeries":
        """log of a series with constant term 1, truncated at cap."""
        c0 = self.constant_term()
        if c0 != GR_ONE:
            raise DomainError("series_log requires constant term 1")
        u = self - 1
        result = TruncatedSeries.zero(self.variables, self.weights, self.cap)
        if u.is_zero():
            return result
        power = TruncatedSeries.constant(self.variables, self.weights, self.cap, 1)
        kmax = self.cap // max(1, u.min_degree())
        for k in range(1, kmax + 1):
            power = power * u
            result = result + power.scale(Fraction((-1) ** (k + 1), k))
        return result

    # -- serialization ------------------------------------------------

    def to_json(self) -> list[dict]:
        out = []
        for expo in sorted(self.terms):
            coeff = self.terms[expo]
            out.append(
                {
                    "exponents": list(expo),
                    "coeff_re": rational_to_str(coeff.re),
                    "coeff_im": rational_to_str(coeff.im),
                }
            )
        return out

    @classmethod
    def from_json(cls, variables, weights, cap, payload) -> "TruncatedSeries":
        terms = {}
        for item in payload:
            terms[tuple(item["exponents"])] = GaussianRational(
                rational_from_str(item["coeff_re"]),
                rational_from_str(item["coeff_im"]),
            )
        return cls(variables, weights, cap, terms)


def series_exp(s: TruncatedSeries) -> TruncatedSeries:
    return s.exp()


def series_log(s: TruncatedSeries) -> TruncatedSeries:
    return s.log()


def apply_diff(s: TruncatedSeries, name: str, order: int = 1) -> TruncatedSeries:
    return s.diff(name, order)


def t_variables(max_index: int, cap: int):
    """Variable family t_0..t_K, all of weight 1 (KdV grading)."""
    names = tuple(f"t{i}" for i in range(max_index + 1))
    return names, (1,) * len(names), cap


def x_variables(max_index: int, cap: int):
    """Variable family x_1..x_K with weight(x_j) = j (Fock grading)."""
    names = tuple(f"x{j}" for j in range(1, max_index + 1))
    return names, tuple(range(1, max_index + 1)), cap


# ---------------------------------------------------------------------------
# Exact linear algebra over Q
# ---------------------------------------------------------------------------


@dataclass
class ExactMatrix:
    """Dense matrix of Fractions with shape checking."""

    entries: list[list[Fraction]]

    def __post_init__(self):
        rows = self.entries
        self.entries = [[Fraction(x) for x in row] for row in rows]
        widths = {len(row) for row in self.entries}
        if len(widths) > 1:
            raise DomainError("ragged matrix")

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0


def solve_linear_exact(a: ExactMatrix, y: Sequence[Fraction]) -> list[Fraction]:
    """Solve A x = y exactly; the system may be overdetermined but consistent.

    Raises InconsistentSystem (with the offending residual) when no solution
    exists and RankDeficient when the solution is not unique.
    """
    if a.rows != len(y):
        raise DomainError("right-hand side length mismatch")
    m, n = a.rows, a.cols
    aug = [list(row) + [Fraction(y[i])] for i, row in enumerate(a.entries)]
    pivot_cols: list[int] = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                factor = aug[i][c]
                aug[i] = [x - factor * p for x, p in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n] != 0:
            raise InconsistentSystem(
                "no exact solution", residual=aug[i][n]
            )
    if len(pivot_cols) < n:
        raise RankDeficient(f"rank {len(pivot_cols)} < {n} unknowns")
    solution = [Fraction(0)] * n
    for i, c in enumerate(pivot_cols):
        solution[c] = aug[i][n]
    # exact residual audit for the overdetermined rows
    for i, row in enumerate(a.entries):
        lhs = sum((row[j] * solution[j] for j in range(n)), Fraction(0))
        if lhs != Fraction(y[i]):
            raise InconsistentSystem("nonzero residual", residual=lhs - Fraction(y[i]))
    return solution


def rational_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank of a matrix over Q by fraction-free-ish elimination."""
    mat = [list(map(Fraction, row)) for row in rows]
    if not mat or not mat[0]:
        return 0
    m, n = len(mat), len(mat[0])
    rank = 0
    for c in range(n):
        pivot = next((i for i in range(rank, m) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        pv = mat[rank][c]
        for i in range(rank + 1, m):
            if mat[i][c] != 0:
                factor = mat[i][c] / pv
                mat[i] = [x - factor * p for x, p in zip(mat[i], mat[rank])]
        rank += 1
        if rank == m:
            break
    return rank


def binomial(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)
