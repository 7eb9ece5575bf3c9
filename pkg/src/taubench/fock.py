"""Heisenberg/Virasoro operators on a truncated Fock space, exactly.

Two operator families live here:

- the oscillator representation on C[x_1, x_2, ...] with a_n = d/dx_n,
  a_{-n} = hbar n x_n, a_0 = mu, and L_k built from the quadratic a-form
  (central charge 1 + 12 lambda^2);
- the target-manifold family L_n, n >= -1, built literally from the printed
  display: a t d-block with C^(j) coefficients, a second-derivative block
  with D^(j) coefficients, and a t.t block, over cohomology data
  (eta, nilpotent C, b_alpha, independent b^alpha).

Everything is exact over Gaussian rationals; i*lambda terms use the
imaginary unit of the coefficient field.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    DomainError,
    InsufficientCap,
    PoleError,
    TruncationError,
)
from .exact import (
    GR_I,
    GaussianRational,
    TruncatedSeries,
    rational_rank,
    x_variables,
)

# ---------------------------------------------------------------------------
# Oscillator representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OscillatorParams:
    hbar: Fraction = Fraction(1)
    mu: Fraction = Fraction(0)
    lambda_param: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "hbar", Fraction(self.hbar))
        object.__setattr__(self, "mu", Fraction(self.mu))
        object.__setattr__(self, "lambda_param", Fraction(self.lambda_param))


def fock_space(cap: int):
    """Variable family x_1..x_cap with weight(x_j) = j."""
    return x_variables(cap, cap)


def _max_weight(p: TruncatedSeries) -> int:
    return max((p.degree_of(e) for e in p.terms), default=0)


def heisenberg_apply(n: int, p: TruncatedSeries, params: OscillatorParams) -> TruncatedSeries:
    """a_n p with a_n = d/dx_n (n>0), a_{-n} = hbar n x_n, a_0 = mu."""
    k = len(p.variables)
    if n == 0:
        return p.scale(params.mu)
    if n > 0:
        if n > k:
            return TruncatedSeries.zero(p.variables, p.weights, p.cap)
        return p.diff(f"x{n}")
    j = -n
    if p.is_zero():
        return p
    if j > p.cap or _max_weight(p) + j > p.cap:
        raise TruncationError(f"multiplying by x_{j} would exceed cap {p.cap}")
    xj = TruncatedSeries.variable(p.variables, p.weights, p.cap, f"x{j}")
    return (xj * p).scale(params.hbar * j)


def oscillator_virasoro_apply(
    k: int, p: TruncatedSeries, params: OscillatorParams
) -> TruncatedSeries:
    """L_0 = (mu^2 + lambda^2)/2 + sum_{j>0} a_{-j} a_j;
    L_k = (1/2) sum_{j in Z} a_{-j} a_{j+k} + i lambda k a_k for k != 0."""
    mu, lam = params.mu, params.lambda_param
    if k == 0:
        result = p.scale(Fraction(mu * mu + lam * lam, 2))
        for j in range(1, p.cap + 1):
            result = result + heisenberg_apply(-j, heisenberg_apply(j, p, params), params)
        return result
    result = heisenberg_apply(k, p, params).scale(GR_I * lam * k)
    for j in range(-(p.cap + abs(k)), p.cap + abs(k) + 1):
        left, right = -j, j + k
        # the factors commute (k != 0); apply lowering operators first so
        # intermediate weights never exceed the final weight
        q = p
        for idx in sorted((left, right), reverse=True):
            q = heisenberg_apply(idx, q, params)
            if q.is_zero():
                break
        if not q.is_zero():
            result = result + q.scale(Fraction(1, 2))
    return result


def oscillator_commutator_check(
    m: int, n: int, params: OscillatorParams, safe_cap: int = 10
) -> dict:
    """Sweep ([L_m, L_n] - (m-n) L_{m+n} - central) p over the guarded window.

    Window: basis monomials of weight <= safe_cap - |m| - |n| - max(|m|,|n|),
    so no intermediate application can silently truncate.
    """
    names, weights, cap = fock_space(safe_cap)
    bound = safe_cap - abs(m) - abs(n) - max(abs(m), abs(n))
    window = list(_weight_monomials(len(names), weights, bound))
    if not window:
        raise InsufficientCap(f"no monomials of weight <= {bound}")
    lam = params.lambda_param
    central = Fraction(0)
    if m == -n:
        central = (1 + 12 * lam * lam) * Fraction(m**3 - m, 12)
    failures = []
    for expo in window:
        p = TruncatedSeries(names, weights, cap, {expo: GaussianRational.of(1)})
        lhs = oscillator_virasoro_apply(
            m, oscillator_virasoro_apply(n, p, params), params
        ) - oscillator_virasoro_apply(n, oscillator_virasoro_apply(m, p, params), params)
        rhs = oscillator_virasoro_apply(m + n, p, params).scale(m - n) + p.scale(central)
        residual = lhs - rhs
        if not residual.is_zero():
            failures.append({"monomial": list(expo), "residual": repr(residual)})
    return {
        "m": m,
        "n": n,
        "lambda": str(lam),
        "central_charge": str(1 + 12 * lam * lam),
        "window_size": len(window),
        "all_zero": not failures,
        "failures": failures,
    }


def _weight_monomials(arity: int, weights: Sequence[int], bound: int):
    """All exponent tuples with weighted degree <= bound (includes 1)."""

    def rec(idx, remaining, prefix):
        if idx == arity:
            yield tuple(prefix)
            return
        w = weights[idx]
        for e in range(remaining // w + 1):
            yield from rec(idx + 1, remaining - e * w, prefix + [e])

    if bound < 0:
        return
    yield from rec(0, bound, [])


def bm_display_apply(
    k: int, p: TruncatedSeries, params: OscillatorParams
) -> TruncatedSeries:
    """The printed closed-form display for L_k on B^(m):
    (1/2) sum_j j x_j d/dx_{j+k} plus i lambda k d/dx_k (k > 0) or
    i lambda k^2 x_k (k < 0); reproduced verbatim for diffing against the
    a-form, not for assertions."""
    lam = params.lambda_param
    if k == 0:
        result = p.scale(Fraction(params.mu**2 + lam * lam, 2))
        for j in range(1, p.cap + 1):
            xj = TruncatedSeries.variable(p.variables, p.weights, p.cap, f"x{j}")
            result = result + (xj * p.diff(f"x{j}")).scale(j)
        return result
    result = TruncatedSeries.zero(p.variables, p.weights, p.cap)
    for j in range(1, p.cap + 1):
        if j + k < 1 or j + k > p.cap:
            continue
        d = p.diff(f"x{j + k}")
        if d.is_zero():
            continue
        xj = TruncatedSeries.variable(p.variables, p.weights, p.cap, f"x{j}")
        result = result + (xj * d).scale(Fraction(j, 2))
    if k > 0:
        if k <= p.cap:
            result = result + p.diff(f"x{k}").scale(GR_I * lam * k)
    else:
        xk = TruncatedSeries.variable(p.variables, p.weights, p.cap, f"x{-k}")
        result = result + (xk * p).scale(GR_I * lam * k * k)
    return result


def bm_display_diff_report(params: OscillatorParams, cap: int = 8, k_range=(-2, -1, 1, 2)) -> dict:
    """Diff the printed B^(m) display against the a-form on a window."""
    names, weights, series_cap = fock_space(cap)
    out = {"cap": cap, "entries": []}
    for k in k_range:
        bound = cap - 2 * abs(k)
        for expo in _weight_monomials(len(names), weights, max(bound, 0)):
            p = TruncatedSeries(names, weights, series_cap, {expo: GaussianRational.of(1)})
            a_form = oscillator_virasoro_apply(k, p, params)
            printed = bm_display_apply(k, p, params)
            diff = a_form - printed
            out["entries"].append(
                {
                    "k": k,
                    "monomial": list(expo),
                    "agree": diff.is_zero(),
                    "difference": repr(diff),
                }
            )
    out["all_agree"] = all(e["agree"] for e in out["entries"])
    return out


# ---------------------------------------------------------------------------
# Vertex operator
# ---------------------------------------------------------------------------


def vertex_operator_apply(
    p: TruncatedSeries, u_order: int, v_order: int
) -> dict[tuple[int, int], TruncatedSeries]:
    """Coefficients of u^a v^b in Gamma(u, v) p, where
    Gamma = exp(sum_j (u^j - v^j) x_j) exp(-sum_j ((u^-j - v^-j)/j) d_j).

    Returns every (a, b) with a <= u_order and b <= v_order; negative powers
    come only from the derivative factor and are bounded by the weight of p,
    so all returned coefficients are complete (internal expansion overshoots
    by that weight).
    """
    if u_order < 0 or v_order < 0:
        raise DomainError("expansion orders must be nonnegative")
    cap = p.cap
    margin = _max_weight(p)
    zero = TruncatedSeries.zero(p.variables, p.weights, cap)

    def add(d, key, series):
        if series.is_zero():
            return
        acc = d.get(key, zero) + series
        if acc.is_zero():
            d.pop(key, None)
        else:
            d[key] = acc

    # derivative factor, exp of a nilpotent operator on the polynomial p
    lower: dict[tuple[int, int], TruncatedSeries] = {(0, 0): p}
    term = {(0, 0): p}
    s = 0
    while term:
        nxt: dict[tuple[int, int], TruncatedSeries] = {}
        for (a, b), series in term.items():
            for j in range(1, len(p.variables) + 1):
                d = series.diff(f"x{j}")
                if d.is_zero():
                    continue
                add(nxt, (a - j, b), d.scale(Fraction(-1, j)))
                add(nxt, (a, b - j), d.scale(Fraction(1, j)))
        s += 1
        term = {key: series.scale(Fraction(1, s)) for key, series in nxt.items()}
        for key, series in term.items():
            add(lower, key, series)

    # multiplication factor exp(sum_j (u^j - v^j) x_j), expanded past the
    # requested orders by the weight of p so sums below are complete
    u_hi, v_hi = u_order + margin, v_order + margin
    raise_ops = []
    for j in range(1, min(cap, max(u_hi, v_hi)) + 1):
        xj = TruncatedSeries.variable(p.variables, p.weights, cap, f"x{j}")
        if j <= u_hi:
            raise_ops.append(((j, 0), xj))
        if j <= v_hi:
            raise_ops.append(((0, j), xj.scale(-1)))
    one = TruncatedSeries.constant(p.variables, p.weights, cap, 1)
    upper: dict[tuple[int, int], TruncatedSeries] = {(0, 0): one}
    term = {(0, 0): one}
    s = 0
    while term:
        nxt = {}
        for (a, b), series in term.items():
            for (da, db), op in raise_ops:
                if a + da > u_hi or b + db > v_hi:
                    continue
                prod = op * series
                if not prod.is_zero():
                    add(nxt, (a + da, b + db), prod)
        s += 1
        term = {key: series.scale(Fraction(1, s)) for key, series in nxt.items()}
        for key, series in term.items():
            add(upper, key, series)

    out: dict[tuple[int, int], TruncatedSeries] = {}
    for (a1, b1), s1 in upper.items():
        for (a2, b2), s2 in lower.items():
            key = (a1 + a2, b1 + b2)
            if key[0] > u_order or key[1] > v_order:
                continue
            add(out, key, s1 * s2)
    return out


def vertex_diagonal_resum(
    coeffs: dict[tuple[int, int], TruncatedSeries], total: int, like: TruncatedSeries
) -> TruncatedSeries:
    """Coefficient of u^total after setting v = u in an expansion."""
    acc = TruncatedSeries.zero(like.variables, like.weights, like.cap)
    for (a, b), series in coeffs.items():
        if a + b == total:
            acc = acc + series
    return acc


# ---------------------------------------------------------------------------
# C and D coefficient machinery
# ---------------------------------------------------------------------------


def _elementary_symmetric_reciprocals(j: int, lows: list[Fraction]) -> Fraction:
    """e_j of the reciprocals 1/v over the given values."""
    total = Fraction(0)
    for combo in itertools.combinations(lows, j):
        prod = Fraction(1)
        for v in combo:
            prod /= v
        total += prod
    return total


def coeff_C(j: int, m: int, n: int, b: Fraction) -> Fraction:
    """prod_{l=m}^{m+n} (b+l) / prod_{k=1}^{n} (m+k) times the elementary
    symmetric sum of j reciprocals 1/(b+l) over l in [m, m+n]."""
    if n < 1 or j < 0:
        raise DomainError("need n >= 1 and j >= 0")
    if j > n + 1:
        return Fraction(0)
    b = Fraction(b)
    values = [b + l for l in range(m, m + n + 1)]
    if j >= 1 and any(v == 0 for v in values):
        raise PoleError(f"b + l vanishes on [{m}, {m + n}]")
    denom = Fraction(1)
    for k in range(1, n + 1):
        if m + k == 0:
            raise PoleError("vanishing (m+k) factor in the denominator")
        denom *= m + k
    prefactor = Fraction(1)
    for v in values:
        prefactor *= v
    prefactor /= denom
    return prefactor * _elementary_symmetric_reciprocals(j, values)


def coeff_D(j: int, m: int, n: int, b_low: Fraction, b_high: Fraction) -> Fraction:
    """[prod_{l=0}^{m} (bHigh+l)] [prod_{l=0}^{n-m-1} (bLow+l)] /
    (m! max(0, n-m-1)!) times the elementary symmetric sum of j reciprocals
    1/(bLow + l) over l in [-m, n-m-1]; empty products are 1."""
    if j < 0 or m < 0:
        raise DomainError("need j >= 0 and m >= 0")
    b_low, b_high = Fraction(b_low), Fraction(b_high)
    window = [b_low + l for l in range(-m, n - m)]  # l in [-m, n-m-1]
    if j >= 1:
        if not window:
            return Fraction(0)
        if any(v == 0 for v in window):
            raise PoleError("bLow + l vanishes on the index window")
        if j > len(window):
            return Fraction(0)
    prefactor = Fraction(1)
    for l in range(0, m + 1):
        prefactor *= b_high + l
    for l in range(0, n - m):  # l in [0, n-m-1], empty when n-m-1 < 0
        prefactor *= b_low + l
    fact = Fraction(1)
    for k in range(2, m + 1):
        fact *= k
    for k in range(2, max(0, n - m - 1) + 1):
        fact *= k
    prefactor /= fact
    return prefactor * _elementary_symmetric_reciprocals(j, window)


def cd_identity_check(
    j_values: Sequence[int],
    m_values: Sequence[int],
    n_values: Sequence[int],
    n1_values: Sequence[int],
    b_samples: Sequence[tuple[Fraction, Fraction]],
) -> dict:
    """Evaluate both printed coefficient identities on a sample grid.

    The printed right-hand sides carry a free index j1 that is bound on the
    left and a stray k; conventions used here (documented, not repaired):
    matrix factors are dropped (scalar reading), j1 := 0 on the right, and
    k := m.  The report records pass/fail and exact discrepancies per tuple;
    report generation, not identity truth, is the contract.
    """
    entries = []
    for j, m, n, n1, (b_low, b_high) in itertools.product(
        j_values, m_values, n_values, n1_values, b_samples
    ):
        for which in (1, 2):
            try:
                if which == 1:
                    # sum_{j1} C^(j-j1)(m, n1) C^(j1)(m+n1-j1, n)
                    lhs = Fraction(0)
                    for j1 in range(j + 1):
                        lhs += coeff_C(j - j1, m, n1, b_low) * coeff_C(
                            j1, m + n1 - j1, n, b_low
                        )
                    rhs = (b_low + m + n1) * coeff_C(j, m, n1 + n, b_low)
                    if j >= 1:
                        rhs += (m + n + n1 - j + 1) * coeff_C(j - 1, m, n1 + n, b_low)
                else:
                    # sum_{j1} D^(j-j1)(m, n) C^(j1)(n-m-j+j1, n1)
                    lhs = Fraction(0)
                    for j1 in range(j + 1):
                        lhs += coeff_D(j - j1, m, n, b_low, b_high) * coeff_C(
                            j1, n - m - j + j1, n1, b_low
                        )
                    rhs = (b_low + n - m - 1) * coeff_D(j, m, n + n1, b_low, b_high)
                    if j >= 1:
                        rhs += (n + n1 - m - j) * coeff_D(
                            j - 1, m, n + n1, b_low, b_high
                        )
            except PoleError as exc:
                entries.append(
                    {
                        "identity": which,
                        "j": j, "m": m, "n": n, "n1": n1,
                        "b_low": str(b_low), "b_high": str(b_high),
                        "status": "pole_excluded",
                        "detail": str(exc),
                    }
                )
                continue
            except DomainError as exc:
                entries.append(
                    {
                        "identity": which,
                        "j": j, "m": m, "n": n, "n1": n1,
                        "b_low": str(b_low), "b_high": str(b_high),
                        "status": "out_of_domain",
                        "detail": str(exc),
                    }
                )
                continue
            entries.append(
                {
                    "identity": which,
                    "j": j, "m": m, "n": n, "n1": n1,
                    "b_low": str(b_low), "b_high": str(b_high),
                    "status": "pass" if lhs == rhs else "fail",
                    "lhs": str(lhs),
                    "rhs": str(rhs),
                    "discrepancy": str(lhs - rhs),
                }
            )
    counts = {"pass": 0, "fail": 0, "pole_excluded": 0, "out_of_domain": 0}
    for e in entries:
        counts[e["status"]] += 1
    return {"counts": counts, "entries": entries}


# ---------------------------------------------------------------------------
# Target-manifold Virasoro operators
# ---------------------------------------------------------------------------


@dataclass
class CohomologyData:
    """eta pairing, nilpotent C matrix, b_alpha, and independent b^alpha."""

    eta: list[list[Fraction]]
    cmat: list[list[Fraction]]
    b: list[Fraction]
    b_raised: list[Fraction]

    def __post_init__(self):
        self.eta = [[Fraction(x) for x in row] for row in self.eta]
        self.cmat = [[Fraction(x) for x in row] for row in self.cmat]
        self.b = [Fraction(x) for x in self.b]
        self.b_raised = [Fraction(x) for x in self.b_raised]
        self.validate()

    @property
    def dim(self) -> int:
        return len(self.eta)

    def validate(self) -> None:
        d = self.dim
        if any(len(row) != d for row in self.eta) or len(self.cmat) != d:
            raise DomainError("eta and C must be square of equal size")
        if any(len(row) != d for row in self.cmat):
            raise DomainError("C must be square")
        if len(self.b) != d or len(self.b_raised) != d:
            raise DomainError("b vectors must have length dim")
        for i in range(d):
            for k in range(d):
                if self.eta[i][k] != self.eta[k][i]:
                    raise DomainError("eta must be symmetric")
        if rational_rank(self.eta) != d:
            raise DomainError("eta must be invertible")
        if any(x for row in self.matrix_power(d) for x in row):
            raise DomainError("C must be nilpotent (C^dim = 0)")

    def matrix_power(self, j: int) -> list[list[Fraction]]:
        d = self.dim
        out = [[Fraction(i == k) for k in range(d)] for i in range(d)]
        for _ in range(j):
            out = [
                [
                    sum((out[i][l] * self.cmat[l][k] for l in range(d)), Fraction(0))
                    for k in range(d)
                ]
                for i in range(d)
            ]
        return out

    def eta_inverse(self) -> list[list[Fraction]]:
        d = self.dim
        aug = [list(map(Fraction, self.eta[i])) + [Fraction(i == k) for k in range(d)] for i in range(d)]
        for c in range(d):
            pivot = next(i for i in range(c, d) if aug[i][c] != 0)
            aug[c], aug[pivot] = aug[pivot], aug[c]
            pv = aug[c][c]
            aug[c] = [x / pv for x in aug[c]]
            for i in range(d):
                if i != c and aug[i][c]:
                    f = aug[i][c]
                    aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
        return [row[d:] for row in aug]

    def to_json(self) -> dict:
        from .exact import rational_to_str as r

        return {
            "eta": [[r(x) for x in row] for row in self.eta],
            "cmat": [[r(x) for x in row] for row in self.cmat],
            "b": [r(x) for x in self.b],
            "b_raised": [r(x) for x in self.b_raised],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "CohomologyData":
        return cls(
            eta=[[Fraction(x) for x in row] for row in payload["eta"]],
            cmat=[[Fraction(x) for x in row] for row in payload["cmat"]],
            b=[Fraction(x) for x in payload["b"]],
            b_raised=[Fraction(x) for x in payload["b_raised"]],
        )


def point_target_data() -> CohomologyData:
    """dim 1, eta = (1), C = (0); b_alpha = q_alpha - (dim M - 1)/2 = 1/2.

    b^alpha = 1/2 as well, which satisfies the printed closure condition
    (1/4) sum b^a b_a = 1/16 for the point target (Euler characteristic 1,
    vanishing first-Chern integral)."""
    return CohomologyData(
        eta=[[Fraction(1)]],
        cmat=[[Fraction(0)]],
        b=[Fraction(1, 2)],
        b_raised=[Fraction(1, 2)],
    )


def t_var(m: int, alpha: int) -> str:
    return f"t{m}a{alpha}"


def target_space(data: CohomologyData, max_m: int, cap: int):
    """Variables t^alpha_m with weight m + 1."""
    names = tuple(t_var(m, a) for m in range(max_m + 1) for a in range(data.dim))
    weights = tuple(m + 1 for m in range(max_m + 1) for _ in range(data.dim))
    return names, weights, cap


@dataclass(frozen=True)
class OperatorExpr:
    """Finite sum of scalar * (t-monomial) * (derivative-monomial) terms.

    Monomials are sorted tuples of variable names; derivatives act first.
    """

    terms: tuple[tuple[GaussianRational, tuple[str, ...], tuple[str, ...]], ...]

    @classmethod
    def build(cls, raw) -> "OperatorExpr":
        combined: dict[tuple[tuple[str, ...], tuple[str, ...]], GaussianRational] = {}
        for scalar, tmono, dmono in raw:
            scalar = GaussianRational.of(scalar)
            if not scalar:
                continue
            key = (tuple(sorted(tmono)), tuple(sorted(dmono)))
            acc = combined.get(key)
            acc = scalar if acc is None else acc + scalar
            if acc:
                combined[key] = acc
            else:
                combined.pop(key, None)
        return cls(
            tuple(
                (combined[key], key[0], key[1]) for key in sorted(combined)
            )
        )

    def apply(self, p: TruncatedSeries) -> TruncatedSeries:
        result = TruncatedSeries.zero(p.variables, p.weights, p.cap)
        for scalar, tmono, dmono in self.terms:
            q = p
            for name in dmono:
                if name not in p.variables:
                    q = TruncatedSeries.zero(p.variables, p.weights, p.cap)
                    break
                q = q.diff(name)
                if q.is_zero():
                    break
            if q.is_zero():
                continue
            for name in tmono:
                if name not in p.variables:
                    raise DomainError(f"operator variable {name} outside family")
                if _max_weight(q) + p.weights[p.variables.index(name)] > p.cap:
                    raise TruncationError("operator application exceeds the cap")
                q = q * TruncatedSeries.variable(p.variables, p.weights, p.cap, name)
            result = result + q.scale(scalar)
        return result

    def __sub__(self, other: "OperatorExpr") -> "OperatorExpr":
        return OperatorExpr.build(
            list(self.terms) + [(-s, t, d) for s, t, d in other.terms]
        )


def target_virasoro_build(
    data: CohomologyData,
    n: int,
    max_m: int,
    lam: Fraction = Fraction(1),
) -> OperatorExpr:
    """L_n, n >= -1, literally as printed; lam is the genus parameter."""
    if n < -1:
        raise DomainError("target operators are defined for n >= -1")
    d = data.dim
    big_n = d - 1  # the printed N, with dim = N + 1
    lam2 = Fraction(lam) ** 2
    inv2lam2 = Fraction(1, 2) / lam2
    raw = []
    if n == -1:
        for alpha in range(d):
            for m in range(1, max_m + 1):
                raw.append((Fraction(m), (t_var(m, alpha),), (t_var(m - 1, alpha),)))
        for alpha in range(d):
            for beta in range(d):
                if data.eta[alpha][beta]:
                    raw.append(
                        (
                            inv2lam2 * data.eta[alpha][beta],
                            (t_var(0, alpha), t_var(0, beta)),
                            (),
                        )
                    )
        return OperatorExpr.build(raw)
    if n == 0:
        for alpha in range(d):
            for m in range(max_m + 1):
                raw.append(((m + data.b[alpha]), (t_var(m, alpha),), (t_var(m, alpha),)))
        for alpha in range(big_n):  # alpha in [0, N-1]
            for m in range(1, max_m + 1):
                raw.append(
                    (
                        Fraction((big_n + 1) * m),
                        (t_var(m, alpha),),
                        (t_var(m - 1, alpha + 1),),
                    )
                )
        for alpha in range(big_n):
            for gamma in range(d):
                if data.eta[alpha + 1][gamma]:
                    raw.append(
                        (
                            inv2lam2 * (big_n - 1) * data.eta[alpha + 1][gamma],
                            (t_var(0, alpha), t_var(0, gamma)),
                            (),
                        )
                    )
        raw.append(
            (
                Fraction(-(big_n - 1) * (big_n + 1) * (big_n + 3), 48),
                (),
                (),
            )
        )
        return OperatorExpr.build(raw)
    # n >= 1
    eta_inv = data.eta_inverse()
    powers = {j: data.matrix_power(j) for j in range(0, d + n + 2)}
    for j in range(0, min(n + 1, d - 1) + 1):
        cj = powers[j]
        if not any(x for row in cj for x in row):
            continue
        for alpha in range(d):
            for beta in range(d):
                if not cj[alpha][beta]:
                    continue
                # t d block
                for m in range(max_m + 1):
                    target = m + n - j
                    if 0 <= target <= max_m:
                        raw.append(
                            (
                                coeff_C(j, m, n, data.b[alpha]) * cj[alpha][beta],
                                (t_var(m, alpha),),
                                (t_var(target, beta),),
                            )
                        )
                # d d block: (lam^2/2) D^(j)(m, n) d^alpha_m d_{n-m-j-1, beta}
                for m in range(0, n - j):
                    target = n - m - j - 1
                    if target < 0 or target > max_m or m > max_m:
                        continue
                    dval = coeff_D(j, m, n, data.b[alpha], data.b_raised[alpha])
                    if not dval:
                        continue
                    for gamma in range(d):
                        if eta_inv[alpha][gamma]:
                            raw.append(
                                (
                                    lam2 / 2 * dval * cj[alpha][beta] * eta_inv[alpha][gamma],
                                    (),
                                    (t_var(m, gamma), t_var(target, beta)),
                                )
                            )
    cn1 = data.matrix_power(n + 1)
    for alpha in range(d):
        for beta in range(d):
            if not cn1[alpha][beta]:
                continue
            for gamma in range(d):
                if data.eta[beta][gamma]:
                    raw.append(
                        (
                            inv2lam2 * cn1[alpha][beta] * data.eta[beta][gamma],
                            (t_var(0, alpha), t_var(0, gamma)),
                            (),
                        )
                    )
    return OperatorExpr.build(raw)


def target_commutator_report(
    n1: int,
    n: int,
    data: CohomologyData,
    window: int = 3,
    lam: Fraction = Fraction(1),
) -> dict:
    """([L_{n1}, L_n] - (n - n1) L_{n+n1}) p for window monomials; a report,
    not an assertion -- the printed operators need not close."""
    max_m = window + 3  # index growth is at most +1 per application
    cap = window + 6
    names, weights, series_cap = target_space(data, max_m, cap)
    monomials = list(_weight_monomials(len(names), weights, window))
    if not monomials:
        raise InsufficientCap("empty commutator window")
    l_n1 = target_virasoro_build(data, n1, max_m, lam)
    l_n = target_virasoro_build(data, n, max_m, lam)
    if n + n1 >= -1:
        l_sum = target_virasoro_build(data, n + n1, max_m, lam)
    elif n != n1:
        raise DomainError("commutator target outside the represented range")
    else:
        l_sum = OperatorExpr.build([])
    entries = []
    for expo in monomials:
        p = TruncatedSeries(names, weights, series_cap, {expo: GaussianRational.of(1)})
        lhs = l_n1.apply(l_n.apply(p)) - l_n.apply(l_n1.apply(p))
        structure = l_sum.apply(p)
        residual = lhs - structure.scale(n - n1)
        # conventions differ on the structure-constant sign, (n-m) versus
        # (m-n); record the residual under both readings
        residual_swapped = lhs - structure.scale(n1 - n)
        entries.append(
            {
                "monomial": _target_monomial_name(names, expo),
                "zero": residual.is_zero(),
                "zero_swapped_sign": residual_swapped.is_zero(),
                "residual": residual.to_json(),
            }
        )
    return {
        "n1": n1,
        "n": n,
        "window": window,
        "all_zero": all(e["zero"] for e in entries),
        "all_zero_swapped_sign": all(e["zero_swapped_sign"] for e in entries),
        "entries": entries,
    }


def _target_monomial_name(names, expo) -> str:
    bits = [f"{v}^{e}" if e > 1 else v for v, e in zip(names, expo) if e]
    return "*".join(bits) if bits else "1"
