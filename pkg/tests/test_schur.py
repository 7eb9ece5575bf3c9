"""Tests for Schur polynomials, Hirota operators and KP verification.

Independent oracles:
- S_k is cross-checked against the recurrence k S_k = sum_j j x_j S_{k-j}
  obtained by differentiating the generating function in z;
- hirota_apply is cross-checked against a literal shift expansion of
  f(x+u) g(x-u) followed by u-derivatives at u = 0;
- dual Jacobi-Trudi S_{(1^k)}(x) = S_k(x_1, -x_2, x_3, -x_4, ...).
"""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taubench.errors import DegenerateSlice, DomainError
from taubench.exact import GaussianRational, TruncatedSeries, x_variables
from taubench.schur import (
    HirotaOperator,
    Partition,
    elementary_schur,
    hirota_apply,
    kp_checks,
    kp_hirota_residual,
    kp_pde_residual,
    partitions_of,
    restrict_to_xyt,
    schur_lambda,
)


def _series_env(max_index=3, cap=4):
    return x_variables(max_index, cap)


def shift_oracle(op: HirotaOperator, f: TruncatedSeries, g: TruncatedSeries):
    """D^a f.g by expanding f(x+u) g(x-u) and differentiating in u at 0."""
    m = len(f.variables)
    cap = f.cap + g.cap
    names = f.variables + tuple(f"u{i+1}" for i in range(m))
    weights = f.weights + f.weights
    big = lambda: TruncatedSeries.zero(names, weights, 2 * cap)  # noqa: E731

    def shifted(series, sign):
        total = big()
        for expo, coeff in series.terms.items():
            term = TruncatedSeries.constant(names, weights, 2 * cap, coeff)
            for idx, e in enumerate(expo):
                x = TruncatedSeries.variable(names, weights, 2 * cap, names[idx])
                u = TruncatedSeries.variable(names, weights, 2 * cap, names[m + idx])
                term = term * (x + u.scale(sign)) ** e
            total = total + term
        return total

    prod = shifted(f, 1) * shifted(g, -1)
    for idx, a in enumerate(op.exponents):
        if a:
            prod = prod.diff(names[m + idx], a)
    # set u = 0: keep terms with zero exponents in every u slot
    kept = {
        expo[:m]: coeff
        for expo, coeff in prod.terms.items()
        if not any(expo[m:])
    }
    return TruncatedSeries(f.variables, f.weights, cap, kept)


def small_polys():
    names, weights, cap = _series_env()

    def build(coeffs):
        monos = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (1, 1, 0), (0, 0, 0)]
        return TruncatedSeries(
            names, weights, cap, dict(zip(monos, map(GaussianRational.of, coeffs)))
        )

    qs = st.fractions(min_value=Fraction(-4), max_value=Fraction(4), max_denominator=4)
    return st.builds(build, st.tuples(qs, qs, qs, qs, qs, qs))


class TestElementarySchur:
    def test_s0_and_negative(self):
        assert elementary_schur(0, 3).constant_term().re == 1
        assert elementary_schur(-2, 3).is_zero()

    def test_s1(self):
        s1 = elementary_schur(1, 3)
        assert s1.coefficient((1, 0, 0)).re == 1
        assert len(s1.terms) == 1

    def test_s3_frozen(self):
        s3 = elementary_schur(3, 3)
        assert s3.coefficient((0, 0, 1)).re == 1  # x3
        assert s3.coefficient((1, 1, 0)).re == 1  # x1 x2
        assert s3.coefficient((3, 0, 0)).re == Fraction(1, 6)  # x1^3/6
        assert len(s3.terms) == 3

    @pytest.mark.parametrize("k", range(1, 7))
    def test_newton_recurrence(self, k):
        # k S_k = sum_{j=1}^k j x_j S_{k-j}, from d/dz of the generating fn
        names, weights, cap = x_variables(k, k)
        rhs = TruncatedSeries.zero(names, weights, cap)
        for j in range(1, k + 1):
            xj = TruncatedSeries.variable(names, weights, cap, f"x{j}")
            s = elementary_schur(k - j, k)
            rhs = rhs + (xj * TruncatedSeries(names, weights, cap, s.terms)).scale(j)
        lhs = elementary_schur(k, k).scale(k)
        assert lhs == rhs

    def test_homogeneous_of_weight_k(self):
        s4 = elementary_schur(4, 4)
        assert all(s4.degree_of(e) == 4 for e in s4.terms)


class TestSchurLambda:
    def test_single_row_is_elementary(self):
        assert schur_lambda(Partition((1,))).coefficient((1,)).re == 1
        s2 = schur_lambda(Partition((2,)))
        assert s2.coefficient((2, 0)).re == Fraction(1, 2)
        assert s2.coefficient((0, 1)).re == 1

    def test_column_frozen(self):
        s11 = schur_lambda(Partition((1, 1)))
        assert s11.coefficient((2, 0)).re == Fraction(1, 2)
        assert s11.coefficient((0, 1)).re == -1

    @pytest.mark.parametrize("k", range(1, 5))
    def test_dual_column_row(self, k):
        # S_{(1^k)}(x1, x2, x3, ...) = S_k(x1, -x2, x3, -x4, ...)
        column = schur_lambda(Partition((1,) * k))
        row = elementary_schur(k, k)
        twisted = {
            expo: coeff * Fraction((-1) ** sum(e for i, e in enumerate(expo) if i % 2))
            for expo, coeff in row.terms.items()
        }
        twisted_series = TruncatedSeries(row.variables, row.weights, row.cap, twisted)
        assert TruncatedSeries(
            column.variables, column.weights, column.cap, twisted_series.terms
        ) == column

    def test_partition_validation(self):
        with pytest.raises(DomainError):
            Partition((1, 2))
        with pytest.raises(DomainError):
            Partition((2, 0))

    def test_partitions_of(self):
        assert [p.parts for p in partitions_of(4)] == [
            (4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)
        ]
        assert partitions_of(0) == []


class TestHirota:
    @given(small_polys())
    @settings(max_examples=25, deadline=None)
    def test_odd_operator_kills_diagonal(self, f):
        for op in (HirotaOperator((1,)), HirotaOperator((1, 1, 1)), HirotaOperator((0, 0, 3))):
            assert hirota_apply(op, f, f).is_zero()

    @given(small_polys(), small_polys())
    @settings(max_examples=20, deadline=None)
    def test_matches_shift_oracle(self, f, g):
        for op in (HirotaOperator((2,)), HirotaOperator((1, 1)), HirotaOperator((0, 0, 1))):
            assert hirota_apply(op, f, g) == shift_oracle(op, f, g)

    def test_d1_squared_on_x1(self):
        names, weights, cap = _series_env()
        x1 = TruncatedSeries.variable(names, weights, cap, "x1")
        # four-term expansion f''g - 2f'g' + fg'' at f = g = x1 gives -2
        result = hirota_apply(HirotaOperator((2,)), x1, x1)
        assert result.constant_term().re == -2
        assert result == shift_oracle(HirotaOperator((2,)), x1, x1)

    def test_kp_member_on_constants(self):
        names, weights, cap = _series_env()
        one = TruncatedSeries.constant(names, weights, cap, 1)
        assert kp_hirota_residual(one).is_zero()

    def test_negative_exponent_rejected(self):
        with pytest.raises(DomainError):
            HirotaOperator((1, -1))


class TestKP:
    def test_schur_21_solves_both(self):
        tau = schur_lambda(Partition((2, 1)))
        assert kp_hirota_residual(tau).is_zero()
        assert kp_pde_residual(tau).is_zero()

    def test_x1_squared_fails_both(self):
        names, weights, cap = x_variables(3, 2)
        x1 = TruncatedSeries.variable(names, weights, cap, "x1")
        tau = x1 * x1
        hirota = kp_hirota_residual(tau)
        assert hirota.constant_term().re == 24
        assert not kp_pde_residual(tau).is_zero()

    def test_tau_x1_hand_case(self):
        # u = -2/x1^2 is y- and t-independent and (3/2)u u_x + (1/4)u_xxx = 0
        names, weights, cap = x_variables(1, 1)
        tau = TruncatedSeries.variable(names, weights, cap, "x1")
        assert kp_pde_residual(tau).is_zero()

    def test_schur_22_with_constant(self):
        tau = schur_lambda(Partition((2, 2)))
        assert kp_pde_residual(tau, {"x4": Fraction(1)}).is_zero()
        assert kp_hirota_residual(tau).is_zero()

    def test_degenerate_slice(self):
        names, weights, cap = x_variables(4, 4)
        tau = TruncatedSeries.variable(names, weights, cap, "x4")
        with pytest.raises(DegenerateSlice):
            kp_pde_residual(tau, {"x4": Fraction(0)})

    def test_zero_tau_rejected(self):
        names, weights, cap = x_variables(3, 2)
        with pytest.raises(DomainError):
            kp_hirota_residual(TruncatedSeries.zero(names, weights, cap))

    @pytest.mark.parametrize("size", range(1, 6))
    def test_equivalence_on_schur_orbit(self, size):
        point = {f"x{j}": Fraction(1) for j in range(4, size + 1)}
        for p in partitions_of(size):
            report = kp_checks(schur_lambda(p), point)
            assert report == {"hirota_zero": True, "pde_zero": True, "agree": True}

    def test_restrict_handles_missing_value(self):
        names, weights, cap = x_variables(4, 4)
        tau = TruncatedSeries.variable(names, weights, cap, "x4")
        with pytest.raises(DomainError):
            restrict_to_xyt(tau, {})
