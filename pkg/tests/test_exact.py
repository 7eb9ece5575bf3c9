"""Tests for the exact arithmetic substrate."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taubench.errors import DomainError, InconsistentSystem, RankDeficient
from taubench.exact import (
    ExactMatrix,
    GaussianRational,
    GR_I,
    GR_ONE,
    TruncatedSeries,
    double_factorial,
    rational_from_str,
    rational_to_str,
    rational_rank,
    solve_linear_exact,
    t_variables,
    x_variables,
)

fractions = st.fractions(
    min_value=Fraction(-50), max_value=Fraction(50), max_denominator=12
)


def gaussians():
    return st.builds(GaussianRational, fractions, fractions)


class TestRationalStr:
    def test_integer_omits_denominator(self):
        assert rational_to_str(Fraction(-7)) == "-7"

    def test_fraction(self):
        assert rational_to_str(Fraction(3, 4)) == "3/4"

    @given(fractions)
    def test_roundtrip(self, q):
        assert rational_from_str(rational_to_str(q)) == q


class TestDoubleFactorial:
    def test_table(self):
        assert [double_factorial(n) for n in (-1, 1, 3, 5, 7)] == [1, 1, 3, 15, 105]

    def test_below_domain(self):
        with pytest.raises(DomainError):
            double_factorial(-3)


class TestGaussianRational:
    @given(gaussians(), gaussians(), gaussians())
    def test_ring_axioms(self, a, b, c):
        assert (a + b) * c == a * c + b * c
        assert a * (b * c) == (a * b) * c
        assert a + b == b + a

    @given(gaussians())
    def test_division_inverts(self, a):
        if a:
            assert (a * GR_I) / a == GR_I

    def test_i_squared(self):
        assert GR_I * GR_I == -GR_ONE

    @given(gaussians())
    def test_conjugate_norm_is_real(self, a):
        assert (a * a.conjugate()).is_real()


def _series(cap=6):
    names, weights, c = t_variables(2, cap)
    return names, weights, c


class TestTruncatedSeries:
    def test_cap_drops_terms(self):
        names, weights, cap = _series(cap=2)
        t0 = TruncatedSeries.variable(names, weights, cap, "t0")
        assert (t0 * t0 * t0).is_zero()

    def test_mul_matches_hand_product(self):
        names, weights, cap = _series()
        t0 = TruncatedSeries.variable(names, weights, cap, "t0")
        t1 = TruncatedSeries.variable(names, weights, cap, "t1")
        prod = (t0 + t1) * (t0 - t1)
        assert prod == t0 * t0 - t1 * t1

    def test_diff_power_rule(self):
        names, weights, cap = _series()
        t0 = TruncatedSeries.variable(names, weights, cap, "t0")
        cubed = t0**3
        assert cubed.diff("t0") == (t0 * t0).scale(3)
        assert cubed.diff("t0", 3) == TruncatedSeries.constant(names, weights, cap, 6)

    def test_exp_log_roundtrip(self):
        names, weights, cap = _series()
        t0 = TruncatedSeries.variable(names, weights, cap, "t0")
        t1 = TruncatedSeries.variable(names, weights, cap, "t1")
        s = t0.scale(Fraction(1, 3)) + t1 * t1 - t0 * t1 * t0
        assert s.exp().log() == s

    def test_exp_requires_zero_constant(self):
        names, weights, cap = _series()
        one = TruncatedSeries.constant(names, weights, cap, 1)
        with pytest.raises(DomainError):
            one.exp()

    def test_exp_is_multiplicative(self):
        names, weights, cap = _series()
        t0 = TruncatedSeries.variable(names, weights, cap, "t0")
        t1 = TruncatedSeries.variable(names, weights, cap, "t1")
        assert (t0 + t1).exp() == t0.exp() * t1.exp()

    def test_weighted_grading(self):
        names, weights, cap = x_variables(3, 3)
        x1 = TruncatedSeries.variable(names, weights, cap, "x1")
        x3 = TruncatedSeries.variable(names, weights, cap, "x3")
        # weight(x3) = 3, so x1*x3 exceeds the cap of 3
        assert (x1 * x3).is_zero()
        assert not (x1**3).is_zero()

    def test_json_roundtrip(self):
        names, weights, cap = _series()
        t0 = TruncatedSeries.variable(names, weights, cap, "t0")
        s = (t0 * t0).scale(GaussianRational(Fraction(2, 7), Fraction(-1, 3))) + 5
        payload = s.to_json()
        assert TruncatedSeries.from_json(names, weights, cap, payload) == s

    @given(st.integers(min_value=0, max_value=5))
    def test_pow_matches_repeated_mul(self, n):
        names, weights, cap = _series()
        s = TruncatedSeries.variable(names, weights, cap, "t0") + 1
        expected = TruncatedSeries.constant(names, weights, cap, 1)
        for _ in range(n):
            expected = expected * s
        assert s**n == expected


class TestSolveLinearExact:
    @given(
        st.lists(fractions, min_size=3, max_size=3),
        st.integers(min_value=1, max_value=20),
    )
    @settings(max_examples=30)
    def test_recovers_planted_solution(self, x, spread):
        # Vandermonde rows are exactly independent at distinct nodes
        nodes = [Fraction(k + 1, spread) for k in range(5)]
        a = ExactMatrix([[node**j for j in range(3)] for node in nodes])
        y = [sum(row[j] * x[j] for j in range(3)) for row in a.entries]
        assert solve_linear_exact(a, y) == x

    def test_inconsistent_reports_residual(self):
        a = ExactMatrix([[Fraction(1)], [Fraction(1)]])
        with pytest.raises(InconsistentSystem) as err:
            solve_linear_exact(a, [Fraction(1), Fraction(2)])
        assert err.value.residual != 0

    def test_rank_deficient(self):
        a = ExactMatrix([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]])
        with pytest.raises(RankDeficient):
            solve_linear_exact(a, [Fraction(1), Fraction(2)])

    def test_rational_rank(self):
        rows = [
            [Fraction(1), Fraction(2), Fraction(3)],
            [Fraction(2), Fraction(4), Fraction(6)],
            [Fraction(0), Fraction(1), Fraction(0)],
        ]
        assert rational_rank(rows) == 2
