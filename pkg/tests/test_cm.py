from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from leroycm.cm import (
    SCAN_TOL,
    BracketCertificate,
    CMBoundaryCurve,
    Verdict,
    cm_bound_search,
    cm_boundary_curve,
    cm_derivative_check,
    cm_derivative_report,
    finite_difference_derivative,
    mlr_derivative,
    scan_weight_sign,
    supermajorization_bound,
    supermajorization_holds,
    supermajorization_threshold,
)
from leroycm.errors import BracketError, ClassificationError, DomainError
from leroycm.mlr import MLRParams, mlr_series
from leroycm.weight import weight_eval

P = MLRParams.of
X_GRID = (0.5, 1.0, 2.0, 5.0)
M2_QUARTER = 0.3169189453125  # beta_lo=0.05, beta_hi=1.5, beta_tol=2e-3, grid=400


class TestSupermajorization:
    def test_examples(self):
        assert supermajorization_bound(2) == Fraction(3, 4)
        assert supermajorization_bound(1) == 1
        assert supermajorization_bound(5) == Fraction(3, 5)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_partial_sums_give_the_bound(self, n):
        b = supermajorization_bound(n)
        assert supermajorization_threshold(n) == b
        assert supermajorization_holds(b, n)
        assert not supermajorization_holds(b - Fraction(1, 10 ** 6), n)

    @given(st.integers(1, 12), st.fractions(0, 2))
    def test_checker_is_a_threshold(self, n, beta):
        assert supermajorization_holds(beta, n) == (beta >= supermajorization_bound(n))

    def test_domain(self):
        with pytest.raises(DomainError):
            supermajorization_bound(0)


def check_report(rep):
    assert (rep.verdict is Verdict.NEGATIVE_FOUND) == bool(rep.negative_intervals)
    if rep.verdict is Verdict.INCONCLUSIVE:
        assert -SCAN_TOL <= rep.min_value < 0 or rep.failed_points > 0.01 * rep.grid_size
    lo, hi = rep.scan_range
    for a, b in rep.negative_intervals:
        assert lo <= a < b <= hi


class TestScan:
    def test_three_sevenths(self):
        rep = scan_weight_sign(P("3/7", "1/2", 2), 10.0)
        check_report(rep)
        assert rep.verdict is Verdict.NEGATIVE_FOUND and len(rep.negative_intervals) == 1
        a, b = rep.negative_intervals[0]
        assert abs(a - 0.086) <= 0.01 and abs(b - 1.666) <= 0.01

    def test_n3_interval_belongs_to_beta_one_third(self):
        third = scan_weight_sign(P("3/10", "1/3", 3), 10.0, grid=1000)
        half = scan_weight_sign(P("3/10", "1/2", 3), 10.0, grid=1000)
        check_report(third)
        check_report(half)
        (a, b), = third.negative_intervals
        assert abs(a - 0.924) <= 0.01 and abs(b - 3.409) <= 0.01
        (c, d), = half.negative_intervals
        assert abs(c - 0.924) > 0.1 and abs(d - 3.409) > 0.1

    def test_arcsine_nonnegative(self):
        rep = scan_weight_sign(P("1/2", 1, 2), 2.0, grid=500)
        check_report(rep)
        assert rep.verdict is Verdict.NONNEGATIVE and rep.scan_range[1] < 2.0
        assert rep.min_value > 0

    def test_negative_from_origin(self):
        rep = scan_weight_sign(P("1/2", "1/2", 2), grid=200)
        check_report(rep)
        (a, b), = rep.negative_intervals
        assert a == 0.0 and b > 1.99

    def test_as_dict(self):
        d = scan_weight_sign(P("1/3", 1, 2), grid=50).as_dict()
        assert d["verdict"] == "NONNEGATIVE" and d["grid_size"] == 50 and d["negative_intervals"] == []

    def test_errors(self):
        with pytest.raises(ClassificationError):
            scan_weight_sign(P("1/2", 1, 3))
        with pytest.raises(DomainError):
            scan_weight_sign(P("1/3", 1, 2), grid=1)

    @pytest.mark.parametrize("alpha,n", [("3/7", 2), ("1/3", 2), ("3/10", 3)])
    def test_min_value_monotone_in_beta(self, alpha, n):
        mins = [scan_weight_sign(P(alpha, beta, n), grid=200).min_value
                for beta in ("1/2", "2/3", "3/4", "1", "4/3")]
        assert all(b >= a - SCAN_TOL for a, b in zip(mins, mins[1:]))


class TestBoundSearch:
    def test_n1_is_the_diagonal(self):
        curve = cm_boundary_curve(1, ["1/5", "1/4", "1/3", "2/5", "1/2", "3/5", "7/10"], workers=4)
        assert isinstance(curve, CMBoundaryCurve)
        for s in curve.samples:
            assert abs(s.M - s.alpha.value) <= 2 * curve.beta_tol
            assert s.certificate.valid()
        assert curve.alpha_range == (0.2, 0.7)

    def test_regression_quarter(self):
        s = cm_bound_search(2, "1/4", beta_lo=0.05, beta_hi=1.5)
        assert s.M == pytest.approx(M2_QUARTER, abs=1e-12)
        assert 0 < s.M <= 0.75 and s.certificate.valid()
        c = s.certificate
        assert c.beta_nonnegative - c.beta_negative == pytest.approx(4e-3)

    def test_alpha_must_be_below_one_over_n(self):
        with pytest.raises(DomainError):
            cm_bound_search(2, "1/2")
        with pytest.raises(DomainError):
            cm_bound_search(3, "2/5")

    def test_bracket_errors(self):
        with pytest.raises(BracketError):
            cm_bound_search(2, "1/4", beta_lo=0.5, beta_hi=1.5)
        with pytest.raises(BracketError):
            cm_bound_search(2, "1/4", beta_lo=0.05, beta_hi=0.2)
        with pytest.raises(BracketError):
            cm_bound_search(2, "1/4", beta_lo=1.0, beta_hi=0.5)

    def test_certificate_validity(self):
        ok = BracketCertificate(0.3, 0.31, "NEGATIVE_FOUND", "NONNEGATIVE")
        assert ok.valid()
        assert not BracketCertificate(0.31, 0.3, "NEGATIVE_FOUND", "NONNEGATIVE").valid()
        assert not BracketCertificate(0.3, 0.31, "INCONCLUSIVE", "NONNEGATIVE").valid()

    def test_curve_rejects_alpha_out_of_range(self):
        s = cm_bound_search(1, "3/5", beta_lo=0.55, beta_hi=0.7, beta_tol=1e-2, grid=100)
        with pytest.raises(ValueError):
            CMBoundaryCurve(2, (s,), 1e-2, (0.6, 0.6))


class TestDerivatives:
    def test_examples(self):
        assert cm_derivative_check(P("1/2", 1, 2), X_GRID, 6)
        assert not cm_derivative_check(P("1/2", "1/2", 2), X_GRID, 6)
        assert cm_derivative_check(P("1/2", 1, 1), X_GRID, 6)
        assert cm_derivative_check(P("1/2", 1, 1), (0.01, 0.3, 7.0, 20.0), 8)

    def test_failures_are_reported(self):
        rep = cm_derivative_report(P("3/7", "1/2", 2), X_GRID, 6)
        assert not rep.ok and rep.failures
        x, j, v = rep.failures[0]
        assert v < -1e-10 and rep.values[(x, j)] == v

    def test_order_zero_is_the_function(self):
        p = P("1/3", 1, 2)
        assert mlr_derivative(p, 5.0, 0) == pytest.approx(mlr_series(p, -5.0).value, rel=1e-13)

    @given(st.sampled_from([("1/2", 1, 2), ("1/3", 1, 2), ("3/7", "1/2", 2), ("2/5", "3/2", 3)]),
           st.floats(0.2, 6), st.integers(1, 3))
    @settings(max_examples=25)
    def test_matches_finite_differences(self, t, x, j):
        p = P(*t)
        a = mlr_derivative(p, x, j)
        b = finite_difference_derivative(p, x, j)
        scale = max(abs(a), mlr_derivative(p, x, 0), 1e-3)
        # truncation O(h^2) plus roundoff of order eps / h^j
        assert abs(a - b) <= (1e-7 + 10 * 2.2e-16 / 1e-4 ** j) * scale

    def test_exp_like_case(self):
        # (1/2, 1, 1): F(-x) = e^{x^2} erfc(x), whose first derivative is 2x F - 2/sqrt(pi)
        import math
        p = P("1/2", 1, 1)
        x = 0.7
        f = math.exp(x * x) * math.erfc(x)
        assert mlr_derivative(p, x, 1) == pytest.approx(-(2 * x * f - 2 / math.sqrt(math.pi)), rel=1e-12)

    @pytest.mark.parametrize("t", [("1/2", 1, 2), ("1/2", "3/4", 2), ("1/3", 1, 2), ("1/4", 1, 2)])
    def test_nonnegative_scan_implies_derivative_signs(self, t):
        p = P(*t)
        if scan_weight_sign(p, grid=200).verdict is Verdict.NONNEGATIVE:
            assert cm_derivative_check(p, X_GRID, 6)
        else:
            pytest.fail("expected a nonnegative scan on this grid")

    def test_domain(self):
        with pytest.raises(DomainError):
            cm_derivative_check(P("1/2", 1, 2), X_GRID, 9)
        with pytest.raises(DomainError):
            cm_derivative_check(P("1/2", 1, 2), (0.0, 1.0), 2)
        with pytest.raises(DomainError):
            finite_difference_derivative(P("1/2", 1, 2), 1.0, 4)
        with pytest.raises(DomainError):
            mlr_derivative(P("1/2", 1, 2), -1.0, 1)


def test_boundary_near_one_half_is_below_seven_tenths():
    # brute-force series at 150 digits: negative at beta = 0.66, so M2(12/25) > 0.66 ...
    import oracles
    assert oracles.weight_series("12/25", "33/50", 2, 1.0, dps=150, terms=2000) < -1e-3
    assert weight_eval(P("12/25", "33/50", 2), 1.0).value == pytest.approx(
        oracles.weight_series("12/25", "33/50", 2, 1.0, dps=150, terms=2000), rel=1e-9)
    # ... and the scan finds no negative part at beta = 0.70
    assert scan_weight_sign(P("12/25", "7/10", 2), grid=400).verdict is Verdict.NONNEGATIVE
