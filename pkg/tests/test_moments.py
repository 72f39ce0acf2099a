"""Cumulant/moment/symmetric-function algebra: exact tables and transforms."""

import math

import numpy as np
import pytest
import sympy

from pbextremal import (
    DomainError,
    bc_pmf,
    bernoulli_cumulant_coeffs,
    bernoulli_cumulants,
    cumulants_from_moments,
    cumulants_to_power_sums,
    elementary_symmetric,
    expectation,
    expectation_via_elementary,
    moments_from_cumulants,
    newton_E_from_S,
    payoff_newton_coeffs,
    power_sums,
    power_sums_to_cumulants,
)
from pbextremal.moments import Payoff, coeff_rows_via_derivative

# closed forms for the first four cumulants of a Bernoulli(p) trial
KAPPA_CLOSED = (
    lambda p: p,
    lambda p: p * (1 - p),
    lambda p: p * (1 - p) * (1 - 2 * p),
    lambda p: p * (1 - p) * (1 - 6 * p * (1 - p)),
)


class TestCoeffTable:
    def test_first_rows_exact(self):
        table = bernoulli_cumulant_coeffs(4)
        assert table.rows == ((1,), (1, -1), (1, -3, 2), (1, -7, 12, -6))

    def test_row_four_against_symbolic_expansion(self):
        p = sympy.symbols("p")
        poly = sympy.Poly(sympy.expand(p * (1 - p) * (1 - 6 * p * (1 - p))), p)
        # all_coeffs is highest power first; row stores ascending powers 1..4
        expected = tuple(int(c) for c in reversed(poly.all_coeffs()[:-1]))
        assert bernoulli_cumulant_coeffs(4).row(4) == expected

    def test_diagonal_closed_form(self):
        table = bernoulli_cumulant_coeffs(8)
        for r in range(1, 9):
            assert table.coeff(r, r) == (-1) ** (r - 1) * math.factorial(r - 1)

    def test_derivative_recursion_rows_identical(self):
        # the alternate recursion kappa_{r+1} = p(1-p) d/dp kappa_r must
        # reproduce the rows exactly, as integers
        assert coeff_rows_via_derivative(8) == bernoulli_cumulant_coeffs(8).rows

    def test_empty_table(self):
        assert bernoulli_cumulant_coeffs(0).r_max == 0

    def test_as_matrix_is_lower_triangular(self):
        A = bernoulli_cumulant_coeffs(5).as_matrix()
        assert np.allclose(A, np.tril(A))


class TestBernoulliCumulants:
    def test_half(self):
        np.testing.assert_allclose(
            bernoulli_cumulants(0.5, 4), [0.5, 0.25, 0.0, -0.125], atol=1e-16
        )

    def test_degenerate(self):
        np.testing.assert_array_equal(bernoulli_cumulants(0.0, 4), [0, 0, 0, 0])
        np.testing.assert_array_equal(bernoulli_cumulants(1.0, 4), [1, 0, 0, 0])

    def test_closed_forms_on_grid(self):
        for p in np.linspace(0, 1, 11):
            got = bernoulli_cumulants(p, 4)
            want = [f(p) for f in KAPPA_CLOSED]
            np.testing.assert_allclose(got, want, atol=1e-13)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            bernoulli_cumulants(1.5, 3)


class TestThiele:
    def test_first_moment_is_first_cumulant(self):
        np.testing.assert_array_equal(moments_from_cumulants([0.37]), [0.37])
        np.testing.assert_array_equal(cumulants_from_moments([0.37]), [0.37])

    def test_second_moment(self):
        # mu_2 = kappa_2 + kappa_1^2, the sigma^2 + mu^2 identity
        np.testing.assert_allclose(moments_from_cumulants([1.0, 1.0]), [1.0, 2.0])

    def test_bernoulli_half_moments(self):
        # every raw moment of a Bernoulli(p) equals p
        np.testing.assert_allclose(
            moments_from_cumulants([0.5, 0.25, 0.0]), [0.5, 0.5, 0.5], atol=1e-15
        )

    def test_variance_identity(self):
        np.testing.assert_allclose(cumulants_from_moments([0.5, 0.5]), [0.5, 0.25])

    def test_roundtrip(self):
        rng = np.random.default_rng(201)
        for _ in range(100):
            r = int(rng.integers(1, 7))
            kappa = rng.uniform(-5, 5, r)
            back = cumulants_from_moments(moments_from_cumulants(kappa))
            np.testing.assert_allclose(back, kappa, atol=1e-11, rtol=1e-11)

    def test_roundtrip_from_moment_side(self):
        # cumulants of an arbitrary vector in [-5,5]^6 reach ~1e6, so the
        # recovery error scales with that intermediate magnitude; check
        # relative to it
        rng = np.random.default_rng(210)
        for _ in range(100):
            r = int(rng.integers(1, 7))
            mu = rng.uniform(-5, 5, r)
            kappa = cumulants_from_moments(mu)
            back = moments_from_cumulants(kappa)
            scale = max(1.0, float(np.max(np.abs(kappa))))
            assert float(np.max(np.abs(back - mu))) <= 1e-13 * scale


class TestPowerSums:
    def test_empty(self):
        np.testing.assert_array_equal(power_sums([], 3), [0, 0, 0])

    def test_small(self):
        np.testing.assert_array_equal(power_sums([1, 2, 3], 3), [6, 14, 36])

    def test_single_element_powers(self):
        c = 0.7
        np.testing.assert_allclose(power_sums([c], 4), [c, c**2, c**3, c**4])


class TestElementarySymmetric:
    def test_empty(self):
        np.testing.assert_array_equal(elementary_symmetric([]), [1.0])

    def test_product_expansion(self):
        # (t+1)(t+2)(t+3) = t^3 + 6 t^2 + 11 t + 6
        np.testing.assert_allclose(elementary_symmetric([1, 2, 3]), [1, 6, 11, 6])

    def test_indicator_vectors_give_binomial_coefficients(self):
        rng = np.random.default_rng(202)
        for _ in range(20):
            y = rng.integers(0, 2, int(rng.integers(0, 10))).astype(float)
            ones = int(y.sum())
            E = elementary_symmetric(y)
            want = [math.comb(ones, k) for k in range(y.size + 1)]
            np.testing.assert_allclose(E, want, atol=1e-12)


class TestNewtonIdentities:
    def test_cross_check_small(self):
        np.testing.assert_allclose(newton_E_from_S([6, 14, 36], 3), [6, 11, 6], atol=1e-12)

    def test_zero_vector(self):
        np.testing.assert_array_equal(newton_E_from_S(np.zeros(5), 5), np.zeros(5))

    def test_all_ones(self):
        n = 6
        s = np.full(n, float(n))
        want = [math.comb(n, k) for k in range(1, n + 1)]
        np.testing.assert_allclose(newton_E_from_S(s, n), want, atol=1e-10)

    def test_matches_direct_elementary_on_random_vectors(self):
        rng = np.random.default_rng(203)
        for _ in range(100):
            n = int(rng.integers(1, 11))
            x = rng.uniform(-2, 2, n)
            via_newton = newton_E_from_S(power_sums(x, n), n)
            direct = elementary_symmetric(x)[1:]
            np.testing.assert_allclose(via_newton, direct, rtol=1e-10, atol=1e-12)

    def test_needs_enough_power_sums(self):
        with pytest.raises(DomainError):
            newton_E_from_S([1.0], 2)


class TestCumulantPowerSumMaps:
    def test_first_order_identity(self):
        np.testing.assert_array_equal(cumulants_to_power_sums([0.4]), [0.4])
        np.testing.assert_array_equal(power_sums_to_cumulants([0.4]), [0.4])

    def test_second_order(self):
        # kappa_2 = S_1 - S_2 from the row (1, -1)
        np.testing.assert_allclose(power_sums_to_cumulants([2.0, 1.0]), [2.0, 1.0])

    def test_roundtrip(self):
        rng = np.random.default_rng(204)
        for _ in range(100):
            r = int(rng.integers(1, 7))
            s = rng.uniform(-5, 5, r)
            np.testing.assert_allclose(
                cumulants_to_power_sums(power_sums_to_cumulants(s)), s,
                atol=1e-11, rtol=1e-11,
            )

    def test_against_pmf_route(self):
        # cumulants from the coefficient table applied to power sums must
        # match cumulants extracted from the actual pmf's raw moments
        rng = np.random.default_rng(205)
        for _ in range(40):
            n = int(rng.integers(1, 9))
            r = int(rng.integers(1, 6))
            p = rng.random(n)
            via_table = power_sums_to_cumulants(power_sums(p, r))
            via_pmf = cumulants_from_moments(bc_pmf(p).raw_moments(r))
            np.testing.assert_allclose(via_table, via_pmf, atol=1e-9)

    def test_additivity_under_concatenation(self):
        rng = np.random.default_rng(206)
        for _ in range(20):
            p = rng.random(int(rng.integers(1, 6)))
            s = rng.random(int(rng.integers(1, 6)))
            r = 5
            joint = cumulants_from_moments(bc_pmf(np.concatenate([p, s])).raw_moments(r))
            split = (
                cumulants_from_moments(bc_pmf(p).raw_moments(r))
                + cumulants_from_moments(bc_pmf(s).raw_moments(r))
            )
            np.testing.assert_allclose(joint, split, atol=1e-10)


class TestPayoffCoeffs:
    def test_constant(self):
        np.testing.assert_array_equal(payoff_newton_coeffs([3.5, 3.5, 3.5]), [3.5, 0, 0])

    def test_basis_identity(self):
        np.testing.assert_array_equal(payoff_newton_coeffs([0, 0, 1]), [0, 0, 1])

    def test_square(self):
        b = payoff_newton_coeffs([0, 1, 4])
        np.testing.assert_array_equal(b, [0, 1, 2])
        # x^2 = C(x,1) + 2 C(x,2) pointwise on {0,1,2}
        for x in range(3):
            assert sum(b[k] * math.comb(x, k) for k in range(3)) == x**2

    def test_reconstruction_on_random_tables(self):
        rng = np.random.default_rng(207)
        for _ in range(30):
            n = int(rng.integers(0, 11))
            g = rng.uniform(-3, 3, n + 1)
            b = payoff_newton_coeffs(g)
            rebuilt = [
                sum(b[k] * math.comb(x, k) for k in range(n + 1)) for x in range(n + 1)
            ]
            np.testing.assert_allclose(rebuilt, g, atol=1e-10)

    def test_payoff_caches_coeffs(self):
        payoff = Payoff([0, 1, 4])
        np.testing.assert_array_equal(payoff.newton_coeffs, [0, 1, 2])
        assert payoff.newton_coeffs is payoff.newton_coeffs


class TestExpectationViaElementary:
    def test_mean(self):
        assert abs(expectation_via_elementary([0.5, 0.5], [0, 1, 0]) - 1.0) < 1e-15

    def test_top_product(self):
        assert abs(expectation_via_elementary([0.5, 0.5], [0, 0, 1]) - 0.25) < 1e-15

    def test_total_mass(self):
        rng = np.random.default_rng(208)
        p = rng.random(5)
        b = np.zeros(6)
        b[0] = 1.0
        assert expectation_via_elementary(p, b) == 1.0

    def test_fubini_identity(self):
        rng = np.random.default_rng(209)
        for _ in range(50):
            n = int(rng.integers(1, 9))
            p = rng.random(n)
            g = rng.uniform(-2, 2, n + 1)
            lhs = expectation_via_elementary(p, payoff_newton_coeffs(g))
            rhs = expectation(bc_pmf(p), g)
            assert abs(lhs - rhs) < 1e-10

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            expectation_via_elementary([0.5], [1.0, 0.0, 0.0])
