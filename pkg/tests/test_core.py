"""Model primitive tests: intensities, regression vectors, information matrices."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btdesign import (
    Design,
    InfoMatrix,
    Pair,
    Parameters,
    SingularMatrixError,
    all_pairs,
    information_matrix,
    intensity,
    intensity_table,
    log_det,
    regression_vector,
    solve_spd,
)
from btdesign.core import design_from_vector, intensity_vector

from helpers import random_design, random_params


class TestPair:
    def test_canonicalizes_order(self):
        assert Pair(3, 1) == Pair(1, 3)
        assert Pair(3, 1).i == 1 and Pair(3, 1).j == 3

    def test_key_round_trip(self):
        assert Pair.from_key(Pair(2, 4).key()) == Pair(2, 4)

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            Pair(2, 2)
        with pytest.raises(ValueError):
            Pair(0, 1)


class TestParameters:
    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            Parameters(4, (0.0, 0.0))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            Parameters(3, (1.0, float("nan")))

    def test_too_few_alternatives(self):
        with pytest.raises(ValueError):
            Parameters(1, ())

    def test_from_pi_matches_log_ratios(self):
        p = Parameters.from_pi([2.0, 8.0, 4.0])
        assert p.beta == pytest.approx((math.log(0.5), math.log(2.0)))


class TestIntensity:
    def test_peak_at_zero(self):
        assert intensity(0.0) == 0.25

    def test_closed_form_log3(self):
        assert intensity(math.log(3.0)) == pytest.approx(3.0 / 16.0, rel=1e-15)

    def test_even_function(self):
        assert intensity(7.3) == intensity(-7.3)

    def test_large_argument_is_stable(self):
        # Reference value from a 50-digit evaluation of e^z/(1+e^z)^2 at z=40.
        assert intensity(40.0) == pytest.approx(4.248354255291589e-18, rel=1e-14)
        assert intensity(700.0) > 0.0

    def test_rejects_non_finite(self):
        for z in (float("inf"), float("-inf"), float("nan")):
            with pytest.raises(ValueError):
                intensity(z)

    @given(st.floats(min_value=-60.0, max_value=60.0, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_even_and_bounded(self, z):
        v = intensity(z)
        assert v == intensity(-z)
        assert 0.0 < v <= 0.25
        # Strictness below the peak is only resolvable away from z = 0 in
        # double precision (the deficit is quadratic in z).
        if abs(z) >= 1e-6:
            assert v < 0.25


class TestIntensityTable:
    def test_all_quarter_at_origin(self):
        table = intensity_table(Parameters(4, (0.0, 0.0, 0.0)))
        assert set(table.values) == set(all_pairs(4))
        assert all(v == 0.25 for v in table.values.values())

    def test_geometric_point(self):
        # beta_i = i * log(2), so pi_i = 2^i: lambda_12 = pi1/(1+pi1)^2 = 2/9.
        c = math.log(2.0)
        p = Parameters(4, (c, 2 * c, 3 * c))
        assert intensity_table(p)[Pair(1, 2)] == pytest.approx(2.0 / 9.0, rel=1e-14)

    def test_two_alternatives(self):
        table = intensity_table(Parameters(2, (0.0,)))
        assert table[Pair(1, 2)] == 0.25

    def test_matches_preference_ratio_form(self):
        # lambda depends on beta only through differences: the pi form
        # pi_i pi_j / (pi_i + pi_j)^2 must agree to near machine precision.
        rng = np.random.default_rng(11)
        for _ in range(25):
            p = random_params(rng, 5, scale=8.0)
            pi = np.exp(np.append(np.asarray(p.beta), 0.0))
            table = intensity_table(p)
            for pair in all_pairs(5):
                expected = pi[pair.i - 1] * pi[pair.j - 1] / (pi[pair.i - 1] + pi[pair.j - 1]) ** 2
                assert table[pair] == pytest.approx(expected, rel=1e-14)


class TestRegressionVector:
    def test_m4_table(self):
        assert regression_vector(Pair(1, 2), 4).tolist() == [1, -1, 0]
        assert regression_vector(Pair(2, 4), 4).tolist() == [0, 1, 0]
        assert regression_vector(Pair(3, 4), 4).tolist() == [0, 0, 1]
        assert regression_vector(Pair(1, 3), 4).tolist() == [1, 0, -1]
        assert regression_vector(Pair(1, 4), 4).tolist() == [1, 0, 0]
        assert regression_vector(Pair(2, 3), 4).tolist() == [0, 1, -1]

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            regression_vector(Pair(2, 5), 4)


class TestDesign:
    def test_uniform(self):
        d = Design.uniform(4)
        assert d.weight(Pair(1, 2)) == pytest.approx(1.0 / 6.0)
        assert len(d.support()) == 6

    def test_support_threshold(self):
        d = Design(3, {Pair(1, 2): 0.5, Pair(1, 3): 0.5 - 1e-10, Pair(2, 3): 1e-10})
        assert Pair(2, 3) not in d.support()
        assert Pair(1, 3) in d.support()

    def test_rejects_negative_weight(self):
        with pytest.raises(ValueError):
            Design(3, {Pair(1, 2): 1.1, Pair(1, 3): -0.1})

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            Design(3, {Pair(1, 2): 0.5, Pair(1, 3): 0.5 + 1e-9})

    def test_rejects_out_of_range_pair(self):
        with pytest.raises(ValueError):
            Design(3, {Pair(1, 4): 1.0})

    def test_vector_round_trip(self):
        rng = np.random.default_rng(0)
        d = random_design(rng, 4)
        assert design_from_vector(4, d.as_vector()).weights == pytest.approx(d.weights)


class TestInformationMatrix:
    def test_saturated_block_structure(self):
        # Weight 1/3 on (1,2), (1,3), (2,4): the matrix is the displayed
        # combination of the three rank-one terms.
        rng = np.random.default_rng(5)
        p = random_params(rng, 4)
        lam = intensity_table(p)
        d = Design.equal_on(4, [Pair(1, 2), Pair(1, 3), Pair(2, 4)])
        l12, l13, l24 = lam[Pair(1, 2)], lam[Pair(1, 3)], lam[Pair(2, 4)]
        expected = (
            np.array(
                [
                    [l12 + l13, -l12, -l13],
                    [-l12, l12 + l24, 0.0],
                    [-l13, 0.0, l13],
                ]
            )
            / 3.0
        )
        np.testing.assert_allclose(information_matrix(d, p).entries, expected, atol=1e-15)

    def test_single_pair_is_rank_one(self):
        p = Parameters(3, (0.3, -0.2))
        d = Design(3, {Pair(1, 2): 1.0})
        M = information_matrix(d, p)
        assert np.linalg.matrix_rank(M.entries) == 1
        assert log_det(M) == float("-inf")

    def test_direct_summation_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            p = random_params(rng, 4)
            d = random_design(rng, 4)
            lam = intensity_table(p)
            expected = np.zeros((3, 3))
            for pair in all_pairs(4):
                f = regression_vector(pair, 4).astype(float)
                expected += d.weight(pair) * lam[pair] * np.outer(f, f)
            np.testing.assert_allclose(information_matrix(d, p).entries, expected, atol=1e-15)

    def test_linearity_in_weights(self):
        rng = np.random.default_rng(23)
        p = random_params(rng, 4)
        d1, d2 = random_design(rng, 4), random_design(rng, 4)
        for alpha in (0.25, 0.5, 0.9):
            mixed = Design(
                4, {q: alpha * d1.weight(q) + (1 - alpha) * d2.weight(q) for q in all_pairs(4)}
            )
            M_mix = information_matrix(mixed, p).entries
            M_lin = alpha * information_matrix(d1, p).entries + (1 - alpha) * information_matrix(d2, p).entries
            np.testing.assert_allclose(M_mix, M_lin, atol=1e-14)

    def test_positive_semidefinite(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            p = random_params(rng, 5)
            d = random_design(rng, 5)
            M = information_matrix(d, p).entries
            lo = np.linalg.eigvalsh(M).min()
            assert lo >= -1e-12 * np.linalg.norm(M)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            information_matrix(Design.uniform(4), Parameters(3, (0.0, 0.0)))


class TestLogDet:
    def test_identity(self):
        assert log_det(InfoMatrix(4, np.eye(3))) == 0.0

    def test_cycle_design_is_singular(self):
        # A 3-cycle on {1,2,4} leaves alternative 3 out of the design.
        p = Parameters(4, (0.1, -0.4, 0.2))
        cycle = Design.equal_on(4, [Pair(1, 2), Pair(1, 4), Pair(2, 4)])
        assert log_det(information_matrix(cycle, p)) == float("-inf")

    def test_cofactor_oracle_uniform_origin(self):
        p = Parameters(4, (0.0, 0.0, 0.0))
        M = information_matrix(Design.uniform(4), p).entries
        a = M
        det = (
            a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
        )
        assert log_det(InfoMatrix(4, M)) == pytest.approx(math.log(det), rel=1e-12)

    def test_concave_along_mixtures(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            r1 = rng.normal(size=(3, 3))
            r2 = rng.normal(size=(3, 3))
            m1 = r1 @ r1.T + 0.05 * np.eye(3)
            m2 = r2 @ r2.T + 0.05 * np.eye(3)
            mid = log_det(InfoMatrix(4, (m1 + m2) / 2.0))
            avg = 0.5 * (log_det(InfoMatrix(4, m1)) + log_det(InfoMatrix(4, m2)))
            assert mid >= avg - 1e-10


class TestSolveSpd:
    def test_scaled_identity(self):
        x = solve_spd(InfoMatrix(4, 2.0 * np.eye(3)), np.ones(3))
        np.testing.assert_allclose(x, 0.5 * np.ones(3))

    def test_residual_on_random_spd(self):
        rng = np.random.default_rng(37)
        for _ in range(20):
            r = rng.normal(size=(3, 3))
            M = r @ r.T + 0.1 * np.eye(3)
            v = rng.normal(size=3)
            x = solve_spd(InfoMatrix(4, M), v)
            assert np.linalg.norm(M @ x - v) <= 1e-10 * np.linalg.norm(v)

    def test_singular_raises(self):
        with pytest.raises(SingularMatrixError):
            solve_spd(InfoMatrix(4, np.zeros((3, 3))), np.ones(3))

    def test_path_inverse_closed_form(self):
        # Canonical path at the origin: M = (1/12) F^T F with F the path's
        # regression rows, so M^{-1} f(1,4) = 12 U U^T e_1 with U the
        # all-ones upper triangle.
        p = Parameters(4, (0.0, 0.0, 0.0))
        d = Design.equal_on(4, [Pair(1, 2), Pair(2, 3), Pair(3, 4)])
        M = information_matrix(d, p)
        x = solve_spd(M, regression_vector(Pair(1, 4), 4).astype(float))
        np.testing.assert_allclose(x, [36.0, 24.0, 12.0], rtol=1e-10)


class TestIntensityVector:
    def test_matches_table(self):
        rng = np.random.default_rng(41)
        p = random_params(rng, 5)
        table = intensity_table(p)
        vec = intensity_vector(p)
        for pair, v in zip(all_pairs(5), vec):
            assert v == pytest.approx(table[pair], rel=1e-15)
