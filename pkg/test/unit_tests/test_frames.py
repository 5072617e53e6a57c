import json
import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from frames.connection import (
    connection_forms,
    curvature_from_structure,
    first_structure_residual,
    riemann_frame,
    structure_constants,
)
from frames.killing import (
    NoRealSolutionError,
    curvature_target,
    killing_cov_deriv,
    second_derivative_target,
    solve_ys,
    ys_criteria_check,
)
from frames.spray import (
    e_correction,
    e_correction_assembled,
    frame_finsler,
    riemann_spray_frame,
    tau_frame,
    zeta_frame,
    zeta_hcov,
    zeta_hcov_from_connection,
    zeta_partials,
)
from frames.tables import FrameTables, render_table
from jets.finite_difference import fd_partial

TEST_SEED = 11
TEST_EPSILONS = (0.5, 1.0, math.sqrt(2.0), 3.0, math.sqrt(29.0))
TEST_YS_K = (1.0, 1.0001, 2.0, 29.0, 357.0)
TEST_FD_STEP = 5e-4
TEST_FD_TOL = 1e-6
TEST_FD_SECOND_TOL = 1e-5


def _frame_vectors(count, seed=TEST_SEED):
    rng = np.random.default_rng(seed)
    return [rng.uniform(0.5, 1.5, 3) * rng.choice([-1.0, 1.0], 3) for _ in range(count)]


def _frame_samples(count, seed=TEST_SEED):
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        y = rng.standard_normal(3)
        K = rng.uniform(1.0, 400.0)
        sign = int(rng.choice([-1, 1]))
        samples.append((y, K, sign))
    return samples


class TestConnection(unittest.TestCase):
    def test_printed_forms(self):
        forms = connection_forms(2.0)
        np.testing.assert_array_equal(forms.form(1, 2), [0.0, 0.0, -2.0])
        np.testing.assert_array_equal(forms.form(1, 3), [0.0, 2.0, 0.0])
        np.testing.assert_array_equal(forms.form(2, 3), [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(forms.form(3, 2), [-1.0, 0.0, 0.0])
        np.testing.assert_array_equal(forms.form(1, 1), [0.0, 0.0, 0.0])

    def test_skew(self):
        for eps in TEST_EPSILONS:
            self.assertEqual(connection_forms(eps).skew_residual(), 0.0)

    def test_bad_epsilon(self):
        with self.assertRaises(ValueError):
            connection_forms(0.0)
        with self.assertRaises(ValueError):
            riemann_frame(-1.0)

    def test_structure_constants(self):
        C = structure_constants(2.0)
        self.assertEqual(C[0, 1, 2], 4.0)
        self.assertEqual(C[0, 2, 1], -4.0)
        self.assertEqual(C[1, 2, 0], 1.0)
        self.assertEqual(C[2, 0, 1], 1.0)

    def test_first_structure_equation(self):
        for eps in TEST_EPSILONS:
            self.assertLess(first_structure_residual(eps), 1e-12)


class TestRiemannTable(unittest.TestCase):
    def test_printed_values(self):
        R = riemann_frame(2.0)
        self.assertEqual(R[2, 3, 2, 3], 8.0)
        self.assertEqual(R[1, 2, 1, 2], -4.0)
        self.assertEqual(R[1, 3, 1, 3], -4.0)
        self.assertEqual(R[2, 1, 1, 2], 4.0)
        self.assertEqual(R[1, 2, 1, 3], 0.0)
        self.assertEqual(R[1, 2, 2, 3], 0.0)

    def test_solution_curve(self):
        for K in (1.0, 2.0, 29.0):
            R = riemann_frame(math.sqrt(K))
            self.assertAlmostEqual(R[1, 2, 1, 2], -K)
            self.assertAlmostEqual(R[2, 3, 2, 3], 3 * K - 4)

    def test_symmetries(self):
        for eps in TEST_EPSILONS:
            R = riemann_frame(eps)
            self.assertEqual(R.symmetry_residual(), 0.0)
            self.assertEqual(len(R.independent_components()), 6)

    def test_recomputed_from_structure_equations(self):
        for eps in TEST_EPSILONS:
            np.testing.assert_allclose(
                curvature_from_structure(eps).components,
                riemann_frame(eps).components,
                atol=1e-12,
            )


class TestKillingTables(unittest.TestCase):
    def test_first_derivative(self):
        lam, eps = 0.7, 1.9
        killing = killing_cov_deriv(lam, eps)
        np.testing.assert_allclose(killing.b, [lam / eps, 0.0, 0.0])
        expected = np.zeros((3, 3))
        expected[1, 2] = -lam
        expected[2, 1] = lam
        np.testing.assert_allclose(killing.b1, expected, atol=1e-15)

    def test_second_derivative(self):
        rng = np.random.default_rng(TEST_SEED)
        for _ in range(3):
            lam, eps = rng.uniform(0.1, 5.0, 2)
            b2 = killing_cov_deriv(lam, eps).b2
            expected = np.zeros((3, 3, 3))
            expected[0, 1, 1] = expected[0, 2, 2] = -lam * eps
            expected[1, 0, 1] = expected[2, 0, 2] = lam * eps
            np.testing.assert_allclose(b2, expected, atol=1e-12)

    def test_second_derivative_target(self):
        rng = np.random.default_rng(TEST_SEED + 1)
        for _ in range(3):
            K, lam, eps = rng.uniform(1.0, 30.0), rng.uniform(0.1, 5.0), rng.uniform(0.5, 6.0)
            T = second_derivative_target(K, killing_cov_deriv(lam, eps).b)
            self.assertAlmostEqual(T[0, 1, 1], -lam * K / eps)
            self.assertAlmostEqual(T[0, 2, 2], -lam * K / eps)
            self.assertAlmostEqual(T[0, 1, 0], 0.0)
            self.assertAlmostEqual(T[1, 2, 1], 0.0)
            self.assertAlmostEqual(T[1, 2, 2], 0.0)

    def test_curvature_target(self):
        rng = np.random.default_rng(TEST_SEED + 2)
        for _ in range(3):
            K, lam = rng.uniform(1.0, 30.0), rng.uniform(0.1, 5.0)
            calT = curvature_target(K, killing_cov_deriv(lam, math.sqrt(K)))
            self.assertAlmostEqual(calT[0, 1, 0, 1], -K)
            self.assertAlmostEqual(calT[0, 2, 0, 2], -K)
            self.assertAlmostEqual(calT[1, 2, 1, 2], 4 * lam**2 - K)
            self.assertAlmostEqual(calT[0, 1, 0, 2], 0.0)
            self.assertAlmostEqual(calT[0, 1, 1, 2], 0.0)
            self.assertAlmostEqual(calT[0, 2, 1, 2], 0.0)


class TestYasudaShimada(unittest.TestCase):
    def test_solution_passes(self):
        for K in TEST_YS_K:
            for sign in (1, -1):
                eps, lam = solve_ys(K, sign)
                report = ys_criteria_check(K, lam, eps)
                self.assertTrue(report.passed, msg=f"K={K} sign={sign}: {report.failing()}")
                self.assertLess(report.killing_residual, 1e-12 * K)
                self.assertLess(report.second_derivative_residual, 1e-12 * K)
                self.assertLess(report.curvature_residual, 1e-12 * K)
                self.assertAlmostEqual(report.norm_value, math.sqrt((K - 1) / K), places=12)

    def test_riemannian_case(self):
        eps, lam = solve_ys(1.0)
        self.assertEqual((eps, lam), (1.0, 0.0))
        self.assertTrue(ys_criteria_check(1.0, lam, eps).is_riemannian)

    def test_no_real_solution(self):
        with self.assertRaises(NoRealSolutionError):
            solve_ys(0.5)

    def test_lambda_perturbation_breaks_curvature_criterion(self):
        K = 29.0
        eps, lam = solve_ys(K)
        perturbed = 1.01 * lam
        report = ys_criteria_check(K, perturbed, eps)
        self.assertEqual(report.failing(), ["curvature"])
        self.assertAlmostEqual(report.curvature_residual, abs(4 * perturbed**2 - 4 * (K - 1)), places=9)
        self.assertEqual(report.curvature_slot, (2, 3, 2, 3))

    def test_lambda_override_one(self):
        report = ys_criteria_check(29.0, 1.0, math.sqrt(29.0))
        self.assertAlmostEqual(report.curvature_residual, 108.0, places=9)
        self.assertLess(report.second_derivative_residual, 1e-12)

    def test_epsilon_perturbation_breaks_second_derivative_criterion(self):
        K = 29.0
        eps, lam = solve_ys(K)
        eps *= 1.01
        report = ys_criteria_check(K, lam, eps)
        self.assertIn("second_derivative", report.failing())
        self.assertAlmostEqual(report.second_derivative_residual, abs(lam * (K - eps * eps) / eps), places=9)
        self.assertLess(report.killing_residual, 1e-12)


class TestFrameSpray(unittest.TestCase):
    def test_printed_spray_curvature(self):
        K = 7.0
        np.testing.assert_allclose(
            riemann_spray_frame((1.0, 0.0, 0.0), K), [[0, 0, 0], [0, K, 0], [0, 0, K]], atol=1e-15
        )
        self.assertAlmostEqual(riemann_spray_frame((0.0, 1.0, 0.0), K)[2, 2], 4 - 3 * K)

    def test_spray_curvature_from_riemann_table(self):
        for y, K, _ in _frame_samples(20):
            R = riemann_frame(math.sqrt(K)).components
            np.testing.assert_allclose(
                riemann_spray_frame(y, K), np.einsum("q,qprs,s->pr", y, R, y), rtol=1e-12, atol=1e-12 * K
            )

    def test_spray_curvature_annihilates_y(self):
        for y, K, _ in _frame_samples(20):
            np.testing.assert_allclose(riemann_spray_frame(y, K) @ y, 0.0, atol=1e-11 * K * (y @ y) ** 1.5)

    def test_zeta_closed_form(self):
        np.testing.assert_allclose(zeta_frame((0.0, 1.0, 0.0), 2.0, 1), [0.0, 0.0, 1.0])
        np.testing.assert_allclose(zeta_frame((0.0, 0.0, 2.0), 5.0, -1), [0.0, 8.0, 0.0])

    def test_zeta_partials_against_finite_differences(self):
        for y in _frame_vectors(20):
            K, sign = 13.0, 1
            partials = zeta_partials(y, K, sign)
            for p in range(3):
                component = lambda v: zeta_frame(v, K, sign)[p]  # noqa: E731
                for q in range(3):
                    m = [0, 0, 0]
                    m[q] += 1
                    estimate = fd_partial(component, y, m, h=TEST_FD_STEP)
                    self.assertAlmostEqual(estimate, partials.first[p, q], delta=TEST_FD_TOL * max(1, abs(estimate)))
                    for t in range(3):
                        m2 = list(m)
                        m2[t] += 1
                        estimate = fd_partial(component, y, m2, h=TEST_FD_STEP)
                        self.assertAlmostEqual(
                            estimate, partials.second[p, q, t], delta=TEST_FD_SECOND_TOL * max(1, abs(estimate))
                        )

    def test_hcov_matches_connection_formula(self):
        for y, K, sign in _frame_samples(50):
            np.testing.assert_allclose(
                zeta_hcov(y, K, sign).values,
                zeta_hcov_from_connection(y, K, sign),
                rtol=1e-10,
                atol=1e-10 * K * (y @ y),
            )

    def test_hcov_partials_against_finite_differences(self):
        for y in _frame_vectors(10):
            K, sign = 4.0, -1
            partials = zeta_hcov(y, K, sign).partials
            for p in range(3):
                for r in range(3):
                    entry = lambda v: zeta_hcov(v, K, sign).values[p, r]  # noqa: E731
                    for t in range(3):
                        m = [0, 0, 0]
                        m[t] = 1
                        estimate = fd_partial(entry, y, m, h=TEST_FD_STEP)
                        self.assertAlmostEqual(estimate, partials[p, r, t], delta=TEST_FD_TOL * max(1, abs(estimate)))

    def test_printed_coincidences(self):
        for y, K, sign in _frame_samples(20):
            hcov = zeta_hcov(y, K, sign).values
            self.assertAlmostEqual(hcov[1, 1], hcov[2, 2])
            E = e_correction(y, K, sign)
            self.assertAlmostEqual(E[1, 2], E[2, 1], delta=1e-10 * max(1.0, abs(E[1, 2])))

    def test_e_correction_matches_assembly(self):
        for y, K, sign in _frame_samples(100):
            E = e_correction(y, K, sign, check=False)
            np.testing.assert_allclose(E, e_correction_assembled(y, K, sign), rtol=1e-10, atol=1e-10 * np.max(np.abs(E)))

    def test_tau_frame_definition(self):
        for y, K, sign in _frame_samples(20):
            alpha = np.linalg.norm(y)
            F = frame_finsler(y, K, sign)
            grad = y / alpha + np.array([sign * math.sqrt((K - 1) / K), 0.0, 0.0])
            expected = K * (F * F * np.eye(3) - F * np.outer(y, grad))
            np.testing.assert_allclose(tau_frame(y, K, sign), expected, rtol=1e-12, atol=1e-12 * K * F * F)

    def test_master_identity(self):
        for y, K, sign in _frame_samples(200):
            k_tau = tau_frame(y, K, sign)
            total = riemann_spray_frame(y, K) + e_correction(y, K, sign)
            scale = np.max(np.abs(k_tau))
            np.testing.assert_allclose(total, k_tau, rtol=0, atol=1e-10 * scale)

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.floats(-5, 5), min_size=3, max_size=3).filter(lambda y: sum(t * t for t in y) > 1e-2),
        st.floats(1.0, 400.0),
        st.sampled_from([1, -1]),
    )
    def test_master_identity_property(self, y, K, sign):
        k_tau = tau_frame(y, K, sign)
        total = riemann_spray_frame(y, K) + e_correction(y, K, sign, check=False)
        np.testing.assert_allclose(total, k_tau, rtol=0, atol=1e-10 * max(1.0, np.max(np.abs(k_tau))))


class TestFrameTables(unittest.TestCase):
    def test_names(self):
        names = FrameTables.names()
        for expected in ("connection", "riemann", "killing", "T", "calT", "ktilde", "zeta", "hcov", "E", "ktau"):
            self.assertIn(expected, names)

    def test_unknown_table(self):
        with self.assertRaises(ValueError) as ctx:
            render_table("nosuch", 4.0)
        self.assertIn("riemann", str(ctx.exception))

    def test_riemann_text(self):
        text = render_table("riemann", 4.0)
        self.assertIn("riemann[2,3,2,3] = 8", text.splitlines())
        self.assertIn("riemann[1,2,1,2] = -4", text.splitlines())

    def test_zeta_text_and_json(self):
        text = render_table("zeta", 2.0, 1, (0.0, 1.0, 0.0))
        self.assertIn("zeta = (0, 0, 1)", text.splitlines())
        data = json.loads(render_table("zeta", 2.0, 1, (0.0, 1.0, 0.0), fmt="json"))
        self.assertEqual(data["values"], [0.0, 0.0, 1.0])
        self.assertEqual(data["table"], "zeta")

    def test_render_is_stable(self):
        for name in FrameTables.names():
            self.assertEqual(render_table(name, 29.0, -1, (0.3, -0.4, 1.2)), render_table(name, 29.0, -1, (0.3, -0.4, 1.2)))

    def test_killing_table(self):
        eps, lam = solve_ys(29.0)
        values = FrameTables(29.0).get("killing")
        self.assertAlmostEqual(values[1, 2], -lam)
        self.assertAlmostEqual(values[2, 1], lam)


if __name__ == "__main__":
    unittest.main()
