import unittest

import numpy as np

from dirac_weyl.boundary_algebra import Completion
from dirac_weyl.dirac_core import DiracExpression, Interval, SignatureMatrix, SymmetryReport, classify
from dirac_weyl.potentials import ConstantPotential, ExpDecayPotential, ZeroPotential
from dirac_weyl.settings import Settings
from dirac_weyl.utils import (
    BoundarySingularError,
    CayleyError,
    ContractViolation,
    UnsupportedFrameError,
    UnwarrantedRegimeError,
)
from dirac_weyl.weyl_engine import (
    TruncationSchedule,
    cauchy_riemann_residual,
    cayley,
    decaying_subspace,
    frozen_stable_subspace,
    regime_of,
    schur_l2_check,
    sign_check,
    verify_l2_characterization,
    weyl_function_from_boundary,
    weyl_solution,
    whole_line_product_scan,
)

SETTINGS = Settings()
J1 = SignatureMatrix.canonical(1)
IDENTITY = Completion.identity(J1)


def free(interval=None):
    return DiracExpression(J1, ZeroPotential(2), interval or Interval.half_line(40))


def report(alpha, beta, almost=True):
    return SymmetryReport(alpha == beta == 0, False, almost, alpha, beta, 1)


class TestSchedule(unittest.TestCase):
    def test_lengths(self):
        sched = TruncationSchedule(5.0, 2.0, 40.0, 1e-9)
        self.assertListEqual(sched.lengths(), [5.0, 10.0, 20.0, 40.0])
        self.assertListEqual(sched.lengths(cap=30.0), [5.0, 10.0, 20.0, 30.0])
        self.assertListEqual(TruncationSchedule(5.0, 2.0, 5.0, 1e-9).lengths(), [5.0])

    def test_invalid(self):
        with self.assertRaises(ContractViolation):
            TruncationSchedule(5.0, 1.0, 40.0, 1e-9).validated()
        with self.assertRaises(ContractViolation):
            TruncationSchedule(50.0, 2.0, 40.0, 1e-9).validated()

    def test_from_settings(self):
        self.assertEqual(TruncationSchedule.from_settings(SETTINGS), TruncationSchedule())


class TestRegimes(unittest.TestCase):
    def test_regime_of(self):
        r = report(0.5, 0.5)
        self.assertEqual(regime_of(2j, r), "upper")
        self.assertEqual(regime_of(-2j, r), "lower")
        self.assertEqual(regime_of(0.5j, r), "strip")
        self.assertEqual(regime_of(1 + 0.2j, report(0.1, 0.3)), "strip")
        self.assertEqual(regime_of(2j, report(None, None, almost=False)), "unclassified")

    def test_strip_refused_before_work(self):
        expr = DiracExpression(J1, ConstantPotential(0.5j * np.eye(2)))
        with self.assertRaises(UnwarrantedRegimeError) as cm:
            weyl_solution(expr, IDENTITY, 0.5j, settings=SETTINGS)
        self.assertEqual(cm.exception.exit_code, 3)

    def test_needs_canonical_frame(self):
        expr = DiracExpression(SignatureMatrix.diag_i(1), ZeroPotential(2))
        with self.assertRaises(UnsupportedFrameError):
            weyl_solution(expr, IDENTITY, 1j, settings=SETTINGS)


class TestFreeDirac(unittest.TestCase):
    def test_weyl_function_is_i(self):
        for lam in (1j, 2j, 3j, 1 + 1j):
            sample = weyl_solution(free(), IDENTITY, lam, settings=SETTINGS)
            self.assertTrue(sample.converged)
            self.assertEqual(sample.regime, "upper")
            self.assertLess(abs(sample.M[0, 0] - 1j), 1e-8)
            self.assertLess(sample.norm_residual, 1e-8)
            self.assertLess(sample.identity_residuals["imag_identity"], 1e-6)
            self.assertLess(sample.identity_residuals["pair_identity"], 1e-6)

    def test_lower_half_plane(self):
        sample = weyl_solution(free(), IDENTITY, -1j, settings=SETTINGS)
        self.assertTrue(sample.converged)
        self.assertLess(abs(sample.M[0, 0] + 1j), 1e-8)
        self.assertEqual(sign_check(sample, free(), settings=SETTINGS).side, "lower")

    def test_record(self):
        rec = weyl_solution(free(), IDENTITY, 2j, settings=SETTINGS).to_record()
        self.assertEqual(rec["lam_im"], 2.0)
        self.assertAlmostEqual(rec["M_0_0_im"], 1.0, places=8)
        self.assertTrue(rec["converged"])

    def test_sign(self):
        sample = weyl_solution(free(), IDENTITY, 1j, settings=SETTINGS)
        check = sign_check(sample, free(), settings=SETTINGS)
        self.assertEqual(check.side, "upper")
        self.assertAlmostEqual(check.min_eig_imM, 1.0, places=8)

    def test_l2_characterization(self):
        good = verify_l2_characterization(free(), 1j, np.array([[1j]]), IDENTITY, settings=SETTINGS)
        self.assertEqual(good.verdict, "weyl")
        self.assertTrue(good.is_weyl)
        self.assertTrue(good.probe_grows)
        bad = verify_l2_characterization(free(), 1j, np.array([[-1j]]), IDENTITY, settings=SETTINGS)
        self.assertEqual(bad.verdict, "not_weyl")
        self.assertFalse(bad.is_weyl)

    def test_perturbed_value_is_not_weyl(self):
        # (1, i + 0.001) picks up 0.0005i of the growing solution (1, -i)e^x
        bad = verify_l2_characterization(free(), 1j, np.array([[1j + 0.001]]), IDENTITY, settings=SETTINGS)
        self.assertEqual(bad.verdict, "not_weyl")
        self.assertAlmostEqual(bad.growth_exponent, 2.0, delta=0.05)

    def test_decaying_subspace(self):
        sub = decaying_subspace(free(), 1j, settings=SETTINGS)
        self.assertTrue(sub.converged)
        v1, v2 = sub.solution.at0[:, 0]
        self.assertLess(abs(v2 / v1 - 1j), 1e-8)

    def test_whole_line_product(self):
        expr = free(Interval.whole_line(40))
        scan = whole_line_product_scan(expr, 1j, np.linspace(-5, 5, 101), SETTINGS)
        self.assertLess(abs(scan.sup_estimate - 0.25), 1e-3)
        self.assertEqual(scan.profile.shape, (101,))
        with self.assertRaises(ContractViolation):
            whole_line_product_scan(free(), 1j, [0.0], SETTINGS)


class TestBoundaryMaps(unittest.TestCase):
    def test_gauge_invariance(self):
        rng = np.random.default_rng(2)
        J = SignatureMatrix.canonical(2)
        comp = Completion.identity(J)
        v0 = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
        R = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        M = weyl_function_from_boundary(comp, v0, 1e12)
        np.testing.assert_allclose(weyl_function_from_boundary(comp, v0 @ R, 1e12), M, atol=1e-12)

    def test_singular_boundary_matrix(self):
        with self.assertRaises(BoundarySingularError) as cm:
            weyl_function_from_boundary(IDENTITY, np.array([[0.0], [1.0]]), 1e12, 1j)
        self.assertIn("resolvent", str(cm.exception))

    def test_cayley(self):
        self.assertLess(cayley(np.array([[1j]])).operator_norm, 1e-15)
        schur = cayley(np.array([[0.5 + 2j]]))
        self.assertLess(schur.operator_norm, 1)
        with self.assertRaises(CayleyError):
            cayley(np.array([[-1j]]))

    def test_schur_l2_check(self):
        expr = DiracExpression(SignatureMatrix.diag_minus_i(1), ZeroPotential(2))
        self.assertEqual(schur_l2_check(expr, 1j, np.array([[0.0]]), settings=SETTINGS).verdict, "weyl")
        self.assertEqual(schur_l2_check(expr, 1j, np.array([[0.5]]), settings=SETTINGS).verdict, "not_weyl")
        with self.assertRaises(ContractViolation):
            schur_l2_check(free(), 1j, np.array([[0.0]]), settings=SETTINGS)


class TestConstantAndDecaying(unittest.TestCase):
    Q0 = np.array([[1 + 0.3j, 0.5], [0.5, -1 + 0.3j]])

    def test_constant_coefficient_closed_form(self):
        expr = DiracExpression(J1, ConstantPotential(self.Q0))
        for lam in (2j, 1 + 1.5j, -3j):
            W = frozen_stable_subspace(expr, lam, 0.0)
            self.assertEqual(W.shape[1], 1)
            expected = W[1, 0] / W[0, 0]
            sample = weyl_solution(expr, IDENTITY, lam, settings=SETTINGS)
            self.assertTrue(sample.converged)
            self.assertLess(abs(sample.M[0, 0] - expected), 1e-8)

    def test_truncation_path_independence(self):
        expr = DiracExpression(J1, ExpDecayPotential(self.Q0, mu=1.0))
        a = weyl_solution(expr, IDENTITY, 1.5j, settings=SETTINGS)
        b = weyl_solution(expr, IDENTITY, 1.5j, TruncationSchedule(4.0, 1.5, 40.0, 1e-9), SETTINGS)
        self.assertTrue(a.converged and b.converged)
        self.assertLess(np.abs(a.M - b.M).max(), 1e-8)

    def test_holomorphy(self):
        expr = DiracExpression(J1, ExpDecayPotential(self.Q0, mu=1.0))
        self.assertLess(cauchy_riemann_residual(expr, IDENTITY, 2j, settings=SETTINGS), 1e-3)

    def test_sign_and_contraction_sweep(self):
        # Im Q = 0.3 e^{-x}: the strip is [0, 0.3]
        expr = DiracExpression(J1, ExpDecayPotential(self.Q0, mu=1.0))
        rep = classify(expr, settings=SETTINGS)
        for re in np.linspace(-2, 2, 5):
            for d in (1.0, 2.0, 3.0):
                above, below = (
                    weyl_solution(expr, IDENTITY, lam, settings=SETTINGS, report=rep)
                    for lam in (complex(re, rep.beta + d), complex(re, rep.alpha - d))
                )
                self.assertTrue(above.converged and below.converged)
                self.assertEqual(sign_check(above, expr, rep).side, "upper")
                self.assertGreater(sign_check(above, expr, rep).min_eig_imM, 0)
                self.assertLess(sign_check(below, expr, rep).min_eig_imM, 0)
                self.assertLess(cayley(above.M, above.lam).operator_norm, 1)


if __name__ == '__main__':
    unittest.main()
