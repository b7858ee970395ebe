import unittest
from unittest import mock

import numpy as np

from dirac_weyl.scenario import builtin
from dirac_weyl.settings import Settings
from dirac_weyl.verify_suite import SUITE, Outcome, run_suite, scenario_checks

SETTINGS = Settings()
MODULES = ("dirac_core", "boundary_algebra", "weyl_engine", "defect_lab")


def registered(module, name):
    return next(fn for m, n, fn in SUITE if (m, n) == (module, name))


class TestRegistry(unittest.TestCase):
    def test_every_module_has_checks(self):
        modules = {module for module, _, _ in SUITE}
        self.assertSetEqual(modules, set(MODULES))
        names = [(module, name) for module, name, _ in SUITE]
        self.assertEqual(len(names), len(set(names)))

    def test_invariants_registered(self):
        names = {name for _, name, _ in SUITE}
        for name in ("semigroup", "liouville_determinant", "classify_stable", "adjoint_kernel_count",
                     "j_symmetric_weyl_consistency", "regime_table_sweep", "schur_contraction"):
            self.assertIn(name, names)

    def test_raising_check_fails(self):
        def broken(settings):
            raise ZeroDivisionError("boom")

        def fine(settings):
            return Outcome(0.5, 1.0, True)

        suite = [("dirac_core", "broken", broken), ("defect_lab", "fine", fine)]
        with mock.patch("dirac_weyl.verify_suite.SUITE", suite):
            verdicts = run_suite(SETTINGS)
            self.assertEqual([v.status for v in verdicts], ["FAIL", "PASS"])
            self.assertTrue(np.isnan(verdicts[0].measured))
            self.assertIn("ZeroDivisionError", verdicts[0].detail)
            self.assertEqual(len(run_suite(SETTINGS, ["defect_lab"])), 1)


class TestChecks(unittest.TestCase):
    def test_dirac_core_passes(self):
        verdicts = run_suite(SETTINGS, ["dirac_core"])
        self.assertGreater(len(verdicts), 0)
        for v in verdicts:
            self.assertTrue(v.passed, f"{v.check}: {v.measured} vs {v.threshold} ({v.detail})")

    def test_scenario_checks(self):
        verdicts = scenario_checks(builtin("free_dirac_p1"), SETTINGS)
        # imag_identity and sign at each of the four grid points
        self.assertEqual(len(verdicts), 8)
        self.assertTrue(all(v.passed for v in verdicts))

    def test_scenario_checks_skip_finite(self):
        self.assertListEqual(scenario_checks(builtin("finite_exp_decay_n2"), SETTINGS), [])

    def test_defect_lab_consistency_checks(self):
        for name in ("adjoint_kernel_count", "j_symmetric_weyl_consistency"):
            out = registered("defect_lab", name)(SETTINGS)
            self.assertTrue(out.passed, f"{name}: {out.detail}")

    def test_sign_law_grid(self):
        for name in ("sign_law", "schur_contraction"):
            out = registered("weyl_engine", name)(SETTINGS)
            self.assertTrue(out.passed, f"{name}: {out.detail}")
        self.assertIn("100 λ-values", registered("weyl_engine", "sign_law")(SETTINGS).detail)
        self.assertTrue(registered("weyl_engine", "schur_contraction")(SETTINGS).detail.startswith("50 "))


if __name__ == '__main__':
    unittest.main()
