import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from dirac_weyl.scenario import builtin, builtin_names, load_scenario, parse_scenario
from dirac_weyl.utils import ScenarioError


class TestBuiltins(unittest.TestCase):
    def test_names(self):
        self.assertListEqual(builtin_names(), [
            "almost_fsa_canonical", "almost_fsa_diag_i", "almost_fsa_diag_minus_i",
            "exp_decay_p1", "finite_exp_decay_n2", "free_dirac_p1", "nls_offdiag_p2",
        ])

    def test_all_build(self):
        for name in builtin_names():
            scenario = builtin(name)
            self.assertEqual(scenario.name, name)
            expr = scenario.build_expression()
            self.assertEqual(expr.n, scenario.expression.n)
            self.assertGreater(len(scenario.grid()), 0)

    def test_unknown(self):
        with self.assertRaises(ScenarioError) as cm:
            builtin("hydrogen")
        self.assertIn("free_dirac_p1", str(cm.exception))
        self.assertEqual(cm.exception.exit_code, 2)

    def test_free_boundary(self):
        scheme = builtin("free_dirac_p1").boundary_scheme()
        self.assertEqual(scheme.theta.dim, 1)

    def test_echo_roundtrip(self):
        scenario = builtin("exp_decay_p1")
        again = parse_scenario(scenario.echo())
        self.assertDictEqual(again.echo(), scenario.echo())
        self.assertEqual(scenario.echo()["lambda_grid"]["rectangle"]["counts"], [3, 2])


class TestGrid(unittest.TestCase):
    def test_rectangle_order(self):
        grid = builtin("exp_decay_p1").grid()
        expected = [-1 + 1j, 1j, 1 + 1j, -1 + 2j, 2j, 1 + 2j]
        np.testing.assert_allclose(grid, expected)

    def test_points_accept_bare_reals(self):
        scenario = parse_scenario({"lambda_grid": {"points": [[0, 1], 2.5]}})
        np.testing.assert_array_equal(scenario.grid(), [1j, 2.5])


class TestValidation(unittest.TestCase):
    def assert_invalid(self, data, count=1):
        with self.assertRaises(ScenarioError) as cm:
            parse_scenario(data, "test.json")
        if count is None:
            self.assertTrue(cm.exception.errors)
        else:
            self.assertEqual(len(cm.exception.errors), count)
        self.assertIn("test.json", str(cm.exception))
        return cm.exception.errors

    def test_unknown_key(self):
        errors = self.assert_invalid({"expresion": {}})
        self.assertEqual(errors[0]["loc"], ("expresion",))

    def test_odd_dimension(self):
        self.assert_invalid({"expression": {"J": "canonical", "n": 3}})

    def test_unknown_family(self):
        self.assert_invalid({"expression": {"potential": {"family": "coulomb"}}})

    def test_empty_grid(self):
        self.assert_invalid({"lambda_grid": {"points": []}})
        self.assert_invalid({"lambda_grid": {}})

    def test_reversed_range(self):
        self.assert_invalid({"lambda_grid": {"rectangle": {"re": [1, 0], "im": [1, 2], "counts": [2, 2]}}})

    def test_one_boundary_form(self):
        self.assert_invalid({"boundary": {"phi": [[0]], "C1": [[1]], "C2": [[0]]}})
        self.assert_invalid({"boundary": {"C1": [[1]]}})

    def test_non_finite_entry(self):
        # every branch of the [re, im] | real union reports
        self.assert_invalid({"lambda_grid": {"points": [[float("nan"), 1.0]]}}, count=None)

    def test_schedule_overrides(self):
        scenario = parse_scenario({"schedule": {"L_max": 20.0}, "tolerances": {"rtol": 1e-8}})
        settings = scenario.settings()
        self.assertEqual(settings.weyl.L_max, 20.0)
        self.assertEqual(settings.integrator.rtol, 1e-8)
        with self.assertRaises(ScenarioError):
            parse_scenario({"schedule": {"L0": 10.0, "L_max": 5.0}}).settings()


class TestLoad(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_name_from_file(self):
        path = self.dir / "my_run.json"
        path.write_text(json.dumps({"expression": {"J": "diag_i", "n": 2}}))
        scenario = load_scenario(path)
        self.assertEqual(scenario.name, "my_run")
        self.assertEqual(scenario.expression.J, "diag_i")

    def test_missing_file(self):
        with self.assertRaises(ScenarioError) as cm:
            load_scenario(self.dir / "nope.json")
        self.assertIn("file not found", str(cm.exception))

    def test_bad_json(self):
        path = self.dir / "bad.json"
        path.write_text("{not json")
        with self.assertRaises(ScenarioError) as cm:
            load_scenario(path)
        self.assertIn("invalid JSON", str(cm.exception))

    def test_top_level_list(self):
        path = self.dir / "list.json"
        path.write_text("[]")
        with self.assertRaises(ScenarioError):
            load_scenario(path)


if __name__ == '__main__':
    unittest.main()
