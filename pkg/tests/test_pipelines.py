import json
import tempfile
import time
import unittest
from pathlib import Path

import numpy as np

from dirac_weyl.pipelines import fan_out, run_classify, run_defect, run_weyl
from dirac_weyl.report_io import REPORT_SCHEMA, Table, build_report, json_safe, write_report, write_table
from dirac_weyl.scenario import builtin, parse_scenario
from dirac_weyl.settings import Settings
from dirac_weyl.utils import ScenarioError, UnwarrantedRegimeError


class TestFanOut(unittest.TestCase):
    def test_grid_order(self):
        def task(lam):
            time.sleep(0.01 * (5 - lam.real))
            return lam.real

        grid = [complex(k, 1) for k in range(5)]
        self.assertListEqual(fan_out(task, grid, threads=3), [0.0, 1.0, 2.0, 3.0, 4.0])
        self.assertListEqual(fan_out(task, grid, threads=1), [0.0, 1.0, 2.0, 3.0, 4.0])

    def test_first_error_wins(self):
        def task(lam):
            if lam.real >= 2:
                raise ValueError(f"bad {lam.real:g}")
            return lam

        with self.assertRaises(ValueError) as cm:
            fan_out(task, [complex(k, 1) for k in range(4)], threads=4)
        self.assertEqual(str(cm.exception), "bad 2")


class TestReportIO(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        rows = [{"a": 0.5, "b": None, "ok": True}, {"a": 2.0, "ok": False}]
        self.table = Table("rows", ["a", "b", "ok"], rows)

    def tearDown(self):
        self.tmp.cleanup()

    def test_csv(self):
        path = write_table(self.table, self.dir)
        self.assertEqual(path.name, "rows.csv")
        lines = path.read_text().splitlines()
        self.assertListEqual(lines, ["a,b,ok", "0.5,,True", "2,,False"])

    def test_csv_float_format(self):
        path = write_table(Table("x", ["v"], [{"v": 0.1}]), self.dir)
        self.assertEqual(path.read_text().splitlines()[1], "0.10000000000000001")

    def test_json(self):
        path = write_table(self.table, self.dir, "json")
        self.assertListEqual(json.loads(path.read_text()), [
            {"a": 0.5, "b": None, "ok": True},
            {"a": 2.0, "b": None, "ok": False},
        ])

    def test_json_safe(self):
        value = {"z": 1 + 2j, "nan": np.float64("nan"), "flag": np.bool_(True), 3: np.arange(2)}
        self.assertDictEqual(json_safe(value), {"z": [1.0, 2.0], "nan": None, "flag": True, "3": [0, 1]})

    def test_report(self):
        report = build_report("weyl", {"name": "x"}, Settings(), [self.table], extra={"classification": {}})
        self.assertEqual(report["schema"], REPORT_SCHEMA)
        self.assertEqual(report["command"], "weyl")
        self.assertIn("weyl", report["settings"])
        self.assertEqual(len(report["tables"]["rows"]), 2)
        self.assertListEqual(report["verdicts"], [])
        self.assertIn("classification", report)
        path = write_report(report, self.dir)
        self.assertEqual(json.loads(path.read_text())["command"], "weyl")


class TestPipelines(unittest.TestCase):
    def test_classify(self):
        result = run_classify(builtin("free_dirac_p1"))
        row = result.tables[0].rows[0]
        self.assertTrue(row["formally_selfadjoint"])
        self.assertEqual((row["kappa_plus"], row["kappa_minus"]), (1, 1))
        self.assertListEqual(result.failures, [])

    def test_weyl_free(self):
        result = run_weyl(builtin("free_dirac_p1"), threads=2)
        table = result.tables[0]
        self.assertEqual(table.name, "msamples")
        self.assertEqual(len(table.rows), 4)
        self.assertListEqual(result.failures, [])
        for row in table.rows:
            self.assertTrue(row["converged"])
            self.assertAlmostEqual(row["M_0_0_re"], 0.0, places=7)
            self.assertAlmostEqual(row["M_0_0_im"], 1.0, places=7)
            self.assertLess(row["schur_norm"], 1e-7)
        self.assertListEqual([row["lam_im"] for row in table.rows], [1.0, 2.0, 3.0, 1.0])

    def test_weyl_refuses_strip(self):
        # Q = i·diag(0.2, 0.8): the strip is 0.2 <= Im λ <= 0.8
        scenario = parse_scenario({
            "expression": {"potential": {"family": "constant", "params": {
                "matrix": [[[0, 0.2], [0, 0]], [[0, 0], [0, 0.8]]]}}},
            "lambda_grid": {"points": [[0, 3], [0, 0.5]]},
        })
        with self.assertRaises(UnwarrantedRegimeError):
            run_weyl(scenario)

    def test_weyl_needs_half_line(self):
        with self.assertRaises(ScenarioError):
            run_weyl(builtin("finite_exp_decay_n2"))

    def test_defect_half_line(self):
        result = run_defect(builtin("almost_fsa_canonical"), threads=2)
        rows = result.tables[0].rows
        self.assertListEqual([r["count"] for r in rows], [1, 1])
        self.assertListEqual([r["status"] for r in rows], ["PASS", "PASS"])
        self.assertListEqual([r["regime"] for r in rows], ["upper", "lower"])

    def test_defect_finite(self):
        result = run_defect(builtin("finite_exp_decay_n2"))
        row = result.tables[0].rows[0]
        self.assertEqual(row["status"], "PASS")
        self.assertEqual(row["kernel_dim"], 4)
        self.assertEqual(len(result.extra["kernel_singular_values"]), 4)
        self.assertFalse(result.extra["kernel_rank_ambiguous"])


if __name__ == '__main__':
    unittest.main()
