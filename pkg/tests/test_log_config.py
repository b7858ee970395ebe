import logging
import threading
import unittest
from unittest import mock

from dirac_weyl.log_config import DuplicateMessageFilter, ModuleFilter


def record(msg, level=logging.WARNING, module="dirac_core"):
    rec = logging.LogRecord("dirac_weyl", level, f"{module}.py", 1, msg, None, None)
    rec.module = module
    return rec


class TestDuplicateMessageFilter(unittest.TestCase):
    def setUp(self):
        self.filter = DuplicateMessageFilter()

    def passed(self, *records):
        return [self.filter.filter(r) for r in records]

    def test_consecutive_repeats_dropped(self):
        self.assertListEqual(self.passed(
            record("λ=1j: converged at L=10"),
            record("Ill-conditioned fundamental matrix at x=31.5"),
            record("Ill-conditioned fundamental matrix at x=32.0"),
            record("λ=2j: converged at L=10"),
            record("Ill-conditioned fundamental matrix at x=31.5"),
        ), [True, True, False, True, True])

    def test_per_thread(self):
        def in_worker(*records):
            out = []
            worker = threading.Thread(target=lambda: out.extend(self.passed(*records)))
            worker.start()
            worker.join()
            return out

        self.assertListEqual(self.passed(record("Step size underflow at x=3")), [True])
        self.assertListEqual(in_worker(
            record("Step size underflow at x=3"),
            record("Step size underflow at x=4"),
        ), [True, False])
        # a new worker starts without the state of finished ones
        self.assertListEqual(in_worker(record("Step size underflow at x=5")), [True])
        self.assertListEqual(self.passed(record("Step size underflow at x=6")), [False])

    def test_switching_noise_kind(self):
        self.assertListEqual(self.passed(
            record("Step size underflow at x=3"),
            record("Ill-conditioned fundamental matrix at x=3"),
            record("Step size underflow at x=3"),
        ), [True, True, True])

    def test_non_string_message(self):
        self.assertTrue(self.filter.filter(record(ValueError("x"))))


class TestModuleFilter(unittest.TestCase):
    def test_min_levels(self):
        with mock.patch.object(ModuleFilter, "min_levels", {"weyl_engine": logging.ERROR}):
            f = ModuleFilter()
            self.assertFalse(f.filter(record("x", module="weyl_engine")))
            self.assertTrue(f.filter(record("x", level=logging.ERROR, module="weyl_engine")))
            self.assertTrue(f.filter(record("x", level=logging.DEBUG, module="pipelines")))


if __name__ == '__main__':
    unittest.main()
