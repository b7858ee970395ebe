import tempfile
import unittest
from pathlib import Path

import confuse

import dirac_weyl
from dirac_weyl.settings import Settings, load_settings
from dirac_weyl.utils import ScenarioError

DEFAULT_CONFIG = Path(dirac_weyl.__file__).parent / "config_default.yaml"


def view_of(*paths, default=True) -> confuse.RootView:
    return confuse.RootView([confuse.YamlSource(str(p), default=default) for p in paths])


class TestShippedDefaults(unittest.TestCase):
    def test_loads_and_matches_model_defaults(self):
        settings = load_settings(view_of(DEFAULT_CONFIG))
        self.assertEqual(settings, Settings())

    def test_large_exponents_are_numbers(self):
        settings = load_settings(view_of(DEFAULT_CONFIG))
        self.assertEqual(settings.integrator.condition_warning, 1e12)
        self.assertEqual(settings.weyl.singular_condition, 1e12)
        self.assertEqual(settings.boundary.symplectic_condition_limit, 1e8)


class TestUserOverrides(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.user = Path(self.tmp.name) / "config.yaml"

    def tearDown(self):
        self.tmp.cleanup()

    def load(self, text: str) -> Settings:
        self.user.write_text(text)
        user = confuse.YamlSource(str(self.user))
        return load_settings(confuse.RootView([user, confuse.YamlSource(str(DEFAULT_CONFIG), default=True)]))

    def test_override(self):
        settings = self.load("weyl:\n  L_max: 80.0\noutput:\n  threads: 4\n")
        self.assertEqual(settings.weyl.L_max, 80.0)
        self.assertEqual(settings.output.threads, 4)
        self.assertEqual(settings.weyl.L0, Settings().weyl.L0)

    def test_unsigned_exponent_rejected(self):
        with self.assertRaises(ScenarioError):
            self.load("integrator:\n  condition_warning: 1.0e10\n")

    def test_out_of_range(self):
        with self.assertRaises(ScenarioError):
            self.load("weyl:\n  L0: 50.0\n  L_max: 40.0\n")


if __name__ == '__main__':
    unittest.main()
