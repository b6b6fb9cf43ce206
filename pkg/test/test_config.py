import os
import tempfile
import time
import unittest
from unittest import mock

from rlnn import THREADS_ENV_VAR
from rlnn.config import Configuration, InvalidConfigError


def write_config(content):
    filepath = tempfile.mkstemp()[1]
    with open(filepath, "w") as file:
        file.write(content)
    return filepath


class ConfigTestCase(unittest.TestCase):
    def test_sections(self):
        config = Configuration()
        self.assertSetEqual(
            set(config._parser.sections()),
            {"TRAINING", "SIMULATION", "EXPERIMENT", "OUTPUT", "MODEL"},
        )

    def test_get_option(self):
        config = Configuration()
        self.assertEqual(config.get_option("EXPERIMENT", "set"), "set1")
        self.assertEqual(config.get_option("SIMULATION", "n_train"), 50000)
        self.assertEqual(config.get_option("TRAINING", "learning_rate"), 0.001)
        self.assertDictEqual(
            config.get_section("SIMULATION"),
            {"n_train": 50000, "n_eval": 200000, "threads": 1},
        )

    def test_train_config(self):
        filepath = write_config("[TRAINING]\nmax_epochs = 5\npatience = 2\n")
        cfg = Configuration(filepath=filepath).train_config()
        self.assertEqual(cfg.max_epochs, 5)
        self.assertEqual(cfg.patience, 2)
        self.assertEqual(cfg.split, 0.7)

    def test_invalid_config(self):
        for content in (
            "[SIMULATION]\nn_train = many\n",
            "[SIMULATION]\nthreads = 0\n",
            "[EXPERIMENT]\nset = set9\n",
            "[OUTPUT]\nformat = xml\n",
            "[TRAINING]\ninput_space = moneyness\n",
            "[TRAINING]\nsplit = 1.0\n",
            "[TRAINING]\nlearning_rate = -0.1\n",
        ):
            filepath = write_config(content)
            self.assertRaises(InvalidConfigError, Configuration, filepath=filepath)

    def test_nonexisting_config_filepath(self):
        filepath = f"/tmp/{time.time()}"
        with self.assertRaises(InvalidConfigError) as cm:
            Configuration(filepath=filepath)
        self.assertTrue(
            cm.exception.args[0].endswith("Config filepath does not exist!")
        )

    def test_unknown_options_ignored(self):
        filepath = write_config("[SIMULATION]\nn_train = 10\ncolor = blue\n")
        config = Configuration(filepath=filepath)
        self.assertEqual(config.get_option("SIMULATION", "n_train"), 10)
        self.assertNotIn("color", config.get_section("SIMULATION"))


class ThreadsTestCase(unittest.TestCase):
    def test_default(self):
        with mock.patch.dict(os.environ):
            os.environ.pop(THREADS_ENV_VAR, None)
            self.assertEqual(Configuration().threads(), 1)

    def test_environment_takes_precedence(self):
        with mock.patch.dict(os.environ, {THREADS_ENV_VAR: "4"}):
            self.assertEqual(Configuration().threads(), 4)

    def test_invalid_environment(self):
        with mock.patch.dict(os.environ, {THREADS_ENV_VAR: "all"}):
            self.assertRaises(InvalidConfigError, Configuration().threads)


class ModelBlockTestCase(unittest.TestCase):
    def test_empty(self):
        self.assertIsNone(Configuration().model_block())

    def test_configured(self):
        filepath = write_config(
            "[MODEL]\nspot = 100, 100\nrate = 0.05\nvol = 0.2\n"
            "kind = max-call\nstrike = 100\nmaturity = 3\ndates = 9\n"
        )
        block = Configuration(filepath=filepath).model_block()
        self.assertEqual(block["spot"], "100, 100")
        self.assertEqual(block["kind"], "max-call")
        self.assertEqual(block["corr"], "")


if __name__ == "__main__":
    unittest.main()
