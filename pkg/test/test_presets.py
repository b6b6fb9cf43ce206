import unittest

import numpy as np

from rlnn import exceptions
from rlnn.payoff import ARITHMETIC_BASKET_PUT, DOWN_OUT_CALL, MAX_CALL, VANILLA_PUT
from rlnn.presets import (
    BASKET_WEIGHTS,
    model_from_block,
    parameter_set,
    reference_interval,
    reference_price,
)


class ParameterSetTestCase(unittest.TestCase):
    def test_bermudan_put(self):
        model, schedule, spec = parameter_set("set1")
        self.assertEqual(model.spot.tolist(), [40.0])
        self.assertEqual((model.rate, model.vol[0]), (0.06, 0.2))
        self.assertEqual(schedule.n_dates, 10)
        self.assertTrue(schedule.exercise.all())
        self.assertEqual((spec.kind, spec.strike), (VANILLA_PUT, 40.0))

        model, _, _ = parameter_set("set1", s0=36.0)
        self.assertEqual(model.spot[0], 36.0)

    def test_basket_put(self):
        model, schedule, spec = parameter_set("set2", s0=1.1)
        self.assertEqual(model.dim, 5)
        self.assertTrue(np.all(model.spot == 1.1))
        self.assertEqual(model.corr[0, 3], 0.91)
        self.assertEqual(spec.kind, ARITHMETIC_BASKET_PUT)
        self.assertTrue(np.array_equal(spec.basket_weights, BASKET_WEIGHTS))
        self.assertEqual(schedule.maturity, 1.0)

    def test_max_call(self):
        model, schedule, spec = parameter_set("set3", dim=5)
        self.assertEqual(model.dim, 5)
        self.assertTrue(np.all(model.dividend == 0.1))
        self.assertEqual(schedule.n_dates, 9)
        self.assertEqual(schedule.maturity, 3.0)
        self.assertEqual(spec.kind, MAX_CALL)
        self.assertEqual(parameter_set("set3")[0].dim, 2)

    def test_european_put(self):
        _, schedule, spec = parameter_set("set4", strike=1.5)
        self.assertListEqual(schedule.exercise.tolist(), [False, True])
        self.assertEqual(spec.strike, 1.5)

    def test_barrier(self):
        _, schedule, spec = parameter_set("set5")
        self.assertEqual(spec.kind, DOWN_OUT_CALL)
        self.assertEqual(spec.barrier, 0.97)
        self.assertEqual(schedule.n_dates, 5)
        self.assertAlmostEqual(schedule.times[1], 0.04)
        self.assertFalse(schedule.exercise[:-1].any())

        _, _, spec = parameter_set("set5", barrier=0.91)
        self.assertEqual(spec.barrier, 0.91)

    def test_errors(self):
        self.assertRaises(exceptions.InvalidConfigError, parameter_set, "set6")
        self.assertRaises(exceptions.InvalidConfigError, parameter_set, "set3", dim=4)
        self.assertRaises(exceptions.InvalidConfigError, parameter_set, "set1", dim=2)
        self.assertRaises(exceptions.InvalidPayoff, parameter_set, "set5", barrier=1.0)


class ReferenceTestCase(unittest.TestCase):
    def test_prices(self):
        self.assertEqual(reference_price("set1"), 2.2929)
        self.assertEqual(reference_price("set1", s0=36.0), 4.4425)
        self.assertEqual(reference_price("set2", s0=1.1), 0.1463)
        self.assertEqual(reference_price("set3", s0=90.0, dim=3), 11.29)
        self.assertIsNone(reference_price("set3", dim=5))
        self.assertIsNone(reference_price("set1", s0=38.0))
        self.assertIsNone(reference_price("set4"))

    def test_intervals(self):
        self.assertEqual(reference_interval("set3", dim=5), (26.115, 26.164))
        self.assertIsNone(reference_interval("set1"))


class ModelBlockTestCase(unittest.TestCase):
    def test_max_call_block(self):
        section = {
            "spot": "100, 100",
            "rate": "0.05",
            "vol": "0.2",
            "dividend": "0.1",
            "kind": MAX_CALL,
            "strike": "100",
            "maturity": "3",
            "dates": "9",
        }
        model, schedule, spec = model_from_block(section)
        self.assertEqual(model.dim, 2)
        self.assertTrue(np.array_equal(model.corr, np.eye(2)))
        self.assertEqual(schedule.n_dates, 9)
        self.assertEqual(spec.strike, 100.0)

    def test_correlation_and_barrier(self):
        section = {
            "spot": "1, 1",
            "rate": "0.1",
            "vol": "0.3, 0.2",
            "corr": "1, 0.5; 0.5, 1",
            "kind": "basket-put",
            "weights": "0.5, 0.5",
            "strike": "1",
            "maturity": "1",
        }
        model, schedule, spec = model_from_block(section)
        self.assertEqual(model.corr[0, 1], 0.5)
        self.assertEqual(schedule.n_dates, 1)

        section = {
            "spot": "1",
            "rate": "0.1",
            "vol": "0.3",
            "kind": DOWN_OUT_CALL,
            "strike": "1",
            "barrier": "0.95",
            "maturity": "0.2",
            "dates": "5",
        }
        _, schedule, spec = model_from_block(section)
        self.assertFalse(schedule.exercise[0])
        self.assertEqual(spec.barrier, 0.95)

    def test_errors(self):
        base = {"spot": "1", "rate": "0.1", "vol": "0.3", "strike": "1"}
        self.assertRaises(exceptions.InvalidConfigError, model_from_block, base)
        self.assertRaises(
            exceptions.InvalidConfigError,
            model_from_block,
            dict(base, maturity="1", rate="high"),
        )
        self.assertRaises(
            exceptions.InvalidConfigError,
            model_from_block,
            dict(base, maturity="1", rate="0.1, 0.2"),
        )
        self.assertRaises(
            exceptions.InvalidConfigError,
            model_from_block,
            dict(base, maturity="1", kind="asian"),
        )
        self.assertRaises(
            exceptions.NotPositiveSemiDefinite,
            model_from_block,
            dict(base, maturity="1", spot="1, 1", corr="1, 2; 2, 1"),
        )


if __name__ == "__main__":
    unittest.main()
