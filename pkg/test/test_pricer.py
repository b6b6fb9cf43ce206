import unittest

import numpy as np

from rlnn import exceptions
from rlnn.analytic import continuation_value
from rlnn.market import ExerciseSchedule, GbmModel
from rlnn.network import PRICE, FitReport, ShallowNet, TrainConfig, forward
from rlnn.payoff import VANILLA_PUT, PayoffSpec
from rlnn.presets import parameter_set
from rlnn.pricer import (
    RlnnResult,
    exercise_decision,
    network_inputs,
    rlnn_backward,
    updated_values,
)

# short training runs keep the tests fast
FAST_CONFIG = TrainConfig(learning_rate=1e-2, max_epochs=30)


class BermudanPutTestCase(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.model, cls.schedule, cls.spec = parameter_set("set1")
        cls.result = rlnn_backward(
            cls.model, cls.schedule, cls.spec, 3000, 4, FAST_CONFIG, seed=1
        )

    def test_networks(self):
        self.assertSetEqual(set(self.result.nets), set(range(1, 11)))
        self.assertSetEqual(set(self.result.fit_reports), set(range(1, 11)))
        for net in self.result.nets.values():
            self.assertEqual((net.hidden, net.dim), (4, 1))
        self.assertEqual(self.result.scale, 40.0)
        self.assertEqual(self.result.hidden, 4)
        self.assertEqual(self.result.input_space, "log")

    def test_direct_estimate(self):
        direct = self.result.direct_estimate
        # loose range around the reference value 2.2929
        self.assertGreater(direct, 1.0)
        self.assertLess(direct, 4.0)
        # at the money, the direct estimate is the continuation value at t_0
        self.assertAlmostEqual(
            direct,
            max(0.0, self.result.continuation_value(0, self.model.spot)),
            places=12,
        )

    def test_reproducible(self):
        again = rlnn_backward(
            self.model, self.schedule, self.spec, 3000, 4, FAST_CONFIG, seed=1
        )
        self.assertEqual(again.direct_estimate, self.result.direct_estimate)
        parallel = rlnn_backward(
            self.model, self.schedule, self.spec, 3000, 4, FAST_CONFIG, 1, threads=2
        )
        self.assertEqual(parallel.direct_estimate, self.result.direct_estimate)

    def test_network_value_in_currency(self):
        s = np.array([[36.0], [40.0], [44.0]])
        expected = 40.0 * forward(self.result.nets[3], np.log(s / 40.0))
        self.assertTrue(np.allclose(self.result.network_value(3, s), expected))

    def test_continuation_value_in_currency(self):
        s = np.array([[36.0], [44.0]])
        expected = 40.0 * continuation_value(
            self.result.nets[5], s / 40.0, self.model, self.schedule.increments[4]
        )
        self.assertTrue(
            np.allclose(self.result.continuation_value(4, s), expected, rtol=1e-14)
        )

    def test_document(self):
        restored = RlnnResult.from_dict(self.result.to_dict())
        self.assertEqual(restored.direct_estimate, self.result.direct_estimate)
        self.assertEqual(restored.scale, self.result.scale)
        self.assertSetEqual(set(restored.nets), set(range(1, 11)))
        self.assertTrue(np.array_equal(restored.nets[7].w1, self.result.nets[7].w1))
        self.assertEqual(restored.payoff.strike, 40.0)
        s = np.array([[38.0]])
        self.assertEqual(
            restored.continuation_value(2, s), self.result.continuation_value(2, s)
        )

    def test_malformed_document(self):
        document = self.result.to_dict()
        del document["nets"]["4"]
        self.assertRaises(exceptions.NetworkError, RlnnResult.from_dict, document)


class PriceSpaceTestCase(unittest.TestCase):
    def test_single_asset(self):
        model, schedule, spec = parameter_set("set1")
        result = rlnn_backward(
            model, schedule, spec, 2000, 3, FAST_CONFIG, seed=2, input_space=PRICE
        )
        self.assertEqual(result.input_space, PRICE)
        self.assertTrue(np.isfinite(result.direct_estimate))
        self.assertGreaterEqual(result.direct_estimate, 0.0)

    def test_multi_asset(self):
        model, schedule, spec = parameter_set("set3")
        self.assertRaises(
            exceptions.InputSpaceMismatch,
            rlnn_backward,
            model,
            schedule,
            spec,
            2000,
            3,
            FAST_CONFIG,
            2,
            input_space=PRICE,
        )


class BarrierTestCase(unittest.TestCase):
    def test_down_and_out_call(self):
        model, schedule, spec = parameter_set("set5")
        result = rlnn_backward(model, schedule, spec, 3000, 4, FAST_CONFIG, seed=3)
        self.assertSetEqual(set(result.nets), set(range(1, 6)))
        # no early exercise: the direct estimate is the continuation value
        self.assertAlmostEqual(
            result.direct_estimate,
            result.continuation_value(0, model.spot),
            places=12,
        )
        self.assertGreater(result.direct_estimate, 0.0)


class DegenerateModelTestCase(unittest.TestCase):
    def test_worthless_put(self):
        # with negligible volatility the put stays far out of the money
        model = GbmModel(40.0, rate=0.06, vol=1e-8)
        schedule = ExerciseSchedule.bermudan(1.0, 4)
        spec = PayoffSpec(VANILLA_PUT, 30.0)
        result = rlnn_backward(model, schedule, spec, 500, 3, FAST_CONFIG, seed=0)
        self.assertEqual(result.direct_estimate, 0.0)
        self.assertTrue(all(r.degenerate for r in result.fit_reports.values()))


class BackwardStepTestCase(unittest.TestCase):
    def test_exercise_decision(self):
        h = np.array([1.0, 1.0, 0.5])
        q = np.array([0.5, 1.0, 1.0])
        # ties continue
        self.assertListEqual(exercise_decision(h, q).tolist(), [True, False, False])

    def test_updated_values(self):
        h = np.array([2.0, 0.5, -1.0, 3.0])
        q = np.array([1.0, 1.0, 0.2, 0.5])
        alive = np.array([True, True, True, False])
        self.assertListEqual(
            updated_values(h, q, alive, True).tolist(), [2.0, 1.0, 0.2, 0.0]
        )
        self.assertListEqual(
            updated_values(h, q, alive, False).tolist(), [1.0, 1.0, 0.2, 0.0]
        )

    def test_network_inputs(self):
        s = np.array([[1.0], [np.e]])
        self.assertTrue(np.allclose(network_inputs(s, "log"), [[0.0], [1.0]]))
        self.assertIs(network_inputs(s, PRICE), s)


class RlnnResultTestCase(unittest.TestCase):
    def test_missing_networks(self):
        model, schedule, spec = parameter_set("set5")
        net = ShallowNet.initialize(2, 1, seed=0)
        report = FitReport(0.0, 0.0, 1, False)
        self.assertRaises(
            exceptions.NetworkError,
            RlnnResult,
            nets={1: net, 2: net},
            direct_estimate=0.1,
            fit_reports={1: report, 2: report},
            model=model,
            schedule=schedule,
            payoff=spec,
            scale=1.0,
            seed=0,
            hidden=2,
        )


if __name__ == "__main__":
    unittest.main()
