import unittest

import numpy as np

from rlnn import exceptions
from rlnn.market import simulate_paths
from rlnn.payoff import (
    ARITHMETIC_BASKET_PUT,
    DOWN_OUT_CALL,
    MAX_CALL,
    VANILLA_CALL,
    VANILLA_PUT,
    PayoffSchema,
    PayoffSpec,
    SurvivalState,
    intrinsic,
    survival_matrix,
    update_survival,
)
from rlnn.presets import parameter_set


class IntrinsicTestCase(unittest.TestCase):
    def test_vanilla(self):
        s = np.array([[36.0], [44.0]])
        put = PayoffSpec(VANILLA_PUT, 40.0)
        call = PayoffSpec(VANILLA_CALL, 40.0)
        self.assertListEqual(intrinsic(put, s).tolist(), [4.0, -4.0])
        self.assertListEqual(intrinsic(call, s).tolist(), [-4.0, 4.0])

    def test_basket_put(self):
        spec = PayoffSpec(ARITHMETIC_BASKET_PUT, 1.0, basket_weights=[0.5, 0.5])
        self.assertAlmostEqual(intrinsic(spec, [0.8, 1.0]), 0.1)

    def test_max_call(self):
        spec = PayoffSpec(MAX_CALL, 100.0)
        s = np.array([[90.0, 120.0, 95.0], [80.0, 85.0, 90.0]])
        self.assertListEqual(intrinsic(spec, s).tolist(), [20.0, -10.0])

    def test_missing_fields(self):
        basket = PayoffSpec(ARITHMETIC_BASKET_PUT, 1.0)
        barrier = PayoffSpec(DOWN_OUT_CALL, 1.0)
        self.assertRaises(exceptions.MissingField, intrinsic, basket, [1.0, 1.0])
        self.assertRaises(exceptions.MissingField, intrinsic, barrier, [1.0])
        self.assertRaises(exceptions.MissingField, basket.validate, [1.0, 1.0])
        self.assertRaises(exceptions.MissingField, barrier.validate, [1.0])

    def test_invalid(self):
        self.assertRaises(exceptions.InvalidPayoff, PayoffSpec, "digital", 1.0)
        self.assertRaises(exceptions.InvalidPayoff, PayoffSpec, VANILLA_PUT, 0.0)

        spec = PayoffSpec(DOWN_OUT_CALL, 1.0, barrier=1.0)
        self.assertRaises(exceptions.InvalidPayoff, spec.validate, [1.0])
        spec = PayoffSpec(ARITHMETIC_BASKET_PUT, 1.0, basket_weights=[1.0])
        self.assertRaises(exceptions.InvalidPayoff, spec.validate, [1.0, 1.0])

    def test_scaled(self):
        spec = PayoffSpec(DOWN_OUT_CALL, 40.0, barrier=38.0).scaled(40.0)
        self.assertEqual(spec.strike, 1.0)
        self.assertEqual(spec.barrier, 0.95)
        self.assertIsNone(PayoffSpec(VANILLA_PUT, 40.0).scaled(4.0).barrier)

    def test_schema(self):
        spec = PayoffSpec(ARITHMETIC_BASKET_PUT, 1.0, basket_weights=[0.3, 0.7])
        restored = PayoffSchema().load(PayoffSchema().dump(spec))
        self.assertEqual(restored.kind, ARITHMETIC_BASKET_PUT)
        self.assertListEqual(restored.basket_weights.tolist(), [0.3, 0.7])
        self.assertIsNone(restored.barrier)


class SurvivalTestCase(unittest.TestCase):
    def setUp(self):
        self.spec = PayoffSpec(DOWN_OUT_CALL, 1.0, barrier=0.97)

    def test_knocked_out_stays_out(self):
        values = np.array(
            [
                [[1.0], [0.95], [1.0], [1.1]],
                [[1.0], [0.98], [0.99], [1.0]],
                [[1.0], [1.0], [0.97], [1.2]],
            ]
        )
        alive = survival_matrix(self.spec, values)
        self.assertListEqual(
            alive.tolist(),
            [
                [True, False, False, False],
                [True, True, True, True],
                # touching the barrier knocks out
                [True, True, False, False],
            ],
        )

    def test_no_barrier(self):
        state = SurvivalState.initial(2)
        spec = PayoffSpec(VANILLA_PUT, 1.0)
        state = update_survival(state, np.array([[0.1], [0.2]]), spec)
        self.assertTrue(np.all(state.alive))

    def test_update(self):
        state = SurvivalState(np.array([True, False, True]))
        state = update_survival(state, np.array([[1.0], [1.0], [0.5]]), self.spec)
        self.assertListEqual(state.alive.tolist(), [True, False, False])

    def test_value_decreases_with_barrier(self):
        model, schedule, _ = parameter_set("set5")
        paths = simulate_paths(model, schedule, 20000, seed=3)
        discount = np.exp(-model.rate * schedule.times[-1])
        previous_alive, previous_value = None, None
        for barrier in (0.91, 0.93, 0.95, 0.97):
            spec = PayoffSpec(DOWN_OUT_CALL, 1.0, barrier=barrier)
            alive = survival_matrix(spec, paths.values)[:, -1]
            payoff = np.maximum(intrinsic(spec, paths.values[:, -1]), 0.0) * alive
            value = discount * payoff.mean()
            if previous_alive is not None:
                # a higher barrier knocks out a subset of the surviving paths
                self.assertFalse(np.any(alive & ~previous_alive))
                self.assertLess(value, previous_value)
            previous_alive, previous_value = alive, value


if __name__ == "__main__":
    unittest.main()
