import unittest

import numpy as np

from rlnn import exceptions
from rlnn.market import (
    PATH_BLOCK_SIZE,
    ExerciseSchedule,
    GbmModel,
    GbmModelSchema,
    ScheduleSchema,
    cholesky,
    derive_seed,
    evaluation_seed,
    normalization_scale,
    simulate_paths,
    standard_normals,
    substream,
)
from rlnn.presets import BASKET_CORRELATION, BASKET_VOLS


class CholeskyTestCase(unittest.TestCase):
    def test_reconstruction(self):
        corr = np.array(BASKET_CORRELATION)
        lower = cholesky(corr)
        self.assertTrue(np.allclose(lower @ lower.T, corr, rtol=0, atol=1e-12))
        self.assertTrue(np.allclose(lower, np.tril(lower)))

    def test_rank_deficient(self):
        corr = np.ones((3, 3))
        lower = cholesky(corr)
        self.assertTrue(np.allclose(lower @ lower.T, corr, rtol=0, atol=1e-12))

    def test_indefinite(self):
        corr = [[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]]
        self.assertRaises(exceptions.NotPositiveSemiDefinite, cholesky, corr)

    def test_not_symmetric(self):
        corr = [[1.0, 0.5], [0.2, 1.0]]
        self.assertRaises(exceptions.NotPositiveSemiDefinite, cholesky, corr)

    def test_no_unit_diagonal(self):
        self.assertRaises(
            exceptions.NotPositiveSemiDefinite, cholesky, [[2.0, 0.0], [0.0, 1.0]]
        )


class GbmModelTestCase(unittest.TestCase):
    def test_broadcast(self):
        model = GbmModel(1.0, rate=0.05, vol=0.2, dim=3)
        self.assertEqual(model.dim, 3)
        self.assertTrue(np.array_equal(model.spot, np.ones(3)))
        self.assertTrue(np.array_equal(model.corr, np.eye(3)))
        self.assertTrue(np.allclose(model.log_drift, 0.05 - 0.02))

    def test_covariance(self):
        model = GbmModel(
            1.0, rate=0.05, vol=BASKET_VOLS, corr=BASKET_CORRELATION, dim=5
        )
        self.assertAlmostEqual(model.covariance[0, 1], 0.79 * 0.518 * 0.648)

    def test_invalid(self):
        self.assertRaises(exceptions.ModelError, GbmModel, 0.0, rate=0.05, vol=0.2)
        self.assertRaises(exceptions.ModelError, GbmModel, 1.0, rate=0.05, vol=0.0)
        self.assertRaises(
            exceptions.NotPositiveSemiDefinite,
            GbmModel,
            [1.0, 1.0],
            rate=0.05,
            vol=0.2,
            corr=[[1.0, 1.5], [1.5, 1.0]],
        )

    def test_normalized(self):
        model = GbmModel([40.0, 20.0], rate=0.06, vol=0.2, dividend=0.1)
        normalized = model.normalized(40.0)
        self.assertTrue(np.array_equal(normalized.spot, [1.0, 0.5]))
        self.assertTrue(np.array_equal(normalized.dividend, model.dividend))
        self.assertEqual(normalization_scale(model), 40.0)

    def test_schema(self):
        model = GbmModel([1.0, 2.0], rate=0.05, vol=[0.2, 0.3], dividend=0.01)
        document = GbmModelSchema().dump(model)
        self.assertEqual(document["spot"], [1.0, 2.0])
        restored = GbmModelSchema().load(document)
        self.assertTrue(np.array_equal(restored.vol, model.vol))
        self.assertTrue(np.array_equal(restored.corr, model.corr))


class ExerciseScheduleTestCase(unittest.TestCase):
    def test_bermudan(self):
        schedule = ExerciseSchedule.bermudan(1.0, 10)
        self.assertEqual(schedule.n_dates, 10)
        self.assertEqual(schedule.maturity, 1.0)
        self.assertTrue(np.all(schedule.exercise))
        self.assertTrue(np.allclose(schedule.increments, 0.1))

    def test_european(self):
        schedule = ExerciseSchedule.european(0.2, 5)
        self.assertListEqual(schedule.exercise.tolist(), [False] * 5 + [True])
        self.assertAlmostEqual(schedule.times[1], 0.04)

    def test_invalid(self):
        for times in ([0.0], [0.1, 0.5], [0.0, 0.5, 0.5], [0.0, 1.0, 0.5]):
            self.assertRaises(exceptions.InvalidSchedule, ExerciseSchedule, times)
        self.assertRaises(
            exceptions.InvalidSchedule,
            ExerciseSchedule,
            [0.0, 1.0],
            exercise=[True],
        )

    def test_maturity_always_exercisable(self):
        schedule = ExerciseSchedule([0.0, 1.0], exercise=[False, False])
        self.assertTrue(schedule.exercise[-1])

    def test_schema(self):
        schedule = ExerciseSchedule.european(0.2, 5)
        restored = ScheduleSchema().load(ScheduleSchema().dump(schedule))
        self.assertTrue(np.array_equal(restored.times, schedule.times))
        self.assertTrue(np.array_equal(restored.exercise, schedule.exercise))


class SeedTestCase(unittest.TestCase):
    def test_derive_seed(self):
        seeds = {derive_seed(7, m) for m in range(20)}
        self.assertEqual(len(seeds), 20)
        self.assertEqual(derive_seed(7, 3), derive_seed(7, 3))
        self.assertNotEqual(derive_seed(7, 3), derive_seed(8, 3))

    def test_evaluation_seed(self):
        self.assertNotEqual(evaluation_seed(0), 0)
        self.assertNotEqual(evaluation_seed(1), evaluation_seed(2))

    def test_standard_normals(self):
        z = standard_normals(substream(1), 200000)
        self.assertTrue(np.all(np.isfinite(z)))
        self.assertLess(abs(np.mean(z)), 4.0 / np.sqrt(z.size))
        self.assertAlmostEqual(np.std(z), 1.0, delta=0.01)

    def test_substream_reproducible(self):
        a = substream(3, 1, 2).integers(0, 100, size=10)
        b = substream(3, 1, 2).integers(0, 100, size=10)
        c = substream(3, 2, 1).integers(0, 100, size=10)
        self.assertTrue(np.array_equal(a, b))
        self.assertFalse(np.array_equal(a, c))


class SimulatePathsTestCase(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.model = GbmModel(
            1.0, rate=0.05, vol=BASKET_VOLS, corr=BASKET_CORRELATION, dim=5
        )
        cls.schedule = ExerciseSchedule.bermudan(1.0, 4)
        cls.paths = simulate_paths(cls.model, cls.schedule, 20000, seed=11)

    def test_shape(self):
        self.assertEqual(self.paths.values.shape, (20000, 5, 5))
        self.assertEqual(self.paths.n_paths, 20000)
        self.assertEqual(self.paths.dim, 5)
        self.assertTrue(np.all(self.paths.values[:, 0] == 1.0))
        self.assertTrue(np.all(self.paths.values > 0))

    def test_immutable(self):
        with self.assertRaises(ValueError):
            self.paths.values[0, 0, 0] = 2.0

    def test_discounted_prices_are_martingales(self):
        discounted = np.exp(-self.model.rate) * self.paths.values[:, -1]
        se = np.std(discounted, axis=0, ddof=1) / np.sqrt(discounted.shape[0])
        deviation = np.abs(np.mean(discounted, axis=0) - 1.0) / se
        self.assertTrue(np.all(deviation < 4.0))

    def test_correlation(self):
        increments = np.diff(np.log(self.paths.values[:, :2]), axis=1)[:, 0]
        sample = np.corrcoef(increments.T)
        self.assertTrue(
            np.allclose(sample, BASKET_CORRELATION, rtol=0, atol=0.03), sample
        )

    def test_reproducible_and_thread_independent(self):
        n_paths = PATH_BLOCK_SIZE + 100
        single = simulate_paths(self.model, self.schedule, n_paths, seed=5)
        parallel = simulate_paths(self.model, self.schedule, n_paths, 5, threads=2)
        self.assertTrue(np.array_equal(single.values, parallel.values))

        other = simulate_paths(self.model, self.schedule, n_paths, seed=6)
        self.assertFalse(np.array_equal(single.values, other.values))

    def test_prefix_stable(self):
        # paths of a smaller run are the leading paths of a larger one
        small = simulate_paths(self.model, self.schedule, 100, seed=11)
        self.assertTrue(
            np.allclose(small.values, self.paths.values[:100], rtol=1e-14, atol=0)
        )

    def test_no_paths(self):
        self.assertRaises(
            exceptions.ModelError, simulate_paths, self.model, self.schedule, 0, 1
        )


if __name__ == "__main__":
    unittest.main()
