"""Lower bound from the learned exercise policy and dual upper bound from the
martingale built out of the trained networks, both on fresh paths."""
import numpy as np

from . import init_logger
from .market import evaluation_seed, simulate_paths
from .payoff import intrinsic, survival_matrix
from .pricer import exercise_decision

logger = init_logger(__name__)

# two-sided 95% quantile of the standard normal
Z_95 = 1.96


class BoundReport:
    """Lower and upper bound with their path-wise standard errors."""

    def __init__(self, lower, lower_se, upper, upper_se, n_paths, direct=None):
        self.lower = float(lower)
        self.lower_se = float(lower_se)
        self.upper = float(upper)
        self.upper_se = float(upper_se)
        self.n_paths = int(n_paths)
        self.direct = direct

    @property
    def ci95(self):
        return (self.lower - Z_95 * self.lower_se, self.upper + Z_95 * self.upper_se)

    @property
    def gap(self):
        return self.upper - self.lower


def _mean_and_se(samples):
    n_samples = samples.size
    if n_samples < 2:
        return float(np.mean(samples)), 0.0
    return float(np.mean(samples)), float(np.std(samples, ddof=1) / np.sqrt(n_samples))


class _Evaluation:
    """Quantities shared by both bounds on one set of fresh paths."""

    def __init__(self, result, model, schedule, spec, values):
        times = schedule.times
        n_paths, n_times = values.shape[:2]

        self.schedule = schedule
        self.alive = survival_matrix(spec, values)
        self.discount = np.exp(-model.rate * times)
        # max(h, 0) on alive paths
        self.payoff = np.stack(
            [np.maximum(intrinsic(spec, values[:, m]), 0.0) for m in range(n_times)],
            axis=1,
        ) * self.alive

        self.continuation = np.zeros((n_paths, n_times - 1))
        self.network = np.zeros((n_paths, n_times))
        for m in range(n_times - 1):
            live = self.alive[:, m]
            self.continuation[live, m] = result.continuation_value(
                m, values[live, m], model=model
            )
            self.network[live, m + 1] = result.network_value(m + 1, values[live, m + 1])

    def martingale(self):
        """Martingale M on all dates, N × (M+1), M(t_0) = 0."""
        increments = self.alive[:, :-1] * (
            self.discount[1:] * self.network[:, 1:]
            - self.discount[:-1] * self.continuation
        )
        martingale = np.zeros(self.network.shape)
        np.cumsum(increments, axis=1, out=martingale[:, 1:])
        return martingale

    def stopped_payoffs(self):
        """Discounted payoff of the policy exercising at the first exercise date
        where max(h, 0) > Q̂; the claim pays at maturity otherwise."""
        n_paths, n_times = self.payoff.shape
        realized = np.zeros(n_paths)
        stopped = np.zeros(n_paths, dtype=bool)
        for m in range(n_times - 1):
            if not self.schedule.exercise[m]:
                continue
            exercise = (
                ~stopped
                & self.alive[:, m]
                & exercise_decision(self.payoff[:, m], self.continuation[:, m])
            )
            realized[exercise] = self.discount[m] * self.payoff[exercise, m]
            stopped |= exercise
        realized[~stopped] = self.discount[-1] * self.payoff[~stopped, -1]
        return realized

    def dual_maxima(self):
        """Path-wise max over exercise dates of discounted payoff minus M."""
        excess = self.discount * self.payoff - self.martingale()
        return np.max(excess[:, self.schedule.exercise], axis=1)


def _evaluate(result, model, schedule, spec, n_eval, seed, threads):
    paths = simulate_paths(model, schedule, n_eval, evaluation_seed(seed), threads)
    return _Evaluation(result, model, schedule, spec, paths.values)


def lower_bound(result, model, schedule, spec, n_eval, seed, threads=1):
    """Value of the learned exercise policy on 'n_eval' fresh paths.

    :return: (estimate, standard error)
    """
    evaluation = _evaluate(result, model, schedule, spec, n_eval, seed, threads)
    return _mean_and_se(evaluation.stopped_payoffs())


def upper_bound(result, model, schedule, spec, n_eval, seed, threads=1):
    """Dual upper bound with the martingale from the trained networks.

    :return: (estimate, standard error)
    """
    evaluation = _evaluate(result, model, schedule, spec, n_eval, seed, threads)
    return _mean_and_se(evaluation.dual_maxima())


def dual_martingale(result, model, values):
    """Martingale of every path of 'values' (N × (M+1) × d), shape N × (M+1)."""
    evaluation = _Evaluation(result, model, result.schedule, result.payoff, values)
    return evaluation.martingale()


def dual_martingale_path(result, model, path):
    """Martingale M(t_0..t_M) along a single path of shape (M+1) × d."""
    return dual_martingale(result, model, np.asarray(path, dtype=float)[np.newaxis])[0]


def estimate_bounds(result, n_eval, seed, threads=1):
    """Both bounds on one set of fresh paths.

    :return: BoundReport
    """
    evaluation = _evaluate(
        result, result.model, result.schedule, result.payoff, n_eval, seed, threads
    )
    lower, lower_se = _mean_and_se(evaluation.stopped_payoffs())
    upper, upper_se = _mean_and_se(evaluation.dual_maxima())
    logger.info(
        f"Bounds on {n_eval} paths: lower {lower:.6f} ({lower_se:.1e}), "
        f"upper {upper:.6f} ({upper_se:.1e})"
    )
    return BoundReport(
        lower, lower_se, upper, upper_se, n_eval, direct=result.direct_estimate
    )


def summarize_runs(rows):
    """Cross-run mean and standard error of the direct, lower and upper
    estimates of independent runs.

    :param rows: list of dicts with keys 'direct', 'lower', 'upper'
    :return: dict with keys 'runs', '<estimate>' and '<estimate>_se'
    """
    summary = {"runs": len(rows)}
    for key in ("direct", "lower", "upper"):
        mean, se = _mean_and_se(np.array([row[key] for row in rows], dtype=float))
        summary[key] = mean
        summary[f"{key}_se"] = se
    return summary
