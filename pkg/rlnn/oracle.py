"""Independent reference prices: a recombining binomial tree for single-asset
Bermudan and European claims, and plain Monte Carlo expectations."""
import numpy as np

from . import exceptions, init_logger
from .market import substream

logger = init_logger(__name__)

_ORACLE_STREAM = 3
_LAYER_TOLERANCE = 1e-9


class TreeSpec:
    """Number of tree steps and the layers where exercise is allowed."""

    def __init__(self, steps, exercise_layers, dt):
        self.steps = steps
        self.exercise_layers = exercise_layers
        self.dt = dt

    @classmethod
    def from_schedule(cls, schedule, steps):
        """Map the exercise dates of 'schedule' onto the nearest layers.

        :raises: ScheduleMisaligned if steps < M or a date is more than half a
            step away from its layer or two dates share a layer
        """
        if steps < schedule.n_dates:
            raise exceptions.ScheduleMisaligned(
                f"{steps} steps cannot resolve {schedule.n_dates} dates."
            )
        dt = schedule.maturity / steps
        dates = schedule.times[schedule.exercise]
        layers = np.rint(dates / dt).astype(int)
        if np.any(np.abs(layers * dt - dates) > 0.5 * dt + _LAYER_TOLERANCE):
            raise exceptions.ScheduleMisaligned(
                "Exercise date too far from every tree layer."
            )
        if np.unique(layers).size != layers.size:
            raise exceptions.ScheduleMisaligned("Two exercise dates share a layer.")
        return cls(steps, set(layers.tolist()), dt)


def _payoff(s, strike, is_put):
    return np.maximum(strike - s, 0.0) if is_put else np.maximum(s - strike, 0.0)


def binomial_bermudan_1d(s0, strike, rate, dividend, vol, schedule, steps, is_put):
    """Price on a Cox-Ross-Rubinstein tree with exercise at the layers of the
    exercise dates of 'schedule' (maturity always included).

    :raises: ScheduleMisaligned, OracleError if the risk-neutral probability
        leaves [0, 1] for the given number of steps
    """
    tree = TreeSpec.from_schedule(schedule, steps)
    dt = tree.dt

    if vol == 0.0:
        times = np.array(sorted(tree.exercise_layers)) * dt
        forwards = s0 * np.exp((rate - dividend) * times)
        return float(np.max(np.exp(-rate * times) * _payoff(forwards, strike, is_put)))

    up = np.exp(vol * np.sqrt(dt))
    down = 1.0 / up
    probability = (np.exp((rate - dividend) * dt) - down) / (up - down)
    if not 0.0 <= probability <= 1.0:
        raise exceptions.OracleError(
            f"Risk-neutral probability {probability:.4f} outside [0, 1]; "
            "increase the number of steps."
        )
    discount = np.exp(-rate * dt)

    prices = s0 * up ** np.arange(steps, -steps - 1, -2, dtype=float)
    values = _payoff(prices, strike, is_put)
    for layer in range(steps - 1, -1, -1):
        values = discount * (
            probability * values[:-1] + (1.0 - probability) * values[1:]
        )
        if layer in tree.exercise_layers:
            prices = s0 * up ** np.arange(layer, -layer - 1, -2, dtype=float)
            values = np.maximum(values, _payoff(prices, strike, is_put))

    logger.debug(f"Binomial price {values[0]:.6f} with {steps} steps")
    return float(values[0])


def mc_expectation(fn, sampler, n, seed):
    """Plain Monte Carlo estimate of E[fn(X)].

    :param sampler: callable (rng, n) returning n samples of X
    :return: (mean, standard error)
    """
    rng = substream(seed, _ORACLE_STREAM)
    values = np.asarray(fn(sampler(rng, n)), dtype=float)
    return float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(n))
