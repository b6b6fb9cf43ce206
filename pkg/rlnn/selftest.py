"""Fast oracle-equivalence and invariant checks of the library, run by the
'selftest' command."""
import numpy as np

from . import init_logger
from .analytic import bs_price, continuation_value, relu_expectation_normal
from .hedge import extract_portfolio, var_cvar
from .market import ExerciseSchedule, GbmModel, cholesky, standard_normals, substream
from .network import AdamState, ShallowNet, TrainConfig, adam_step, forward, gradient
from .oracle import binomial_bermudan_1d, mc_expectation
from .presets import BASKET_CORRELATION

logger = init_logger(__name__)

# statistical checks pass within this many standard errors
SE_TOLERANCE = 4.0

_SEED = 20240101


def _cholesky_reconstruction():
    corr = np.array(BASKET_CORRELATION)
    lower = cholesky(corr)
    error = np.max(np.abs(lower @ lower.T - corr))
    return error < 1e-12, f"max error {error:.2e}"


def _mse(net, x, y):
    return np.mean((forward(net, x) - y) ** 2)


def _gradient_finite_differences():
    rng = substream(_SEED, 1)
    net = ShallowNet(
        rng.normal(size=(3, 2)), rng.normal(size=3), rng.normal(size=3), 0.3
    )
    x, y = rng.normal(size=(16, 2)), rng.normal(size=16)
    grads = gradient(net, x, y)
    step = 1e-6

    worst = 0.0
    for name, grad in grads.items():
        params = net.parameters()
        numeric = np.zeros(np.shape(grad))
        for index in np.ndindex(numeric.shape):
            bumped_up, bumped_down = net.parameters(), net.parameters()
            bumped_up[name][index] = params[name][index] + step
            bumped_down[name][index] = params[name][index] - step
            numeric[index] = (
                _mse(ShallowNet.from_parameters(bumped_up), x, y)
                - _mse(ShallowNet.from_parameters(bumped_down), x, y)
            ) / (2 * step)
        scale = max(np.max(np.abs(numeric)), 1e-8)
        worst = max(worst, np.max(np.abs(grad - numeric)) / scale)
    return worst < 1e-5, f"max relative error {worst:.2e}"


def _adam_first_step():
    cfg = TrainConfig()
    params = {"w1": np.zeros((1, 1)), "b1": np.zeros(1), "w2": np.zeros(1)}
    params["b2"] = np.array(0.0)
    grads = {
        "w1": np.full((1, 1), 0.5),
        "b1": np.full(1, -3.0),
        "w2": np.full(1, 1e-3),
        "b2": np.array(-0.2),
    }
    updated, _ = adam_step(params, grads, AdamState.zeros_like(params), cfg)
    error = max(
        np.max(np.abs(updated[k] + cfg.learning_rate * np.sign(grads[k])))
        for k in grads
    )
    return error < 1e-6, f"max deviation {error:.2e}"


def _relu_expectation_monte_carlo():
    mu, sd = -0.3, 0.7
    mean, se = mc_expectation(
        lambda z: np.maximum(mu + sd * z, 0.0),
        lambda rng, n: standard_normals(rng, n),
        1_000_000,
        _SEED,
    )
    exact = relu_expectation_normal(mu, sd)
    deviation = abs(mean - exact) / se
    return deviation < SE_TOLERANCE, f"{deviation:.2f} standard errors"


def _random_log_net(rng, hidden=4):
    return ShallowNet(
        rng.normal(size=(hidden, 1)),
        rng.uniform(-1.0, 1.0, size=hidden),
        rng.normal(size=hidden),
        rng.normal(),
    )


def _continuation_value_monte_carlo():
    rng = substream(_SEED, 2)
    model = GbmModel(1.0, rate=0.06, vol=0.2)
    net = _random_log_net(rng)
    dt = 0.1
    s_prev = np.array([1.1])

    def transition(z):
        log_s = np.log(s_prev) + model.log_drift * dt + model.vol * np.sqrt(dt) * z
        return np.exp(-model.rate * dt) * forward(net, log_s[:, np.newaxis])

    mean, se = mc_expectation(
        transition, lambda rng, n: standard_normals(rng, n), 1_000_000, _SEED
    )
    exact = continuation_value(net, s_prev, model, dt)
    deviation = abs(mean - exact) / se
    return deviation < SE_TOLERANCE, f"{deviation:.2f} standard errors"


def _binomial_black_scholes():
    schedule = ExerciseSchedule.european(1.0)
    tree = binomial_bermudan_1d(40.0, 40.0, 0.06, 0.0, 0.2, schedule, 5000, True)
    exact = bs_price(40.0, 40.0, 0.06, 0.0, 0.2, 1.0, False)
    error = abs(tree - exact)
    return error < 1e-3, f"difference {error:.2e}"


def _portfolio_payoff_identity():
    rng = substream(_SEED, 3)
    net = ShallowNet(
        rng.normal(size=(5, 2)), rng.normal(size=5), rng.normal(size=5), 0.7
    )
    port = extract_portfolio(net, maturity=1.0)
    s = np.exp(rng.normal(size=(1000, 2)))
    legs = sum(leg.payoff(np.log(s)) for leg in port.legs) + port.cash
    error = np.max(np.abs(legs - forward(net, np.log(s))))
    return error < 1e-12, f"max difference {error:.2e}"


def _martingale_increment_mean():
    rng = substream(_SEED, 4)
    model = GbmModel(1.0, rate=0.06, vol=0.2)
    net = _random_log_net(rng)
    dt = 0.1
    expectation = continuation_value(net, model.spot, model, dt)

    def increment(z):
        log_s = model.log_drift * dt + model.vol * np.sqrt(dt) * z
        discounted = np.exp(-model.rate * dt) * forward(net, log_s[:, np.newaxis])
        return discounted - expectation

    mean, se = mc_expectation(
        increment, lambda rng, n: standard_normals(rng, n), 1_000_000, _SEED + 1
    )
    deviation = abs(mean) / se
    return deviation < SE_TOLERANCE, f"{deviation:.2f} standard errors"


def _var_cvar_on_grid():
    var, cvar = var_cvar(np.arange(1.0, 101.0), 0.95)
    passed = np.isclose(var, 95.05, rtol=0, atol=1e-9) and cvar == 98.0
    return passed, f"VaR {var:.4f}, CVaR {cvar:.4f}"


CHECKS = (
    ("cholesky reconstruction", _cholesky_reconstruction),
    ("gradient vs finite differences", _gradient_finite_differences),
    ("adam first step", _adam_first_step),
    ("relu expectation vs monte carlo", _relu_expectation_monte_carlo),
    ("continuation value vs monte carlo", _continuation_value_monte_carlo),
    ("binomial vs black-scholes", _binomial_black_scholes),
    ("portfolio payoff identity", _portfolio_payoff_identity),
    ("martingale increment mean", _martingale_increment_mean),
    ("var/cvar on 1..100", _var_cvar_on_grid),
)


def run_checks():
    """Run all checks.

    :return: list of (name, passed, detail)
    """
    outcomes = []
    for name, check in CHECKS:
        passed, detail = check()
        logger.info(f"{name}: {'passed' if passed else 'FAILED'} ({detail})")
        outcomes.append((name, bool(passed), detail))
    return outcomes
