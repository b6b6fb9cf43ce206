"""Static hedge portfolios read off trained networks, their valuation, and
backtests of static against delta hedging."""
import numpy as np

from . import exceptions, init_logger
from .analytic import (
    bs_delta,
    bs_price,
    classify_leg_1d,
    expected_value,
)
from .market import (
    ExerciseSchedule,
    derive_seed,
    evaluation_seed,
    normalization_scale,
    simulate_paths,
)
from .network import LOG_PRICE, ShallowNet, fit, forward, place_knots
from .payoff import SurvivalState, intrinsic, survival_matrix, update_survival
from .presets import EUROPEAN_HEDGE_MATURITY, parameter_set
from .pricer import network_inputs, rlnn_backward, updated_values

logger = init_logger(__name__)

# relative bump of finite-difference deltas
DELTA_BUMP = 1e-4

# tolerance when comparing dates
TIME_TOLERANCE = 1e-12

VAR_LEVEL = 0.95

STATIC = "static"
DYNAMIC = "dynamic"
METRICS = ("mean", "std", "var95", "cvar95")


class HedgeLeg:
    """Basket option paying max(weightsᵀ·x + bias, 0) at 'maturity', held in
    'quantity' units; x are log prices or prices."""

    def __init__(self, weights, bias, quantity, maturity, classification=None):
        self.weights = np.asarray(weights, dtype=float)
        self.bias = float(bias)
        self.quantity = float(quantity)
        self.maturity = float(maturity)
        self.classification = classification

    def payoff(self, x):
        return self.quantity * np.maximum(np.asarray(x) @ self.weights + self.bias, 0.0)


class StaticHedgePortfolio:
    """Static hedge maturing at 'maturity': the network 'net' on prices divided
    by 'scale', read as basket-option legs and a cash position. Leg attributes
    are reported in currency units; valuation works on normalized prices like
    the pricer, so both agree to the last bit.
    """

    def __init__(self, net, maturity, scale=1.0):
        self.net = net
        self.maturity = float(maturity)
        self.scale = float(scale)

    @property
    def input_space(self):
        return self.net.input_space

    @property
    def dim(self):
        return self.net.dim

    @property
    def weights(self):
        if self.input_space == LOG_PRICE:
            return self.net.w1.copy()
        return self.net.w1 / self.scale

    @property
    def biases(self):
        if self.input_space == LOG_PRICE:
            return self.net.b1 - np.log(self.scale) * self.net.w1.sum(axis=1)
        return self.net.b1.copy()

    @property
    def quantities(self):
        return self.net.w2 * self.scale

    @property
    def cash(self):
        return self.net.b2 * self.scale

    @property
    def legs(self):
        single_asset = self.dim == 1
        return [
            HedgeLeg(
                w,
                b,
                q,
                self.maturity,
                classification=classify_leg_1d(w[0], b) if single_asset else None,
            )
            for w, b, q in zip(self.weights, self.biases, self.quantities)
        ]

    def payoff(self, s):
        """Realized payoff at maturity for prices 's' (d,) or (N, d)."""
        s = np.asarray(s, dtype=float) / self.scale
        return self.scale * forward(self.net, network_inputs(s, self.input_space))


def extract_portfolio(net, maturity, scale=1.0):
    """One leg per hidden unit and the output bias as cash, for a network
    trained on prices divided by 'scale'.
    """
    return StaticHedgePortfolio(net, maturity, scale)


def portfolio_value(port, s, t, model):
    """Value at t of the portfolio for prices 's' (d,) or (N, d).

    :raises: StalePortfolio if t is past the maturity of the portfolio
    """
    dt = port.maturity - t
    if dt < -TIME_TOLERANCE:
        raise exceptions.StalePortfolio(
            f"Portfolio matured at {port.maturity}, valuation requested at {t}."
        )
    dt = max(dt, 0.0)
    s = np.asarray(s, dtype=float)
    values = port.scale * expected_value(
        port.net, np.atleast_2d(s / port.scale), model, dt
    )
    return float(values[0]) if s.ndim == 1 else values


class EuropeanTarget:
    """Vanilla option valued with Black-Scholes."""

    def __init__(self, model, strike, maturity, is_call=False):
        if model.dim != 1:
            raise exceptions.HedgeError("Vanilla targets need a single asset.")
        self.model = model
        self.strike = float(strike)
        self.maturity = float(maturity)
        self.is_call = is_call

    def monitoring_times(self, horizon):
        return np.array([])

    def survival(self, values, times):
        return np.ones(values.shape[:2], dtype=bool)

    def _bs(self, function, s, t):
        model = self.model
        return function(
            np.atleast_2d(s)[:, 0],
            self.strike,
            model.rate,
            model.dividend[0],
            model.vol[0],
            self.maturity - t,
            self.is_call,
        )

    def value(self, s, t, alive=None):
        return self._bs(bs_price, s, t)

    def delta(self, s, t, alive=None):
        return self._bs(bs_delta, s, t)


class BarrierTarget:
    """Claim priced by an RLNN run. Between monitoring dates its value is the
    discounted expectation of the network at the next date, on surviving
    paths; the delta is a central finite difference of that value.
    """

    def __init__(self, result):
        if result.model.dim != 1:
            raise exceptions.HedgeError("Barrier targets need a single asset.")
        self.result = result
        self.model = result.model

    def monitoring_times(self, horizon):
        times = self.result.schedule.times
        return times[(times > 0.0) & (times <= horizon + TIME_TOLERANCE)]

    def survival(self, values, times):
        """Survival on the grid 'times', updated at the monitoring dates."""
        monitoring = self.result.schedule.times
        spec = self.result.payoff
        alive = np.ones(values.shape[:2], dtype=bool)
        state = SurvivalState.initial(values.shape[0])
        for j in range(1, len(times)):
            if np.any(np.abs(monitoring - times[j]) <= TIME_TOLERANCE):
                state = update_survival(state, values[:, j], spec)
            alive[:, j] = state.alive
        return alive

    def value(self, s, t, alive=None):
        s = np.atleast_2d(np.asarray(s, dtype=float))
        alive = np.ones(s.shape[0], dtype=bool) if alive is None else alive
        times = self.result.schedule.times
        values = np.zeros(s.shape[0])

        if t >= times[-1] - TIME_TOLERANCE:
            payoff = np.maximum(intrinsic(self.result.payoff, s[alive]), 0.0)
            values[alive] = payoff
            return values

        m = int(np.searchsorted(times, t + TIME_TOLERANCE, side="right"))
        values[alive] = self.result.continuation_value(
            m - 1, s[alive], dt=times[m] - t
        )
        return values

    def delta(self, s, t, alive=None):
        s = np.atleast_2d(np.asarray(s, dtype=float))
        bump = DELTA_BUMP * s
        up = self.value(s + bump, t, alive)
        down = self.value(s - bump, t, alive)
        return (up - down) / (2.0 * bump[:, 0])


class HedgeStats:
    """Statistics of the hedging losses (loss = target value - hedge value)."""

    def __init__(self, mean, std, var95, cvar95):
        self.mean = float(mean)
        self.std = float(std)
        self.var95 = float(var95)
        self.cvar95 = float(cvar95)

    @classmethod
    def from_errors(cls, errors):
        losses = -np.asarray(errors, dtype=float)
        var, cvar = var_cvar(losses, VAR_LEVEL)
        return cls(np.mean(losses), np.std(losses), var, cvar)


def var_cvar(losses, level=VAR_LEVEL):
    """Empirical value at risk (linearly interpolated quantile) and the mean of
    the losses at or beyond it.

    :return: (var, cvar)
    """
    losses = np.asarray(losses, dtype=float)
    var = float(np.quantile(losses, level))
    cvar = float(np.mean(losses[losses >= var]))
    return var, cvar


def _hedge_grid(target, horizon, n_rebalances=1):
    grid = np.concatenate(
        [
            np.linspace(0.0, horizon, n_rebalances + 1),
            target.monitoring_times(horizon),
        ]
    )
    grid = np.unique(grid)
    # merge dates closer than the tolerance
    keep = np.concatenate([[True], np.diff(grid) > TIME_TOLERANCE])
    return grid[keep]


def _simulate(target, model, grid, n_paths, seed, threads):
    schedule = ExerciseSchedule(grid)
    paths = simulate_paths(model, schedule, n_paths, evaluation_seed(seed), threads)
    return paths.values, target.survival(paths.values, grid)


def static_backtest(target, port, horizon, model, n_paths, seed, threads=1):
    """Hold the static portfolio against a short target position until
    'horizon'.

    :raises: StalePortfolio if horizon is past the portfolio maturity
    :return: HedgeStats
    """
    if horizon > port.maturity + TIME_TOLERANCE:
        raise exceptions.StalePortfolio(
            f"Horizon {horizon} exceeds portfolio maturity {port.maturity}."
        )
    grid = _hedge_grid(target, horizon)
    values, alive = _simulate(target, model, grid, n_paths, seed, threads)
    s_horizon = values[:, -1]

    errors = portfolio_value(port, s_horizon, horizon, model) - target.value(
        s_horizon, horizon, alive[:, -1]
    )
    stats = HedgeStats.from_errors(errors)
    logger.debug(
        f"Static hedge ({port.net.hidden} legs): std {stats.std:.2e}, "
        f"CVaR {stats.cvar95:.2e}"
    )
    return stats


def delta_backtest(target, horizon, n_rebalances, model, n_paths, seed, threads=1):
    """Self-financing delta hedge of a short target position, rebalanced at
    'n_rebalances' equispaced times before 'horizon'.

    :return: HedgeStats
    """
    if n_rebalances < 1:
        raise exceptions.HedgeError("At least one rebalancing date required.")
    grid = _hedge_grid(target, horizon, n_rebalances)
    values, alive = _simulate(target, model, grid, n_paths, seed, threads)
    prices = values[:, :, 0]
    dividend = model.dividend[0]

    delta = target.delta(values[:, 0], 0.0, alive[:, 0])
    cash = target.value(values[:, 0], 0.0, alive[:, 0]) - delta * prices[:, 0]
    for j in range(1, len(grid)):
        dt = grid[j] - grid[j - 1]
        cash = cash * np.exp(model.rate * dt) + delta * prices[:, j] * np.expm1(
            dividend * dt
        )
        if j < len(grid) - 1:
            rebalanced = target.delta(values[:, j], grid[j], alive[:, j])
            cash -= (rebalanced - delta) * prices[:, j]
            delta = rebalanced

    account = cash + delta * prices[:, -1]
    errors = account - target.value(values[:, -1], horizon, alive[:, -1])
    stats = HedgeStats.from_errors(errors)
    logger.debug(
        f"Delta hedge ({n_rebalances} rebalances): std {stats.std:.2e}, "
        f"CVaR {stats.cvar95:.2e}"
    )
    return stats


def rollover_errors(result, n_paths, seed, threads=1):
    """Mismatch of the semi-static hedge at each monitoring date on fresh
    paths. The portfolio bought at t_{m-1} pays the network at t_m; it has to
    cover the exercised payoff or the price of the next portfolio, on the paths
    still alive at t_{m-1}.

    :return: dict mapping the date index m to the errors discounted to t_0
    """
    model, schedule, spec = result.model, result.schedule, result.payoff
    paths = simulate_paths(model, schedule, n_paths, evaluation_seed(seed), threads)
    alive = survival_matrix(spec, paths.values)
    times = schedule.times

    errors = {}
    for m in range(1, schedule.n_dates + 1):
        held = alive[:, m - 1]
        s = paths.values[held, m]
        survivors = alive[held, m]
        h = intrinsic(spec, s)
        if m == schedule.n_dates:
            required = np.maximum(h, 0.0) * survivors
        else:
            q = np.zeros(s.shape[0])
            q[survivors] = result.continuation_value(m, s[survivors])
            required = updated_values(h, q, survivors, schedule.exercise[m])
        port = extract_portfolio(result.nets[m], times[m], result.scale)
        errors[m] = np.exp(-model.rate * times[m]) * (port.payoff(s) - required)
    return errors


def train_european_hedge(
    model,
    strike,
    maturity,
    hedge_maturity,
    hidden,
    n_train,
    cfg,
    seed,
    is_call=False,
    threads=1,
):
    """Fit a log-price network at 'hedge_maturity' to the Black-Scholes values
    of the vanilla option on simulated prices.

    :return: ShallowNet on prices normalized by normalization_scale(model)
    """
    scale = normalization_scale(model)
    norm_model = model.normalized(scale)
    schedule = ExerciseSchedule.european(hedge_maturity)
    paths = simulate_paths(norm_model, schedule, n_train, seed, threads=threads)
    s_hedge = paths.values[:, 1]

    labels = bs_price(
        s_hedge[:, 0],
        strike / scale,
        model.rate,
        model.dividend[0],
        model.vol[0],
        maturity - hedge_maturity,
        is_call,
    )
    inputs = np.log(s_hedge)
    initial = place_knots(
        ShallowNet.initialize(hidden, 1, derive_seed(seed, 1)),
        inputs,
        derive_seed(seed, 1),
    )
    net, report = fit(initial, inputs, labels, cfg, derive_seed(seed, 0))
    logger.info(
        f"Hedge network p={hidden}, K={strike}: validation MSE "
        f"{report.validation_mse:.3e}"
    )
    return net


def portfolio_table(stats, columns):
    """Arrange backtest statistics as rows of metric, hedge type and options
    count with one value per column (moneyness or barrier level).

    :param stats: dict mapping (hedge_type, count, column) to HedgeStats;
        count is None for the delta hedge
    :return: list of dicts
    """
    configurations = []
    for hedge_type, count, _ in stats:
        if (hedge_type, count) not in configurations:
            configurations.append((hedge_type, count))
    configurations.sort(key=lambda c: (c[0] == DYNAMIC, c[1] or 0))

    rows = []
    for metric in METRICS:
        for hedge_type, count in configurations:
            row = {"metric": metric, "hedge": hedge_type, "count": count}
            for column in columns:
                entry = stats.get((hedge_type, count, column))
                row[str(column)] = None if entry is None else getattr(entry, metric)
            rows.append(row)
    return rows


def european_hedge_experiment(
    moneyness,
    counts,
    cfg,
    seed,
    n_train=50000,
    n_paths=50000,
    rebalances=25,
    threads=1,
):
    """Static hedges with 'counts' options against the delta hedge of the
    one-year European put held for one month, per moneyness K/S.

    :return: dict mapping (hedge_type, count, moneyness) to HedgeStats
    """
    stats = {}
    for level in moneyness:
        model, schedule, spec = parameter_set("set4")
        strike = level * model.spot[0]
        target = EuropeanTarget(model, strike, schedule.maturity)
        for count in counts:
            net = train_european_hedge(
                model,
                strike,
                schedule.maturity,
                EUROPEAN_HEDGE_MATURITY,
                count,
                n_train,
                cfg,
                seed,
                threads=threads,
            )
            port = extract_portfolio(
                net, EUROPEAN_HEDGE_MATURITY, normalization_scale(model)
            )
            stats[(STATIC, count, level)] = static_backtest(
                target, port, EUROPEAN_HEDGE_MATURITY, model, n_paths, seed, threads
            )
        stats[(DYNAMIC, None, level)] = delta_backtest(
            target, EUROPEAN_HEDGE_MATURITY, rebalances, model, n_paths, seed, threads
        )
    return stats


def barrier_hedge_experiment(
    barriers,
    counts,
    cfg,
    seed,
    n_train=50000,
    n_paths=50000,
    rebalances=12,
    threads=1,
):
    """Static hedges from the first-date networks of RLNN runs with 'counts'
    hidden units against the delta hedge of the down-and-out call, held until
    the first monitoring date, per barrier level.

    :return: dict mapping (hedge_type, count, barrier) to HedgeStats
    """
    stats = {}
    for barrier in barriers:
        model, schedule, spec = parameter_set("set5", barrier=barrier)
        horizon = float(schedule.times[1])
        result = None
        for count in sorted(counts):
            result = rlnn_backward(
                model, schedule, spec, n_train, count, cfg, seed, threads=threads
            )
            port = extract_portfolio(result.nets[1], horizon, result.scale)
            stats[(STATIC, count, barrier)] = static_backtest(
                BarrierTarget(result), port, horizon, model, n_paths, seed, threads
            )
        # the largest network gives the most accurate deltas
        stats[(DYNAMIC, None, barrier)] = delta_backtest(
            BarrierTarget(result), horizon, rebalances, model, n_paths, seed, threads
        )
    return stats
