"""Closed-form conditional expectations of network outputs under GBM and the
Black-Scholes formulas for vanilla options.

Conditional on the prices at t, the log prices at t + dt are jointly normal,
hence every hidden unit of a log-price network is an option on a normally
distributed variable whose expectation is known in closed form.
"""
import numpy as np
from scipy.special import ndtr

from . import exceptions, init_logger
from .network import LOG_PRICE, PRICE

logger = init_logger(__name__)

# below this standard deviation a normal variable is treated as constant
DEGENERATE_SD = 1e-14

# rows of states evaluated at once; bounds the N × p working arrays
CHUNK_SIZE = 8192

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)

# leg kinds of a single-asset price-space network
FORWARD = "forward"
CALL_LIKE = "call"
PUT_LIKE = "put"
WORTHLESS = "worthless"


def relu_expectation_normal(mu, sd):
    """Return E[max(Y, 0)] for Y ~ N(mu, sd²), elementwise.

    For sd < DEGENERATE_SD the variable is treated as the constant mu.
    """
    mu, sd = np.broadcast_arrays(
        np.asarray(mu, dtype=float), np.asarray(sd, dtype=float)
    )
    degenerate = sd < DEGENERATE_SD
    safe_sd = np.where(degenerate, 1.0, sd)
    ratio = mu / safe_sd
    value = safe_sd * _INV_SQRT_2PI * np.exp(-0.5 * ratio * ratio) + mu * ndtr(ratio)
    value = np.where(degenerate, np.maximum(mu, 0.0), value)
    return value[()] if value.ndim == 0 else value


class NormalMoments:
    """Mean and variance of Y = wᵀ log S(t + dt) + b given S(t)."""

    def __init__(self, mu_y, var_y):
        self.mu_y = mu_y
        self.var_y = var_y

    @property
    def sd_y(self):
        return np.sqrt(self.var_y)


def log_moments(model, s_prev, dt, w, b):
    """Moments of wᵀ log S(t + dt) + b conditional on S(t) = s_prev. 's_prev'
    may be a single state (d,) or a batch (N, d).
    """
    w = np.asarray(w, dtype=float)
    log_mean = np.log(np.asarray(s_prev, dtype=float)) + model.log_drift * dt
    mu_y = log_mean @ w + b
    var_y = max(float(w @ model.covariance @ w) * dt, 0.0)
    return NormalMoments(mu_y, var_y)


def basket_leg_expectation(model, s_prev, dt, w, b):
    """Undiscounted E[max(wᵀ log S(t + dt) + b, 0) | S(t) = s_prev], the value
    of one geometric basket leg before discounting."""
    moments = log_moments(model, s_prev, dt, w, b)
    return relu_expectation_normal(moments.mu_y, moments.sd_y)


def portfolio_expectation(weights, biases, quantities, cash, log_s, model, dt):
    """Discounted value at t of the payoff Σ_i q_i·max(w_iᵀ x + b_i, 0) + cash
    paid at t + dt, with x = log S(t + dt), for log prices 'log_s' (N, d) at t.

    Network continuation values and hedge portfolio values both go through
    here, which keeps them identical to the last bit.
    """
    leg_sd = np.sqrt(
        np.maximum(np.einsum("ij,jk,ik->i", weights, model.covariance, weights), 0.0)
        * dt
    )
    drift = model.log_drift * dt
    discount = np.exp(-model.rate * dt)

    values = np.empty(log_s.shape[0])
    for start in range(0, log_s.shape[0], CHUNK_SIZE):
        stop = start + CHUNK_SIZE
        leg_mu = (log_s[start:stop] + drift) @ weights.T + biases
        legs = relu_expectation_normal(leg_mu, leg_sd)
        values[start:stop] = discount * (legs @ quantities + cash)
    return values


def _as_batch(net, s_prev):
    s_prev = np.asarray(s_prev, dtype=float)
    single = s_prev.ndim == 1
    batch = np.atleast_2d(s_prev)
    if batch.shape[-1] != net.dim:
        raise exceptions.DimensionMismatch(
            f"State dimension {batch.shape[-1]} does not match network "
            f"dimension {net.dim}."
        )
    return batch, single


def continuation_value(net, s_prev, model, dt):
    """Discounted conditional expectation e^{-r·dt}·E[net(log S(t + dt)) | S(t)]
    for a log-price network. The cash position b2 is discounted as well.

    :param s_prev: prices at t, shape (d,) or (N, d)
    :raises: InputSpaceMismatch for price-space networks
    :return: scalar for a single state, else array of length N
    """
    if net.input_space != LOG_PRICE:
        raise exceptions.InputSpaceMismatch(
            "Closed-form continuation values require a log-price network."
        )
    batch, single = _as_batch(net, s_prev)
    values = portfolio_expectation(
        net.w1, net.b1, net.w2, net.b2, np.log(batch), model, dt
    )
    return float(values[0]) if single else values


class LegClassification:
    """Kind of a single-asset price-space leg max(w·S + b, 0) and its effective
    strike -b/w (None for forwards with w = 0 and worthless legs)."""

    def __init__(self, kind, strike=None):
        self.kind = kind
        self.strike = strike

    def __eq__(self, other):
        return (
            isinstance(other, LegClassification)
            and self.kind == other.kind
            and self.strike == other.strike
        )

    def __repr__(self):
        return f"LegClassification({self.kind!r}, strike={self.strike!r})"


def classify_leg_1d(w, b):
    if w > 0:
        if b >= 0:
            return LegClassification(FORWARD, -b / w)
        return LegClassification(CALL_LIKE, -b / w)
    if w < 0:
        if b > 0:
            return LegClassification(PUT_LIKE, -b / w)
        return LegClassification(WORTHLESS)
    # pure cash leg
    if b > 0:
        return LegClassification(FORWARD)
    return LegClassification(WORTHLESS)


def _black(forward, strike, sd, is_call):
    """Undiscounted Black price of a vanilla option on a lognormal forward with
    total standard deviation 'sd'."""
    forward, sd = np.broadcast_arrays(
        np.asarray(forward, dtype=float), np.asarray(sd, dtype=float)
    )
    sign = 1.0 if is_call else -1.0
    intrinsic = np.maximum(sign * (forward - strike), 0.0)
    degenerate = sd < DEGENERATE_SD
    safe_sd = np.where(degenerate, 1.0, sd)
    d1 = (np.log(forward / strike) + 0.5 * safe_sd**2) / safe_sd
    d2 = d1 - safe_sd
    value = sign * (forward * ndtr(sign * d1) - strike * ndtr(sign * d2))
    return np.where(degenerate, intrinsic, value)


def bs_price(spot, strike, rate, dividend, vol, tau, is_call):
    """Black-Scholes price with continuous dividend yield. At tau = 0 the
    intrinsic value is returned. 'spot' may be an array."""
    tau = max(float(tau), 0.0)
    forward = np.asarray(spot, dtype=float) * np.exp((rate - dividend) * tau)
    price = np.exp(-rate * tau) * _black(forward, strike, vol * np.sqrt(tau), is_call)
    return price[()] if price.ndim == 0 else price


def bs_delta(spot, strike, rate, dividend, vol, tau, is_call):
    """Black-Scholes delta; at tau = 0 (or vanishing vol) the indicator of
    being in the money, signed for puts."""
    tau = max(float(tau), 0.0)
    spot = np.asarray(spot, dtype=float)
    carry = np.exp(-dividend * tau)
    forward = spot * np.exp((rate - dividend) * tau)
    sd = vol * np.sqrt(tau)
    if sd < DEGENERATE_SD:
        if is_call:
            delta = carry * (forward > strike)
        else:
            delta = -carry * (forward < strike)
    else:
        d1 = (np.log(forward / strike) + 0.5 * sd**2) / sd
        delta = carry * ndtr(d1) if is_call else carry * (ndtr(d1) - 1.0)
    delta = np.asarray(delta, dtype=float)
    return delta[()] if delta.ndim == 0 else delta


def _price_leg_expectation(classification, w, b, forward, sd):
    """Undiscounted E[max(w·S + b, 0)] for a lognormal S with mean 'forward'."""
    kind = classification.kind
    if kind == WORTHLESS:
        return np.zeros_like(forward)
    if kind == FORWARD:
        return w * forward + b
    if kind == CALL_LIKE:
        return w * _black(forward, classification.strike, sd, is_call=True)
    return -w * _black(forward, classification.strike, sd, is_call=False)


def price_space_continuation_value(net, s_prev, model, dt):
    """Continuation value of a single-asset price-space network, each leg
    valued as forward, call, put or nothing depending on the signs of its
    weight and bias.

    :raises: InputSpaceMismatch for log-price networks or d != 1
    """
    if net.input_space != PRICE or net.dim != 1 or model.dim != 1:
        raise exceptions.InputSpaceMismatch(
            "Leg classification requires a single-asset price-space network."
        )
    batch, single = _as_batch(net, s_prev)
    spot = batch[:, 0]
    forward = spot * np.exp((model.rate - model.dividend[0]) * dt)
    sd = model.vol[0] * np.sqrt(dt)

    expectation = np.full(spot.shape, net.b2)
    for w, b, quantity in zip(net.w1[:, 0], net.b1, net.w2):
        leg = classify_leg_1d(w, b)
        expectation = expectation + quantity * _price_leg_expectation(
            leg, w, b, forward, sd
        )
    values = np.exp(-model.rate * dt) * expectation
    return float(values[0]) if single else values


def expected_value(net, s_prev, model, dt):
    """Discounted conditional expectation of the network output, dispatched on
    the input space of the network."""
    if net.input_space == LOG_PRICE:
        return continuation_value(net, s_prev, model, dt)
    return price_space_continuation_value(net, s_prev, model, dt)
