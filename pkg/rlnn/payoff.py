"""Intrinsic values h(·) of the supported claims and the survival state of
discretely monitored barrier claims."""
import numpy as np
from marshmallow import Schema, fields, post_load, validate

from . import exceptions

VANILLA_PUT = "vanilla-put"
VANILLA_CALL = "vanilla-call"
ARITHMETIC_BASKET_PUT = "basket-put"
MAX_CALL = "max-call"
DOWN_OUT_CALL = "down-out-call"

PAYOFF_KINDS = (
    VANILLA_PUT,
    VANILLA_CALL,
    ARITHMETIC_BASKET_PUT,
    MAX_CALL,
    DOWN_OUT_CALL,
)


class PayoffSpec:
    """Description of a claim. 'basket_weights' is required for the arithmetic
    basket put, 'barrier' for the down-and-out call; both are checked when the
    payoff is evaluated.
    """

    def __init__(self, kind, strike, basket_weights=None, barrier=None):
        """:raises: InvalidPayoff on unknown kind or non-positive strike"""
        if kind not in PAYOFF_KINDS:
            raise exceptions.InvalidPayoff(f"Unknown payoff kind: {kind}")
        if strike <= 0:
            raise exceptions.InvalidPayoff("Strike must be strictly positive.")

        self.kind = kind
        self.strike = float(strike)
        self.basket_weights = (
            None if basket_weights is None else np.asarray(basket_weights, dtype=float)
        )
        self.barrier = None if barrier is None else float(barrier)

    @property
    def has_barrier(self):
        return self.kind == DOWN_OUT_CALL

    def validate(self, spot):
        """Check the fields required by the kind against the initial 'spot'.

        :raises: MissingField, InvalidPayoff
        """
        if self.kind == ARITHMETIC_BASKET_PUT:
            if self.basket_weights is None:
                raise exceptions.MissingField("Basket put requires basket weights.")
            if self.basket_weights.size != np.size(spot):
                raise exceptions.InvalidPayoff(
                    "Number of basket weights does not match the number of assets."
                )
        if self.kind == DOWN_OUT_CALL:
            if self.barrier is None:
                raise exceptions.MissingField("Down-and-out call requires a barrier.")
            if self.barrier >= np.asarray(spot, dtype=float)[0]:
                raise exceptions.InvalidPayoff("Barrier must lie below the spot.")

    def scaled(self, factor):
        """Return a copy with strike and barrier divided by 'factor'."""
        return PayoffSpec(
            self.kind,
            self.strike / factor,
            basket_weights=self.basket_weights,
            barrier=None if self.barrier is None else self.barrier / factor,
        )


def intrinsic(spec, s):
    """Return h(s) for prices 's' of shape (..., d). Not clamped at zero; the
    survival of barrier claims is handled by the SurvivalState.

    :raises: MissingField if the kind requires weights or a barrier
    """
    s = np.asarray(s, dtype=float)
    kind = spec.kind

    if kind == VANILLA_PUT:
        return spec.strike - s[..., 0]
    if kind == VANILLA_CALL:
        return s[..., 0] - spec.strike
    if kind == ARITHMETIC_BASKET_PUT:
        if spec.basket_weights is None:
            raise exceptions.MissingField("Basket put requires basket weights.")
        return spec.strike - s @ spec.basket_weights
    if kind == MAX_CALL:
        return np.max(s, axis=-1) - spec.strike

    # DOWN_OUT_CALL
    if spec.barrier is None:
        raise exceptions.MissingField("Down-and-out call requires a barrier.")
    return s[..., 0] - spec.strike


class SurvivalState:
    """Per-path survival flags of a barrier claim. Once knocked out, a path
    stays knocked out."""

    def __init__(self, alive):
        self.alive = np.asarray(alive, dtype=bool)

    @classmethod
    def initial(cls, n_paths):
        return cls(np.ones(n_paths, dtype=bool))


def update_survival(state, s, spec):
    """Return the state after monitoring prices 's' (shape (..., d)). Touching
    the barrier knocks the claim out. Claims without barrier always survive.
    """
    if not spec.has_barrier:
        return SurvivalState(state.alive)
    if spec.barrier is None:
        raise exceptions.MissingField("Down-and-out call requires a barrier.")
    s = np.asarray(s, dtype=float)
    return SurvivalState(state.alive & (s[..., 0] > spec.barrier))


def survival_matrix(spec, values):
    """Survival flags of every path on every date, shape N × (M+1), for the
    path tensor 'values' of shape N × (M+1) × d.
    """
    n_paths, n_times = values.shape[:2]
    alive = np.ones((n_paths, n_times), dtype=bool)
    state = SurvivalState.initial(n_paths)
    for m in range(1, n_times):
        state = update_survival(state, values[:, m], spec)
        alive[:, m] = state.alive
    return alive


class PayoffSchema(Schema):
    kind = fields.String(required=True, validate=validate.OneOf(PAYOFF_KINDS))
    strike = fields.Float(
        required=True, validate=validate.Range(min=0, min_inclusive=False)
    )
    basket_weights = fields.List(fields.Float(), load_default=None, allow_none=True)
    barrier = fields.Float(load_default=None, allow_none=True)

    @post_load
    def make_payoff(self, data, **kwargs):
        return PayoffSpec(**data)
