"""Backward induction training one network per monitoring date and the direct
price estimate."""
import numpy as np
from marshmallow import Schema, ValidationError, fields, post_load, validate

from . import exceptions, init_logger
from .analytic import expected_value
from .market import (
    GbmModelSchema,
    ScheduleSchema,
    derive_seed,
    normalization_scale,
    simulate_paths,
)
from .network import (
    INPUT_SPACES,
    LOG_PRICE,
    PRICE,
    FitReportSchema,
    ShallowNet,
    ShallowNetSchema,
    fit,
    forward,
    place_knots,
    warm_start,
)
from .payoff import PayoffSchema, intrinsic, survival_matrix

logger = init_logger(__name__)


class RlnnResult:
    """Trained networks of all monitoring dates t_1..t_M together with the
    market, schedule and claim they were trained for.

    Networks operate on normalized prices (prices divided by 'scale'); the
    value accessors take and return currency units.
    """

    def __init__(
        self,
        nets,
        direct_estimate,
        fit_reports,
        model,
        schedule,
        payoff,
        scale,
        seed,
        hidden,
    ):
        missing = set(range(1, schedule.n_dates + 1)) - set(nets)
        if missing:
            raise exceptions.NetworkError(
                f"Networks missing for dates {sorted(missing)}."
            )
        self.nets = nets
        self.direct_estimate = float(direct_estimate)
        self.fit_reports = fit_reports
        self.model = model
        self.schedule = schedule
        self.payoff = payoff
        self.scale = float(scale)
        self.seed = seed
        self.hidden = hidden

    @property
    def input_space(self):
        return self.nets[1].input_space

    def network_value(self, m, s):
        """Network output at t_m for prices 's' (N, d)."""
        return self.scale * forward(
            self.nets[m], network_inputs(s / self.scale, self.input_space)
        )

    def continuation_value(self, m, s, model=None, dt=None):
        """Q̂ at t_m for prices 's' of shape (d,) or (N, d), the discounted
        expectation of the network at t_{m+1}. With 'dt' the expectation is
        taken over the remaining time dt up to t_{m+1} instead.
        """
        model = model or self.model
        if dt is None:
            dt = self.schedule.increments[m]
        return self.scale * expected_value(
            self.nets[m + 1], np.asarray(s, dtype=float) / self.scale, model, dt
        )

    def to_dict(self):
        return RlnnResultSchema().dump(self)

    @classmethod
    def from_dict(cls, document):
        """:raises: NetworkError if the document is malformed"""
        try:
            return RlnnResultSchema().load(document)
        except ValidationError as e:
            raise exceptions.NetworkError(f"Invalid result document: {e.messages}")


def network_inputs(s, input_space):
    """Network inputs for prices 's'."""
    return np.log(s) if input_space == LOG_PRICE else s


def exercise_decision(h, q):
    """Exercise iff the intrinsic value strictly exceeds the continuation
    value; ties continue."""
    return np.greater(h, q)


def updated_values(h, q, alive, exercisable):
    if not exercisable:
        return q * alive
    payoff = np.maximum(h, 0.0)
    return np.where(exercise_decision(payoff, q), payoff, q) * alive


def rlnn_backward(
    model,
    schedule,
    spec,
    n_train,
    hidden,
    cfg,
    seed,
    input_space=LOG_PRICE,
    threads=1,
):
    """Train the networks backwards from maturity and return the RlnnResult.

    The network at t_m is fitted to the iterated values Ṽ(t_m) on the paths
    alive at t_{m-1}, warm-started from the network at t_{m+1}. Continuation
    values at t_{m-1} are its closed-form conditional expectation.

    :raises: InputSpaceMismatch if price inputs are requested for d > 1, and
        propagates simulation and fitting errors
    """
    spec.validate(model.spot)
    if input_space not in INPUT_SPACES:
        raise exceptions.InputSpaceMismatch(f"Unknown input space: {input_space}")
    if input_space == PRICE and model.dim != 1:
        raise exceptions.InputSpaceMismatch(
            "Price-space networks are supported for a single asset only."
        )

    scale = normalization_scale(model)
    norm_model = model.normalized(scale)
    norm_spec = spec.scaled(scale)

    paths = simulate_paths(norm_model, schedule, n_train, seed, threads=threads)
    values = paths.values
    alive = survival_matrix(norm_spec, values)
    increments = schedule.increments
    n_dates = schedule.n_dates

    targets = np.maximum(intrinsic(norm_spec, values[:, n_dates]), 0.0)
    targets = targets * alive[:, n_dates]

    initial = place_knots(
        ShallowNet.initialize(
            hidden, model.dim, derive_seed(seed, n_dates), input_space
        ),
        network_inputs(values[alive[:, n_dates - 1], n_dates], input_space),
        derive_seed(seed, n_dates),
    )
    nets, reports = {}, {}
    for m in range(n_dates, 0, -1):
        training = alive[:, m - 1]
        net, report = fit(
            initial,
            network_inputs(values[training, m], input_space),
            targets[training],
            cfg,
            derive_seed(seed, m),
        )
        nets[m], reports[m] = net, report
        logger.info(
            f"Date {m}: {report.epochs} epochs, validation MSE "
            f"{report.validation_mse:.3e}"
            + (", early stop" if report.early_stopped else "")
        )

        if m > 1:
            q = np.zeros(n_train)
            q[training] = expected_value(
                net, values[training, m - 1], norm_model, increments[m - 1]
            )
            h = intrinsic(norm_spec, values[:, m - 1])
            targets = updated_values(
                h, q, alive[:, m - 1], schedule.exercise[m - 1]
            )
        initial = warm_start(net)

    q0 = expected_value(nets[1], norm_model.spot, norm_model, increments[0])
    h0 = float(intrinsic(norm_spec, norm_model.spot))
    direct = max(max(h0, 0.0), q0) if schedule.exercise[0] else q0
    direct_estimate = scale * direct
    logger.info(f"Direct estimate {direct_estimate:.6f} (p={hidden}, seed {seed})")

    return RlnnResult(
        nets=nets,
        direct_estimate=direct_estimate,
        fit_reports=reports,
        model=model,
        schedule=schedule,
        payoff=spec,
        scale=scale,
        seed=seed,
        hidden=hidden,
    )


class RlnnResultSchema(Schema):
    nets = fields.Dict(
        keys=fields.String(), values=fields.Nested(ShallowNetSchema), required=True
    )
    direct_estimate = fields.Float(required=True)
    fit_reports = fields.Dict(
        keys=fields.String(), values=fields.Nested(FitReportSchema), required=True
    )
    model = fields.Nested(GbmModelSchema, required=True)
    schedule = fields.Nested(ScheduleSchema, required=True)
    payoff = fields.Nested(PayoffSchema, required=True)
    scale = fields.Float(
        required=True, validate=validate.Range(min=0, min_inclusive=False)
    )
    seed = fields.Integer(required=True)
    hidden = fields.Integer(required=True, validate=validate.Range(min=1))

    @post_load
    def make_result(self, data, **kwargs):
        data["nets"] = {int(m): net for m, net in data["nets"].items()}
        data["fit_reports"] = {int(m): r for m, r in data["fit_reports"].items()}
        try:
            return RlnnResult(**data)
        except exceptions.NetworkError as e:
            raise ValidationError(str(e), "nets")
