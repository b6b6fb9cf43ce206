"""Shallow regression network (ReLU hidden layer, linear output), its exact
gradient and the Adam training loop with validation early stopping."""
import numpy as np
from marshmallow import Schema, ValidationError, fields, post_load, validate

from . import exceptions, init_logger
from .market import substream

logger = init_logger(__name__)

# input spaces of a network
LOG_PRICE = "log"
PRICE = "price"
INPUT_SPACES = (LOG_PRICE, PRICE)

MIN_TRAINING_POINTS = 10

_FIT_STREAM = 1
_INIT_STREAM = 2
_KNOT_STREAM = 3
_PARAMETER_NAMES = ("w1", "b1", "w2", "b2")


class ShallowNet:
    """Network x ↦ Σ_i w2_i·max(w1_i·x + b1_i, 0) + b2 with p hidden units on
    d inputs. Rows of w1 with b1 describe basket-option legs, w2 their
    quantities and b2 the cash position.
    """

    def __init__(self, w1, b1, w2, b2, input_space=LOG_PRICE):
        w1 = np.atleast_2d(np.asarray(w1, dtype=float))
        b1 = np.asarray(b1, dtype=float).reshape(-1)
        w2 = np.asarray(w2, dtype=float).reshape(-1)
        b2 = float(b2)

        if input_space not in INPUT_SPACES:
            raise exceptions.InputSpaceMismatch(f"Unknown input space: {input_space}")
        if w1.shape[0] < 1 or b1.size != w1.shape[0] or w2.size != w1.shape[0]:
            raise exceptions.DimensionMismatch(
                f"Inconsistent layer shapes: w1 {w1.shape}, b1 {b1.shape}, "
                f"w2 {w2.shape}."
            )
        parameters = np.concatenate([w1.ravel(), b1, w2, [b2]])
        if not np.all(np.isfinite(parameters)):
            raise exceptions.NetworkError("Network parameters must be finite.")

        self.w1 = w1
        self.b1 = b1
        self.w2 = w2
        self.b2 = b2
        self.input_space = input_space

    @classmethod
    def initialize(cls, hidden, dim, seed, input_space=LOG_PRICE):
        """Random network: Glorot-uniform weights, b1 uniform on [-1, 1], b2 = 0.
        Use place_knots() to move the knots onto the training inputs.
        """
        rng = substream(seed, _INIT_STREAM)
        limit1 = np.sqrt(6.0 / (dim + hidden))
        limit2 = np.sqrt(6.0 / (hidden + 1))
        return cls(
            w1=rng.uniform(-limit1, limit1, size=(hidden, dim)),
            b1=rng.uniform(-1.0, 1.0, size=hidden),
            w2=rng.uniform(-limit2, limit2, size=hidden),
            b2=0.0,
            input_space=input_space,
        )

    @classmethod
    def from_parameters(cls, params, input_space=LOG_PRICE):
        return cls(input_space=input_space, **params)

    @property
    def hidden(self):
        return self.w1.shape[0]

    @property
    def dim(self):
        return self.w1.shape[1]

    @property
    def parameter_count(self):
        """N_p = 1 + p + p + p·d"""
        return 1 + 2 * self.hidden + self.hidden * self.dim

    def parameters(self):
        """Return a copy of the parameters as dict of arrays."""
        return {
            "w1": self.w1.copy(),
            "b1": self.b1.copy(),
            "w2": self.w2.copy(),
            "b2": np.array(self.b2),
        }

    def copy(self):
        return ShallowNet.from_parameters(self.parameters(), self.input_space)

    def to_dict(self):
        return ShallowNetSchema().dump(self)

    @classmethod
    def from_dict(cls, document):
        """:raises: NetworkError if the document is malformed"""
        try:
            return ShallowNetSchema().load(document)
        except ValidationError as e:
            raise exceptions.NetworkError(f"Invalid network document: {e.messages}")


class TrainConfig:
    """Hyperparameters of the training loop."""

    def __init__(
        self,
        learning_rate=1e-3,
        batch_fraction=0.1,
        patience=6,
        split=0.7,
        max_epochs=3000,
        adam_beta1=0.9,
        adam_beta2=0.999,
        adam_eps=1e-8,
    ):
        self.learning_rate = learning_rate
        self.batch_fraction = batch_fraction
        self.patience = patience
        self.split = split
        self.max_epochs = max_epochs
        self.adam_beta1 = adam_beta1
        self.adam_beta2 = adam_beta2
        self.adam_eps = adam_eps

    @classmethod
    def from_section(cls, section):
        """Create from a mapping of (possibly string-typed) options.

        :raises: InvalidConfigError naming the offending options
        """
        try:
            return TrainConfigSchema().load(section)
        except ValidationError as e:
            infos = [
                f"{field}: {'; '.join(messages)}"
                for field, messages in e.messages.items()
            ]
            raise exceptions.InvalidConfigError(
                "Invalid training options:\n{}".format("\n".join(infos))
            )


class FitReport:
    """Outcome of a single fit."""

    def __init__(
        self, train_mse, validation_mse, epochs, early_stopped, degenerate=False
    ):
        self.train_mse = float(train_mse)
        self.validation_mse = float(validation_mse)
        self.epochs = int(epochs)
        self.early_stopped = bool(early_stopped)
        self.degenerate = bool(degenerate)


class AdamState:
    """First and second moment estimates and the step counter."""

    def __init__(self, first, second, step=0):
        self.first = first
        self.second = second
        self.step = step

    @classmethod
    def zeros_like(cls, params):
        return cls(
            {k: np.zeros_like(v, dtype=float) for k, v in params.items()},
            {k: np.zeros_like(v, dtype=float) for k, v in params.items()},
        )


def _check_inputs(net, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.dim:
        raise exceptions.DimensionMismatch(
            f"Input dimension {x.shape[-1]} does not match network dimension "
            f"{net.dim}."
        )
    return x


def _forward(params, x):
    pre_activation = x @ params["w1"].T + params["b1"]
    activation = np.maximum(pre_activation, 0.0)
    return activation @ params["w2"] + params["b2"], pre_activation, activation


def forward(net, x):
    """Evaluate the network at 'x' of shape (d,) or (N, d). Inputs of log-space
    networks are log prices.

    :raises: DimensionMismatch
    """
    x = _check_inputs(net, x)
    output = np.maximum(x @ net.w1.T + net.b1, 0.0) @ net.w2 + net.b2
    return float(output) if x.ndim == 1 else output


def _gradient(params, x, y):
    output, pre_activation, activation = _forward(params, x)
    residual = 2.0 * (output - y) / y.size
    # subgradient 0 at exactly-zero pre-activations
    back = np.outer(residual, params["w2"]) * (pre_activation > 0.0)
    return {
        "w1": back.T @ x,
        "b1": back.sum(axis=0),
        "w2": activation.T @ residual,
        "b2": np.array(residual.sum()),
    }


def gradient(net, inputs, targets):
    """Gradient of the mean squared error over the batch with respect to every
    parameter, as dict keyed 'w1', 'b1', 'w2', 'b2'.
    """
    inputs = _check_inputs(net, np.atleast_2d(inputs))
    return _gradient(net.parameters(), inputs, np.asarray(targets, dtype=float))


def _mse(params, x, y):
    return float(np.mean((_forward(params, x)[0] - y) ** 2))


def adam_step(params, grads, state, cfg):
    """One bias-corrected Adam update.

    :return: (updated params, updated AdamState)
    """
    step = state.step + 1
    beta1, beta2 = cfg.adam_beta1, cfg.adam_beta2
    correction1 = 1.0 - beta1**step
    correction2 = 1.0 - beta2**step

    updated, first, second = {}, {}, {}
    for name in _PARAMETER_NAMES:
        g = grads[name]
        first[name] = beta1 * state.first[name] + (1.0 - beta1) * g
        second[name] = beta2 * state.second[name] + (1.0 - beta2) * g * g
        updated[name] = params[name] - cfg.learning_rate * (
            first[name] / correction1
        ) / (np.sqrt(second[name] / correction2) + cfg.adam_eps)

    return updated, AdamState(first, second, step)


def fit(initial, inputs, targets, cfg, seed):
    """Train a copy of 'initial' on (inputs, targets) with mini-batch Adam.

    The points are split once into training and validation sets; batches are
    re-shuffled every epoch. Training stops after 'cfg.patience' epochs without
    validation improvement and the weights with the best validation MSE are
    returned (the initial weights included).

    :raises: InsufficientData, DimensionMismatch, NetworkError
    :return: (ShallowNet, FitReport)
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs[:, np.newaxis]
    targets = np.asarray(targets, dtype=float).reshape(-1)
    n_points = targets.size

    if n_points < MIN_TRAINING_POINTS:
        raise exceptions.InsufficientData(
            f"At least {MIN_TRAINING_POINTS} training points required, "
            f"got {n_points}."
        )
    inputs = _check_inputs(initial, inputs)
    if inputs.shape[0] != n_points:
        raise exceptions.DimensionMismatch("Number of inputs and targets differ.")
    if not np.all(np.isfinite(targets)):
        raise exceptions.NetworkError("Training targets must be finite.")

    if np.all(targets == targets[0]):
        logger.warning(f"Degenerate targets (all {targets[0]}), skipping descent")
        net = ShallowNet(
            initial.w1.copy(),
            initial.b1.copy(),
            np.zeros(initial.hidden),
            targets[0],
            initial.input_space,
        )
        return net, FitReport(0.0, 0.0, 0, False, degenerate=True)

    rng = substream(seed, _FIT_STREAM)
    order = rng.permutation(n_points)
    n_fit = min(max(int(round(cfg.split * n_points)), 1), n_points - 1)
    x_fit, y_fit = inputs[order[:n_fit]], targets[order[:n_fit]]
    x_val, y_val = inputs[order[n_fit:]], targets[order[n_fit:]]
    batch_size = max(1, int(np.ceil(cfg.batch_fraction * n_fit)))

    params = initial.parameters()
    state = AdamState.zeros_like(params)
    best_params = params
    best_loss = _mse(params, x_val, y_val)
    wait = 0
    early_stopped = False

    epoch = 0
    while epoch < cfg.max_epochs:
        epoch += 1
        shuffled = rng.permutation(n_fit)
        for start in range(0, n_fit, batch_size):
            batch = shuffled[start : start + batch_size]
            grads = _gradient(params, x_fit[batch], y_fit[batch])
            params, state = adam_step(params, grads, state, cfg)

        loss = _mse(params, x_val, y_val)
        if loss < best_loss:
            best_loss, best_params, wait = loss, params, 0
        else:
            wait += 1
            if wait >= cfg.patience:
                early_stopped = True
                break

    net = ShallowNet.from_parameters(best_params, initial.input_space)
    report = FitReport(
        train_mse=_mse(best_params, x_fit, y_fit),
        validation_mse=best_loss,
        epochs=epoch,
        early_stopped=early_stopped,
    )
    logger.debug(
        f"Fitted p={net.hidden} on {n_points} points: {epoch} epochs, "
        f"validation MSE {best_loss:.3e}"
    )
    return net, report


def place_knots(net, inputs, seed):
    """Return a copy of 'net' whose ReLU knots lie inside the data.

    Unit i keeps its weights w1_i; its bias is set to -z_i, where z_i is a
    quantile of the projections inputs·w1_i at a level drawn from the i-th of p
    equal strata of (0, 1). Every leg is then active on part of the inputs and
    inactive on the rest.

    :raises: DimensionMismatch, InsufficientData
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs[:, np.newaxis]
    inputs = _check_inputs(net, inputs)
    if inputs.shape[0] < MIN_TRAINING_POINTS:
        raise exceptions.InsufficientData(
            f"At least {MIN_TRAINING_POINTS} points required to place knots, "
            f"got {inputs.shape[0]}."
        )

    rng = substream(seed, _KNOT_STREAM)
    strata = rng.permutation(net.hidden)
    levels = (strata + rng.uniform(size=net.hidden)) / net.hidden
    projections = inputs @ net.w1.T
    knots = np.array(
        [np.quantile(projections[:, i], levels[i]) for i in range(net.hidden)]
    )
    return ShallowNet(net.w1.copy(), -knots, net.w2.copy(), net.b2, net.input_space)


def warm_start(net_next_date):
    """Initial network for the fit at the preceding date."""
    return net_next_date.copy()


class ShallowNetSchema(Schema):
    hidden = fields.Integer(data_key="p", required=True)
    dim = fields.Integer(data_key="d", required=True)
    input_space = fields.String(required=True, validate=validate.OneOf(INPUT_SPACES))
    w1 = fields.List(fields.List(fields.Float()), required=True)
    b1 = fields.List(fields.Float(), required=True)
    w2 = fields.List(fields.Float(), required=True)
    b2 = fields.Float(required=True)

    @post_load
    def make_net(self, data, **kwargs):
        hidden, dim = data.pop("hidden"), data.pop("dim")
        net = ShallowNet(**data)
        if (net.hidden, net.dim) != (hidden, dim):
            raise ValidationError(
                f"Declared shape ({hidden}, {dim}) does not match weights.", "w1"
            )
        return net


class FitReportSchema(Schema):
    train_mse = fields.Float(required=True)
    validation_mse = fields.Float(required=True)
    epochs = fields.Integer(required=True)
    early_stopped = fields.Boolean(required=True)
    degenerate = fields.Boolean(load_default=False)

    @post_load
    def make_report(self, data, **kwargs):
        return FitReport(**data)


class TrainConfigSchema(Schema):
    learning_rate = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    batch_fraction = fields.Float(
        validate=validate.Range(min=0, max=1, min_inclusive=False)
    )
    patience = fields.Integer(validate=validate.Range(min=1))
    split = fields.Float(
        validate=validate.Range(min=0, max=1, min_inclusive=False, max_inclusive=False)
    )
    max_epochs = fields.Integer(validate=validate.Range(min=1))
    adam_beta1 = fields.Float(
        validate=validate.Range(min=0, max=1, max_inclusive=False)
    )
    adam_beta2 = fields.Float(
        validate=validate.Range(min=0, max=1, max_inclusive=False)
    )
    adam_eps = fields.Float(validate=validate.Range(min=0, min_inclusive=False))

    @post_load
    def make_config(self, data, **kwargs):
        return TrainConfig(**data)
