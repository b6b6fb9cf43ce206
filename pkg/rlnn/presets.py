"""Built-in parameter sets, published reference values and explicit model
blocks from the configuration."""
import numpy as np

from . import PARAMETER_SETS, exceptions
from .market import ExerciseSchedule, GbmModel
from .payoff import (
    ARITHMETIC_BASKET_PUT,
    DOWN_OUT_CALL,
    MAX_CALL,
    PAYOFF_KINDS,
    VANILLA_PUT,
    PayoffSpec,
)

BASKET_WEIGHTS = (0.381, 0.065, 0.057, 0.270, 0.227)
BASKET_VOLS = (0.518, 0.648, 0.623, 0.570, 0.530)
BASKET_CORRELATION = (
    (1.00, 0.79, 0.82, 0.91, 0.84),
    (0.79, 1.00, 0.73, 0.80, 0.76),
    (0.82, 0.73, 1.00, 0.77, 0.72),
    (0.91, 0.80, 0.77, 1.00, 0.90),
    (0.84, 0.76, 0.72, 0.90, 1.00),
)
MAX_CALL_DIMS = (2, 3, 5)
DEFAULT_BARRIER = 0.97

# maturity of the static hedge of the European put (one month)
EUROPEAN_HEDGE_MATURITY = 1.0 / 12.0

# columns (moneyness K/S or barrier level), options counts and delta hedge
# rebalances of the hedging tables
HEDGE_DEFAULTS = {
    "set4": {"columns": (0.5, 1.0, 1.5), "counts": (10, 25, 50), "rebalances": 25},
    "set5": {
        "columns": (0.91, 0.93, 0.95, 0.97),
        "counts": (5, 10, 20),
        "rebalances": 12,
    },
}

# COS values for set1, SGBM values for set2, binomial values for set3
REFERENCE_PRICES = {
    ("set1", 1): {36.0: 4.4425, 40.0: 2.2929, 44.0: 1.0984},
    ("set2", 5): {0.9: 0.2220, 1.0: 0.1803, 1.1: 0.1463},
    ("set3", 2): {90.0: 8.075, 100.0: 13.902, 110.0: 21.345},
    ("set3", 3): {90.0: 11.29, 100.0: 18.69, 110.0: 27.58},
}

# 95% confidence intervals from the literature for the max call
REFERENCE_INTERVALS = {
    ("set3", 2): {
        90.0: (8.053, 8.082),
        100.0: (13.892, 13.934),
        110.0: (21.316, 21.359),
    },
    ("set3", 3): {
        90.0: (11.265, 11.308),
        100.0: (18.661, 18.728),
        110.0: (27.512, 27.663),
    },
    ("set3", 5): {
        90.0: (16.620, 16.653),
        100.0: (26.115, 26.164),
        110.0: (36.710, 36.798),
    },
}

_DEFAULT_DIMS = {"set1": 1, "set2": 5, "set3": 2, "set4": 1, "set5": 1}


def _check_dim(name, dim, allowed):
    if dim is not None and dim not in allowed:
        raise exceptions.InvalidConfigError(
            f"Parameter set {name} does not support {dim} assets."
        )


def parameter_set(name, s0=None, dim=None, strike=None, barrier=None):
    """Model, schedule and claim of the named parameter set. 's0' replaces the
    spot of every asset, 'strike' and 'barrier' the claim defaults.

    :raises: InvalidConfigError for unknown names or unsupported dimensions
    :return: (GbmModel, ExerciseSchedule, PayoffSpec)
    """
    if name not in PARAMETER_SETS:
        raise exceptions.InvalidConfigError(f"Unknown parameter set: {name}")

    if name == "set1":
        _check_dim(name, dim, (1,))
        spot = 40.0 if s0 is None else s0
        model = GbmModel(spot, rate=0.06, vol=0.2)
        schedule = ExerciseSchedule.bermudan(1.0, 10)
        spec = PayoffSpec(VANILLA_PUT, 40.0 if strike is None else strike)

    elif name == "set2":
        _check_dim(name, dim, (5,))
        spot = 1.0 if s0 is None else s0
        model = GbmModel(
            spot, rate=0.05, vol=BASKET_VOLS, corr=BASKET_CORRELATION, dim=5
        )
        schedule = ExerciseSchedule.bermudan(1.0, 10)
        spec = PayoffSpec(
            ARITHMETIC_BASKET_PUT,
            1.0 if strike is None else strike,
            basket_weights=BASKET_WEIGHTS,
        )

    elif name == "set3":
        _check_dim(name, dim, MAX_CALL_DIMS)
        dim = dim or 2
        spot = 100.0 if s0 is None else s0
        model = GbmModel(spot, rate=0.05, vol=0.2, dividend=0.1, dim=dim)
        schedule = ExerciseSchedule.bermudan(3.0, 9)
        spec = PayoffSpec(MAX_CALL, 100.0 if strike is None else strike)

    elif name == "set4":
        _check_dim(name, dim, (1,))
        spot = 1.0 if s0 is None else s0
        model = GbmModel(spot, rate=0.1, vol=0.3)
        schedule = ExerciseSchedule.european(1.0)
        spec = PayoffSpec(VANILLA_PUT, 1.0 if strike is None else strike)

    else:
        _check_dim(name, dim, (1,))
        spot = 1.0 if s0 is None else s0
        model = GbmModel(spot, rate=0.1, vol=0.3)
        schedule = ExerciseSchedule.european(0.2, 5)
        spec = PayoffSpec(
            DOWN_OUT_CALL,
            1.0 if strike is None else strike,
            barrier=DEFAULT_BARRIER if barrier is None else barrier,
        )

    spec.validate(model.spot)
    return model, schedule, spec


def _lookup(table, name, s0, dim):
    dim = dim or _DEFAULT_DIMS.get(name)
    values = table.get((name, dim), {})
    if s0 is None:
        s0 = {"set1": 40.0, "set2": 1.0, "set3": 100.0}.get(name)
    for spot, value in values.items():
        if np.isclose(spot, s0, rtol=1e-9, atol=0.0):
            return value
    return None


def reference_price(name, s0=None, dim=None):
    """Published reference price, or None if there is none."""
    return _lookup(REFERENCE_PRICES, name, s0, dim)


def reference_interval(name, s0=None, dim=None):
    """Published 95% confidence interval, or None."""
    return _lookup(REFERENCE_INTERVALS, name, s0, dim)


def _floats(section, key, required=True):
    text = section.get(key)
    if text is None or not str(text).strip():
        if required:
            raise exceptions.InvalidConfigError(
                f"Option {key} in section MODEL is required."
            )
        return None
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise exceptions.InvalidConfigError(
            f"Wrong type for option {key} in section MODEL."
        )


def _scalar(section, key, required=True):
    values = _floats(section, key, required=required)
    if values is None:
        return None
    if len(values) != 1:
        raise exceptions.InvalidConfigError(
            f"Option {key} in section MODEL must be a single number."
        )
    return values[0]


def _matrix(section, key):
    text = section.get(key)
    if text is None or not str(text).strip():
        return None
    try:
        return [[float(v) for v in row.split(",")] for row in str(text).split(";")]
    except ValueError:
        raise exceptions.InvalidConfigError(
            f"Wrong type for option {key} in section MODEL."
        )


def model_from_block(section):
    """Build model, schedule and claim from the options of the MODEL section.
    Lists are comma separated, matrix rows are separated by ';'.

    :raises: InvalidConfigError, ModelError, PayoffError
    :return: (GbmModel, ExerciseSchedule, PayoffSpec)
    """
    spot = _floats(section, "spot")
    vol = _floats(section, "vol")
    dividend = _floats(section, "dividend", required=False) or [0.0]
    dim = max(len(spot), len(vol), len(dividend))
    model = GbmModel(
        spot,
        _scalar(section, "rate"),
        vol,
        corr=_matrix(section, "corr"),
        dividend=dividend,
        dim=dim,
    )

    kind = section.get("kind") or VANILLA_PUT
    if kind not in PAYOFF_KINDS:
        raise exceptions.InvalidConfigError(f"Unknown payoff kind: {kind}")

    try:
        dates = int(section.get("dates") or 1)
    except ValueError:
        raise exceptions.InvalidConfigError(
            "Wrong type for option dates in section MODEL."
        )
    maturity = _scalar(section, "maturity")
    if kind == DOWN_OUT_CALL:
        schedule = ExerciseSchedule.european(maturity, dates)
    else:
        schedule = ExerciseSchedule.bermudan(maturity, dates)

    spec = PayoffSpec(
        kind,
        _scalar(section, "strike"),
        basket_weights=_floats(section, "weights", required=False),
        barrier=_scalar(section, "barrier", required=False),
    )
    spec.validate(model.spot)
    return model, schedule, spec
