"""Risk-neutral multivariate GBM market and path generation on the monitoring
grid."""
import numpy as np
from joblib import Parallel, delayed
from marshmallow import Schema, fields, post_load, validate
from scipy.special import ndtri

from . import exceptions, init_logger

logger = init_logger(__name__)

# number of paths sharing one counter-based substream
PATH_BLOCK_SIZE = 4096

# tolerance for negative Cholesky pivots caused by rounding
PIVOT_TOLERANCE = 1e-12

# salt separating evaluation paths from training paths
EVALUATION_SALT = 0x5EED_B0B5_CAFE_F00D

_SEED_MASK = (1 << 64) - 1
_PATH_STREAM = 0


def derive_seed(seed, *indices):
    """Return a 64-bit sub-seed derived from 'seed' and the integer 'indices'.
    Distinct index tuples give statistically independent streams.
    """
    sequence = np.random.SeedSequence([int(seed) & _SEED_MASK, *indices])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def substream(seed, *indices):
    """Return a numpy Generator driven by the counter-based Philox bit
    generator, keyed by 'seed' and 'indices'.
    """
    sequence = np.random.SeedSequence([int(seed) & _SEED_MASK, *indices])
    return np.random.Generator(np.random.Philox(sequence))


def evaluation_seed(seed):
    """Seed of the fresh paths used for bounds and backtests."""
    return (int(seed) & _SEED_MASK) ^ EVALUATION_SALT


def standard_normals(rng, shape):
    """Draw standard normals by inverting the normal CDF at uniforms on the
    open unit interval (52-bit grid, midpoints, hence never 0 or 1).
    """
    counts = rng.integers(0, 1 << 52, size=shape, dtype=np.uint64)
    return ndtri((counts + 0.5) * 2.0**-52)


def cholesky(corr):
    """Return the lower-triangular factor L with L·Lᵀ = corr.

    Pivots in [-PIVOT_TOLERANCE, 0] are clamped to zero (the column is then
    zero), which admits positive semi-definite, rank-deficient matrices.

    :raises: NotPositiveSemiDefinite if corr is not a symmetric correlation
        matrix or a pivot is below -PIVOT_TOLERANCE
    """
    corr = np.atleast_2d(np.asarray(corr, dtype=float))
    dim = corr.shape[0]
    if corr.shape != (dim, dim):
        raise exceptions.NotPositiveSemiDefinite(
            f"Correlation matrix must be square, got shape {corr.shape}."
        )
    if not np.allclose(corr, corr.T, rtol=0.0, atol=PIVOT_TOLERANCE):
        raise exceptions.NotPositiveSemiDefinite("Correlation matrix is not symmetric.")
    if not np.allclose(np.diag(corr), 1.0, rtol=0.0, atol=PIVOT_TOLERANCE):
        raise exceptions.NotPositiveSemiDefinite(
            "Correlation matrix must have unit diagonal."
        )

    lower = np.zeros((dim, dim))
    for j in range(dim):
        pivot = corr[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot < -PIVOT_TOLERANCE:
            raise exceptions.NotPositiveSemiDefinite(
                f"Negative pivot {pivot:.3e} in column {j}."
            )
        residual = corr[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]
        if pivot <= 0.0:
            if np.any(np.abs(residual) > PIVOT_TOLERANCE):
                raise exceptions.NotPositiveSemiDefinite(
                    f"Zero pivot with non-zero off-diagonal entries in column {j}."
                )
            continue
        lower[j, j] = np.sqrt(pivot)
        lower[j + 1 :, j] = residual / lower[j, j]

    return lower


class GbmModel:
    """Multivariate geometric Brownian motion under the risk-neutral measure.
    Scalar spot, dividend and vol are broadcast to 'dim' assets.
    """

    def __init__(self, spot, rate, vol, corr=None, dividend=0.0, dim=None):
        """:raises: ModelError on non-positive spot or vol,
        NotPositiveSemiDefinite on an invalid correlation matrix
        """
        if dim is None:
            dim = np.size(spot)
        self.dim = int(dim)
        self.spot = np.broadcast_to(np.asarray(spot, dtype=float), (self.dim,)).copy()
        self.vol = np.broadcast_to(np.asarray(vol, dtype=float), (self.dim,)).copy()
        self.dividend = np.broadcast_to(
            np.asarray(dividend, dtype=float), (self.dim,)
        ).copy()
        self.rate = float(rate)
        self.corr = np.eye(self.dim) if corr is None else np.asarray(corr, dtype=float)

        if np.any(self.spot <= 0):
            raise exceptions.ModelError("Spot prices must be strictly positive.")
        if np.any(self.vol <= 0):
            raise exceptions.ModelError("Volatilities must be strictly positive.")

        # fails loudly for invalid correlation matrices
        self.lower = cholesky(self.corr)

    @property
    def covariance(self):
        """Instantaneous covariance Σ with Σ_ij = ρ_ij σ_i σ_j."""
        return self.corr * np.outer(self.vol, self.vol)

    @property
    def log_drift(self):
        """Per-year drift of the log prices, r - q - σ²/2."""
        return self.rate - self.dividend - 0.5 * self.vol**2

    def normalized(self, scale):
        """Same market with spot prices divided by 'scale'."""
        return GbmModel(
            self.spot / scale,
            self.rate,
            self.vol,
            corr=self.corr,
            dividend=self.dividend,
        )


class ExerciseSchedule:
    """Monitoring dates t_0 = 0 < t_1 < ... < t_M = T together with the mask of
    dates where early exercise is allowed.
    """

    def __init__(self, times, exercise=None):
        """:raises: InvalidSchedule"""
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise exceptions.InvalidSchedule("At least one monitoring date required.")
        if times[0] != 0.0:
            raise exceptions.InvalidSchedule("Schedule must start at t = 0.")
        if np.any(np.diff(times) <= 0):
            raise exceptions.InvalidSchedule("Dates must be strictly increasing.")

        if exercise is None:
            exercise = np.ones(times.size, dtype=bool)
        exercise = np.asarray(exercise, dtype=bool)
        if exercise.shape != times.shape:
            raise exceptions.InvalidSchedule(
                "Exercise mask must have one flag per date."
            )
        # the claim always pays at maturity
        exercise = exercise.copy()
        exercise[-1] = True

        self.times = times
        self.exercise = exercise

    @classmethod
    def bermudan(cls, maturity, n_dates):
        """Equally spaced dates with exercise allowed on every date."""
        return cls(np.linspace(0.0, maturity, n_dates + 1))

    @classmethod
    def european(cls, maturity, n_dates=1):
        """Equally spaced monitoring dates, payment at maturity only."""
        exercise = np.zeros(n_dates + 1, dtype=bool)
        return cls(np.linspace(0.0, maturity, n_dates + 1), exercise=exercise)

    @property
    def n_dates(self):
        """Number M of dates after t_0."""
        return self.times.size - 1

    @property
    def maturity(self):
        return float(self.times[-1])

    @property
    def increments(self):
        return np.diff(self.times)


class PathSet:
    """Immutable tensor of asset prices, paths × (M+1) dates × assets."""

    def __init__(self, values, seed, schedule):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3 or values.shape[1] != schedule.times.size:
            raise exceptions.ModelError(
                f"Path tensor of shape {values.shape} does not match the schedule."
            )
        values.setflags(write=False)
        self.values = values
        self.seed = seed
        self.schedule = schedule

    @property
    def n_paths(self):
        return self.values.shape[0]

    @property
    def dim(self):
        return self.values.shape[2]


def _simulate_block(seed, block, n_block, drift, diffusion, lower):
    """Log-price increments of one block of paths. The normal draws of path n,
    date m and asset δ sit at a fixed position of the block's Philox stream.
    """
    rng = substream(seed, _PATH_STREAM, block)
    shocks = standard_normals(rng, (n_block,) + drift.shape) @ lower.T
    return drift + diffusion * shocks


def simulate_paths(model, schedule, n_paths, seed, threads=1):
    """Simulate 'n_paths' paths of the exact log-normal transition on the dates
    of 'schedule'. The result only depends on 'seed', never on 'threads'.

    :return: PathSet
    """
    if n_paths < 1:
        raise exceptions.ModelError("At least one path required.")

    dt = schedule.increments[:, np.newaxis]
    drift = model.log_drift * dt
    diffusion = model.vol * np.sqrt(dt)

    n_blocks = -(-n_paths // PATH_BLOCK_SIZE)
    sizes = [
        min(PATH_BLOCK_SIZE, n_paths - b * PATH_BLOCK_SIZE) for b in range(n_blocks)
    ]
    blocks = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_simulate_block)(seed, b, size, drift, diffusion, model.lower)
        for b, size in enumerate(sizes)
    )

    log_paths = np.zeros((n_paths, schedule.times.size, model.dim))
    np.cumsum(np.concatenate(blocks), axis=1, out=log_paths[:, 1:])
    values = model.spot * np.exp(log_paths)

    logger.debug(
        f"Simulated {n_paths} paths, {schedule.n_dates} dates, "
        f"{model.dim} assets (seed {seed})"
    )
    return PathSet(values, seed=seed, schedule=schedule)


def normalization_scale(model):
    """Scalar dividing all prices, strikes and barriers before training. Equals
    the common spot when all spots coincide.
    """
    return float(np.max(model.spot))


class GbmModelSchema(Schema):
    spot = fields.List(fields.Float(), required=True, validate=validate.Length(min=1))
    rate = fields.Float(required=True)
    dividend = fields.List(fields.Float(), required=True)
    vol = fields.List(fields.Float(), required=True)
    corr = fields.List(fields.List(fields.Float()), required=True)

    @post_load
    def make_model(self, data, **kwargs):
        return GbmModel(**data)


class ScheduleSchema(Schema):
    times = fields.List(fields.Float(), required=True, validate=validate.Length(min=2))
    exercise = fields.List(fields.Boolean(), required=True)

    @post_load
    def make_schedule(self, data, **kwargs):
        return ExerciseSchedule(**data)
