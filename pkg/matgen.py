#!/usr/bin/env python3
"""
Matrix Generator Module
Generates n x p data matrices with i.i.d. or m-dependent rows from entry
distributions whose standardized moments and tail exponents are known in
closed form.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import gammaln

from errors import InvalidParameterError
from settings import default_workers

logger = logging.getLogger(__name__)

# Column block width of one RNG stream. Fixed so that output never depends
# on the worker count.
GENERATION_BLOCK = 256
MAX_SEED = 2 ** 64


class Family(str, Enum):
    GAUSSIAN = 'gaussian'
    CENTERED_EXPONENTIAL = 'centered_exponential'
    SYMMETRIC_WEIBULL = 'symmetric_weibull'
    TWO_POINT_SKEWED = 'two_point_skewed'
    STUDENT_T = 'student_t'
    RADEMACHER = 'rademacher'


# families that take a shape parameter, with the name used in messages
_PARAMETER_NAMES = {
    Family.SYMMETRIC_WEIBULL: 'a',
    Family.TWO_POINT_SKEWED: 'q',
    Family.STUDENT_T: 'nu',
}


@dataclass(frozen=True)
class DistributionSpec:
    """Named entry distribution: x = location + scale * z with z standardized.

    ``param`` is the tail exponent a of symmetric_weibull (0 < a <= 2), the
    success probability q of two_point_skewed (0 < q < 1) or the degrees of
    freedom nu of student_t (nu > 2). Other families take no parameter.
    """
    family: Family
    param: Optional[float] = None
    location: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            choices = ', '.join(f.value for f in Family)
            raise InvalidParameterError(f"Unknown distribution '{self.family}'. Available: {choices}")
        object.__setattr__(self, 'family', family)

        if not np.isfinite(self.location):
            raise InvalidParameterError(f"location must be finite, got {self.location}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise InvalidParameterError(f"scale must be positive, got {self.scale}")

        name = _PARAMETER_NAMES.get(family)
        if name is None:
            if self.param is not None:
                raise InvalidParameterError(f"{family.value} takes no shape parameter")
            return
        if self.param is None:
            raise InvalidParameterError(f"{family.value} requires parameter {name}")

        value = float(self.param)
        object.__setattr__(self, 'param', value)
        if family is Family.SYMMETRIC_WEIBULL and not 0 < value <= 2:
            raise InvalidParameterError(f"symmetric_weibull needs 0 < a <= 2, got {value}")
        if family is Family.TWO_POINT_SKEWED and not 0 < value < 1:
            raise InvalidParameterError(f"two_point_skewed needs 0 < q < 1, got {value}")
        if family is Family.STUDENT_T and not value > 2:
            raise InvalidParameterError(f"student_t needs nu > 2, got {value}")

    @property
    def label(self) -> str:
        if self.param is None:
            return self.family.value
        return f"{self.family.value}({_PARAMETER_NAMES[self.family]}={self.param:g})"

    def to_dict(self) -> dict:
        return {
            'family': self.family.value,
            'param': self.param,
            'location': self.location,
            'scale': self.scale,
        }


@dataclass(frozen=True)
class DataMatrix:
    """An n x p real matrix: rows are observations, columns are variables."""
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise InvalidParameterError(f"Data matrix must be 2-dimensional, got shape {arr.shape}")
        n, p = arr.shape
        if n < 2 or p < 2:
            raise InvalidParameterError(f"Data matrix needs n >= 2 and p >= 2, got {n} x {p}")
        if not np.all(np.isfinite(arr)):
            bad_row, bad_col = np.argwhere(~np.isfinite(arr))[0]
            raise InvalidParameterError(f"Non-finite entry at row {bad_row + 1}, column {bad_col + 1}")
        arr.setflags(write=False)
        object.__setattr__(self, 'values', arr)

    @classmethod
    def from_entries(cls, n: int, p: int, entries: Sequence[float]) -> 'DataMatrix':
        """Build from n*p row-major entries"""
        flat = np.asarray(entries, dtype=np.float64).ravel()
        if flat.size != n * p:
            raise InvalidParameterError(f"Expected {n * p} entries for a {n} x {p} matrix, got {flat.size}")
        return cls(flat.reshape(n, p))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def entries(self) -> np.ndarray:
        return self.values.ravel()

    def column(self, j: int) -> np.ndarray:
        """Column j, 1-based"""
        if not 1 <= j <= self.p:
            raise InvalidParameterError(f"Column index {j} outside 1..{self.p}")
        return self.values[:, j - 1]


def _check_dimensions(n: int, p: int):
    if int(n) != n or int(p) != p:
        raise InvalidParameterError(f"Dimensions must be integers, got n={n}, p={p}")
    if n < 2 or p < 2:
        raise InvalidParameterError(f"Need n >= 2 and p >= 2, got n={n}, p={p}")


def _check_seed(seed: int):
    if int(seed) != seed or not 0 <= seed < MAX_SEED:
        raise InvalidParameterError(f"Seed must be an integer in [0, 2^64), got {seed}")


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by (seed, column block)"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(block,))))


def _standard_draws(spec: DistributionSpec, rng: np.random.Generator, shape) -> np.ndarray:
    """Mean-zero, unit-variance draws from the spec's family"""
    family = spec.family
    if family is Family.GAUSSIAN:
        return rng.standard_normal(shape)
    if family is Family.CENTERED_EXPONENTIAL:
        return rng.standard_exponential(shape) - 1.0
    if family is Family.SYMMETRIC_WEIBULL:
        a = spec.param
        # |x|^a ~ Gamma(1/a) for density proportional to exp(-|x|^a)
        magnitude = rng.standard_gamma(1.0 / a, shape) ** (1.0 / a)
        sign = np.where(rng.random(shape) < 0.5, -1.0, 1.0)
        return sign * magnitude / np.exp(0.5 * (gammaln(3.0 / a) - gammaln(1.0 / a)))
    if family is Family.TWO_POINT_SKEWED:
        q = spec.param
        hits = (rng.random(shape) < q).astype(np.float64)
        return (hits - q) / np.sqrt(q * (1.0 - q))
    if family is Family.STUDENT_T:
        nu = spec.param
        return rng.standard_t(nu, shape) / np.sqrt(nu / (nu - 2.0))
    if family is Family.RADEMACHER:
        return np.where(rng.random(shape) < 0.5, -1.0, 1.0)
    raise InvalidParameterError(f"Unsupported family {family}")


def _fill_block(spec: DistributionSpec, n: int, start: int, stop: int, seed: int, block: int) -> np.ndarray:
    return _standard_draws(spec, block_generator(seed, block), (n, stop - start))


def _standard_matrix(spec: DistributionSpec, n: int, columns: int, seed: int, workers: int) -> np.ndarray:
    bounds = [(start, min(start + GENERATION_BLOCK, columns))
              for start in range(0, columns, GENERATION_BLOCK)]
    if workers > 1 and len(bounds) > 1:
        blocks = Parallel(n_jobs=workers, prefer='threads')(
            delayed(_fill_block)(spec, n, start, stop, seed, block)
            for block, (start, stop) in enumerate(bounds)
        )
    else:
        blocks = [_fill_block(spec, n, start, stop, seed, block)
                  for block, (start, stop) in enumerate(bounds)]
    return np.hstack(blocks) if len(blocks) > 1 else blocks[0]


def sample_matrix(spec: DistributionSpec, n: int, p: int, seed: int, workers: int = None) -> DataMatrix:
    """n x p matrix of i.i.d. draws from spec, deterministic in (spec, n, p, seed)"""
    _check_dimensions(n, p)
    _check_seed(seed)
    workers = workers or default_workers()
    z = _standard_matrix(spec, int(n), int(p), seed, workers)
    logger.debug(f"Sampled {n} x {p} matrix from {spec.label} (seed {seed})")
    return DataMatrix(spec.location + spec.scale * z)


def sample_m_dependent(spec: DistributionSpec, n: int, p: int, m: int, seed: int,
                       workers: int = None) -> DataMatrix:
    """Rows are moving averages x_j = m^(-1/2) * sum_{l<m} e_{j+l} of i.i.d. innovations.

    Variables at lag >= m are independent; population correlation at lag d
    is max(0, m - d) / m. With m = 1 the output equals sample_matrix.
    """
    _check_dimensions(n, p)
    _check_seed(seed)
    if int(m) != m or not 1 <= m <= p - 1:
        raise InvalidParameterError(f"m must be an integer in 1..{p - 1}, got {m}")
    m = int(m)
    workers = workers or default_workers()
    innovations = _standard_matrix(spec, int(n), int(p) + m - 1, seed, workers)
    if m == 1:
        z = innovations
    else:
        z = sliding_window_view(innovations, m, axis=1).sum(axis=-1) / np.sqrt(m)
    logger.debug(f"Sampled {n} x {p} MA({m}) matrix from {spec.label} (seed {seed})")
    return DataMatrix(spec.location + spec.scale * z)


def standardized_moments(spec: DistributionSpec):
    """Closed-form (mu, sigma, kappa), kappa = E(x - mu)^3 / sigma^3"""
    family = spec.family
    if family is Family.CENTERED_EXPONENTIAL:
        kappa = 2.0
    elif family is Family.TWO_POINT_SKEWED:
        q = spec.param
        kappa = (1.0 - 2.0 * q) / np.sqrt(q * (1.0 - q))
    elif family is Family.STUDENT_T:
        if spec.param <= 3:
            raise InvalidParameterError(f"Skewness of student_t is undefined for nu <= 3 (nu={spec.param:g})")
        kappa = 0.0
    else:
        kappa = 0.0
    return spec.location, spec.scale, float(kappa)


def tail_exponent(spec: DistributionSpec) -> float:
    """Largest alpha with E exp(t0 |x|^alpha) finite for some t0 > 0, capped at 2"""
    family = spec.family
    if family in (Family.GAUSSIAN, Family.TWO_POINT_SKEWED, Family.RADEMACHER):
        return 2.0
    if family is Family.CENTERED_EXPONENTIAL:
        return 1.0
    if family is Family.SYMMETRIC_WEIBULL:
        return spec.param
    return 0.0


def satisfies_moment_condition(spec: DistributionSpec, alpha: float) -> bool:
    if not 0 < alpha <= 2:
        raise InvalidParameterError(f"alpha must lie in (0, 2], got {alpha}")
    return alpha <= tail_exponent(spec)


def ma_population_correlation(p: int, m: int) -> np.ndarray:
    """Population correlation of sample_m_dependent rows: r_ij = max(0, m - |i-j|) / m"""
    if p < 2 or not 1 <= m <= p - 1:
        raise InvalidParameterError(f"Need p >= 2 and 1 <= m <= p - 1, got p={p}, m={m}")
    lag = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    return np.maximum(0, m - lag) / m
