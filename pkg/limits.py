#!/usr/bin/env python3
"""
Limits Module
Regime maps, normalization of coherence statistics, the type I extreme
value limit, the chi-square "intermediate" approximation and the band
condition bookkeeping for m-dependent populations.

All logarithms are natural; log log p is the iterated natural log.
"""

import logging
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import erfc, log_ndtr

from coherence import StatisticKind
from errors import InvalidParameterError

logger = logging.getLogger(__name__)

LOG_SQRT_8PI = 0.5 * math.log(8.0 * math.pi)
MIN_P = 8
SF_INV_MAX_ITER = 200


class AlphaRegime(str, Enum):
    LOW = 'low'    # 0 < alpha <= 1
    MID = 'mid'    # 1 < alpha <= 4/3


class PairCountMode(str, Enum):
    EXACT = 'exact'        # p(p-1)/2
    SQUARED = 'squared'    # p^2/2


@dataclass(frozen=True)
class RegimeParams:
    """(n, p, alpha regime, kappa): fixes W and the reference distributions"""
    n: int
    p: int
    alpha_regime: AlphaRegime = AlphaRegime.LOW
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'alpha_regime', AlphaRegime(self.alpha_regime))
        if int(self.n) != self.n or self.n < 2:
            raise InvalidParameterError(f"n must be an integer >= 2, got {self.n}")
        if int(self.p) != self.p or self.p < MIN_P:
            raise InvalidParameterError(f"p must be an integer >= {MIN_P} for normalized statistics, got {self.p}")
        if not math.isfinite(self.kappa):
            raise InvalidParameterError(f"kappa must be finite, got {self.kappa}")
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'p', int(self.p))
        object.__setattr__(self, 'kappa', float(self.kappa))

    @property
    def log_p(self) -> float:
        return math.log(self.p)

    def to_dict(self) -> dict:
        return {'n': self.n, 'p': self.p, 'alpha_regime': self.alpha_regime.value, 'kappa': self.kappa}


@dataclass(frozen=True)
class NormalizedStat:
    w: float
    source_kind: StatisticKind
    regime: RegimeParams


@dataclass(frozen=True)
class GammaSet:
    """Indices (1-based) having a partner with |r_ij| > 1 - delta"""
    indices: List[int] = field(default_factory=list)
    fraction: float = 0.0


def beta_of_alpha(alpha: float) -> float:
    if not 0 < alpha <= 2:
        raise InvalidParameterError(f"alpha must lie in (0, 2], got {alpha}")
    return alpha / (4.0 - alpha)


def alpha_of_beta(beta: float) -> float:
    if not 0 < beta <= 1:
        raise InvalidParameterError(f"beta must lie in (0, 1], got {beta}")
    return 4.0 * beta / (1.0 + beta)


def default_regime(n: int, p: int, alpha: float, kappa: float = 0.0) -> RegimeParams:
    """Pick the normalization branch for a tail exponent alpha.

    alpha > 4/3 falls back to the mid branch: the moment condition at a
    larger alpha implies it at 4/3.
    """
    if not alpha > 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    regime = AlphaRegime.LOW if alpha <= 1 else AlphaRegime.MID
    return RegimeParams(n=n, p=p, alpha_regime=regime, kappa=kappa)


def skewness_correction(regime: RegimeParams) -> float:
    """c_{n,p} = (8 kappa^2 / 3) n^(-1/2) (log p)^(3/2); zero in the low regime"""
    if regime.alpha_regime is AlphaRegime.LOW:
        return 0.0
    return (8.0 * regime.kappa ** 2 / 3.0) * regime.n ** -0.5 * regime.log_p ** 1.5


def centering(regime: RegimeParams) -> float:
    """4 log p - log log p + c_{n,p}: the amount subtracted from n L^2"""
    return 4.0 * regime.log_p - math.log(regime.log_p) + skewness_correction(regime)


def normalize_W(L: float, regime: RegimeParams,
                source_kind: StatisticKind = StatisticKind.L_N) -> NormalizedStat:
    """W = n L^2 - 4 log p + log log p (- c_{n,p} in the mid regime)"""
    if not L >= 0:
        raise InvalidParameterError(f"Statistic must be nonnegative, got {L}")
    w = regime.n * L * L - centering(regime)
    return NormalizedStat(w=float(w), source_kind=StatisticKind(source_kind), regime=regime)


def gumbel_cdf(y):
    """F_Y(y) = exp(-(8 pi)^(-1/2) exp(-y/2))"""
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(over='ignore'):
        value = np.exp(-np.exp(-0.5 * y - LOG_SQRT_8PI))
    return value.item() if value.ndim == 0 else value


def shifted_gumbel_cdf(y, gamma: float):
    """Gaussian limit when log p / sqrt(n) -> gamma: F_Y shifted left by 8 gamma^2"""
    if not gamma >= 0:
        raise InvalidParameterError(f"gamma must be nonnegative, got {gamma}")
    return gumbel_cdf(np.asarray(y, dtype=np.float64) + 8.0 * gamma ** 2)


def gumbel_quantile(q):
    """Inverse of gumbel_cdf: y = -2 log(-sqrt(8 pi) log q)"""
    q = np.asarray(q, dtype=np.float64)
    if np.any((q <= 0) | (q >= 1)):
        raise InvalidParameterError("Gumbel quantile needs 0 < q < 1")
    value = -2.0 * (LOG_SQRT_8PI + np.log(-np.log(q)))
    return value.item() if value.ndim == 0 else value


def chisq1_sf(y):
    """P(chi2_1 >= y) = erfc(sqrt(y / 2))"""
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < 0):
        raise InvalidParameterError("chi-square argument must be nonnegative")
    value = erfc(np.sqrt(0.5 * y))
    return value.item() if value.ndim == 0 else value


def chisq1_log_sf(y):
    """log P(chi2_1 >= y) = log 2 + log Phi(-sqrt(y)), finite far into the tail"""
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < 0):
        raise InvalidParameterError("chi-square argument must be nonnegative")
    value = np.minimum(math.log(2.0) + log_ndtr(-np.sqrt(y)), 0.0)
    return value.item() if value.ndim == 0 else value


def chisq1_sf_inv(prob: float) -> float:
    """y with P(chi2_1 >= y) = prob, by a bracketed root search in log space"""
    if not 0 < prob < 1:
        raise InvalidParameterError(f"Tail probability must lie in (0, 1), got {prob}")
    target = math.log(prob)

    def gap(y):
        return chisq1_log_sf(y) - target

    upper = 1.0
    while gap(upper) > 0:
        upper *= 2.0
    return float(brentq(gap, 0.0, upper, xtol=1e-300, rtol=1e-14, maxiter=SF_INV_MAX_ITER))


def pair_count(p: int, mode: PairCountMode = PairCountMode.EXACT) -> float:
    mode = PairCountMode(mode)
    if mode is PairCountMode.EXACT:
        return p * (p - 1) / 2.0
    return p * p / 2.0


def intermediate_cdf(y, regime: RegimeParams, pair_count_mode: PairCountMode = PairCountMode.EXACT,
                     shift: bool = True):
    """exp{-N P(chi2_1 >= 4 log p - log log p + y_adj)}.

    y_adj = y + c_{n,p} when shift is set, so the approximation targets the
    same W as normalize_W in the mid regime.
    """
    y = np.asarray(y, dtype=np.float64)
    offset = skewness_correction(regime) if shift else 0.0
    argument = 4.0 * regime.log_p - math.log(regime.log_p) + y + offset
    if np.any(argument <= 0):
        raise InvalidParameterError("Intermediate approximation argument must be positive; y is too small for this p")
    log_n = math.log(pair_count(regime.p, pair_count_mode))
    with np.errstate(over='ignore'):
        value = np.exp(-np.exp(log_n + chisq1_log_sf(argument)))
    return value.item() if value.ndim == 0 else value


def epsilon_delta(delta: float) -> float:
    """(2 delta - delta^2) / (4 - 2 delta + delta^2)"""
    if not 0 < delta <= 1:
        raise InvalidParameterError(f"delta must lie in (0, 1], got {delta}")
    return (2.0 * delta - delta ** 2) / (4.0 - 2.0 * delta + delta ** 2)


def band_width_bound(p: int, delta: float) -> float:
    """p^eps_delta, the scale the band width m must be small against"""
    return float(p) ** epsilon_delta(delta)


def gamma_set(R, delta: float) -> GammaSet:
    """Gamma_{p,delta} = {i : |r_ij| > 1 - delta for some j != i}"""
    if not 0 < delta < 1:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    R = np.asarray(R, dtype=np.float64)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] < 2:
        raise InvalidParameterError(f"Correlation matrix must be square with p >= 2, got shape {R.shape}")
    if not np.all(np.isfinite(R)) or np.any(np.abs(R) > 1.0 + 1e-12):
        raise InvalidParameterError("Correlation entries must be finite and within [-1, 1]")
    if not np.allclose(R, R.T, atol=1e-12) or not np.allclose(np.diag(R), 1.0, atol=1e-12):
        raise InvalidParameterError("Correlation matrix must be symmetric with unit diagonal")
    off = np.abs(R).copy()
    np.fill_diagonal(off, 0.0)
    members = np.flatnonzero((off > 1.0 - delta).any(axis=1))
    return GammaSet(indices=[int(i) + 1 for i in members], fraction=members.size / R.shape[0])


def dense_regime_limit(gamma: float) -> float:
    """Limit of L_n for Gaussian entries when log p / n -> gamma"""
    if not gamma > 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    return math.sqrt(-math.expm1(-4.0 * gamma))


def distribution_table(grid: Sequence[float], regime: RegimeParams,
                       pair_count_mode: PairCountMode = PairCountMode.EXACT) -> pd.DataFrame:
    """Plot-ready rows (y, F_Y, intermediate)"""
    y = np.asarray(list(grid), dtype=np.float64)
    if y.size == 0:
        raise InvalidParameterError("Grid is empty")
    if not np.all(np.isfinite(y)):
        raise InvalidParameterError("Grid values must be finite")
    return pd.DataFrame({
        'y': y,
        'F_Y': np.atleast_1d(gumbel_cdf(y)),
        'intermediate': np.atleast_1d(intermediate_cdf(y, regime, pair_count_mode)),
    })


def write_distribution_table(table: pd.DataFrame, path: str):
    """CSV, or an Excel workbook when the path ends in .xlsx"""
    if os.path.splitext(path)[1].lower() == '.xlsx':
        table.to_excel(path, sheet_name='Distributions', index=False, engine='openpyxl')
    else:
        table.to_csv(path, index=False, float_format='%.17g')
    logger.info(f"Distribution table ({len(table)} rows) written to {path}")
