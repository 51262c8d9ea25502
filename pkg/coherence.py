#!/usr/bin/env python3
"""
Coherence Module
Pearson correlations and the coherence statistics L_n, L_tilde, L_0 and L_nm
of a data matrix, computed by a tiled standardize-then-Gram kernel with a
masked max reduction.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from errors import DegenerateColumnError, InvalidParameterError
from matgen import DataMatrix
from settings import corr_dump_cap, default_workers, tile_width

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-12


class StatisticKind(str, Enum):
    L_N = 'L_n'
    L_TILDE = 'L_tilde'
    L_0 = 'L_0'
    L_NM = 'L_nm'


@dataclass(frozen=True)
class CoherenceResult:
    """A coherence statistic with its achieving pair (1-based, i < j)"""
    kind: StatisticKind
    value: float
    pair: Tuple[int, int]
    mask_gap: int = 1

    def to_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'value': self.value,
            'pair': list(self.pair),
            'm': self.mask_gap,
        }


def _degenerate_check(values: np.ndarray):
    spread = np.ptp(values, axis=0)
    bad = np.flatnonzero(spread == 0)
    if bad.size:
        raise DegenerateColumnError(int(bad[0]) + 1)


def standardized_columns(X: DataMatrix, kind: StatisticKind = StatisticKind.L_N,
                         mu: float = None, sigma: float = None) -> np.ndarray:
    """Columns scaled so that the Gram matrix holds the chosen statistic.

    L_n / L_nm: centered at the sample mean, unit centered norm.
    L_tilde: centered at mu, unit norm.
    L_0: centered at mu, divided by sigma * sqrt(n).
    """
    values = X.values
    if kind in (StatisticKind.L_N, StatisticKind.L_NM):
        _degenerate_check(values)
        centered = values - values.mean(axis=0)
        norms = np.linalg.norm(centered, axis=0)
        bad = np.flatnonzero(norms == 0)
        if bad.size:
            raise DegenerateColumnError(int(bad[0]) + 1)
        return centered / norms

    if mu is None or not np.isfinite(mu):
        raise InvalidParameterError(f"{kind.value} needs a finite population mean mu")
    centered = values - mu
    if kind is StatisticKind.L_TILDE:
        norms = np.linalg.norm(centered, axis=0)
        bad = np.flatnonzero(norms == 0)
        if bad.size:
            raise DegenerateColumnError(int(bad[0]) + 1, reason='is identically equal to mu')
        return centered / norms

    if sigma is None or not (np.isfinite(sigma) and sigma > 0):
        raise InvalidParameterError(f"L_0 needs a positive population scale sigma, got {sigma}")
    return centered / (sigma * np.sqrt(X.n))


def _tile_bounds(p: int, width: int) -> List[Tuple[int, int]]:
    return [(start, min(start + width, p)) for start in range(0, p, width)]


def _tile_max(U: np.ndarray, rows: Tuple[int, int], cols: Tuple[int, int], gap: int,
              unit_bounded: bool = True):
    """Largest admissible |G_ij| in one tile, first (i, j) on ties"""
    block = np.abs(U[:, rows[0]:rows[1]].T @ U[:, cols[0]:cols[1]])
    if unit_bounded:
        # correlations within rounding of 1 are exact ties at 1
        block = np.where(block >= 1.0 - UNIT_TOLERANCE, 1.0, block)
    row_idx = np.arange(rows[0], rows[1])[:, None]
    col_idx = np.arange(cols[0], cols[1])[None, :]
    admissible = (col_idx - row_idx) >= gap
    if not admissible.any():
        return None
    block = np.where(admissible, block, -1.0)
    i, j = divmod(int(np.argmax(block)), block.shape[1])
    return float(block[i, j]), rows[0] + i, cols[0] + j


def masked_max(U: np.ndarray, gap: int = 1, width: int = None, workers: int = None,
               unit_bounded: bool = True):
    """max over pairs with j - i >= gap of |<U_i, U_j>|; returns (value, i, j) 0-based.

    unit_bounded: the Gram entries are correlations, so values within
    UNIT_TOLERANCE of 1 are snapped to 1 before the argmax.
    """
    p = U.shape[1]
    width = width or tile_width()
    workers = workers or default_workers()
    bounds = _tile_bounds(p, width)
    tiles = [(rows, cols)
             for r, rows in enumerate(bounds)
             for cols in bounds[r:]
             if (cols[1] - 1) - rows[0] >= gap]
    if not tiles:
        raise InvalidParameterError(f"No pair at distance >= {gap} among {p} columns")

    logger.debug(f"Reducing {len(tiles)} tiles of width {width} (gap {gap}, workers {workers})")
    if workers > 1 and len(tiles) > 1:
        candidates = Parallel(n_jobs=workers, prefer='threads')(
            delayed(_tile_max)(U, rows, cols, gap, unit_bounded) for rows, cols in tiles
        )
    else:
        candidates = [_tile_max(U, rows, cols, gap, unit_bounded) for rows, cols in tiles]

    best = None
    for candidate in candidates:
        if candidate is None:
            continue
        if (best is None or candidate[0] > best[0]
                or (candidate[0] == best[0] and candidate[1:] < best[1:])):
            best = candidate
    return best


def _result(kind: StatisticKind, best, gap: int) -> CoherenceResult:
    value, i, j = best
    if kind is not StatisticKind.L_0:
        value = min(value, 1.0)
    return CoherenceResult(kind=kind, value=value, pair=(i + 1, j + 1), mask_gap=gap)


def pearson_corr(X: DataMatrix, i: int, j: int) -> float:
    """Sample correlation of columns i and j (1-based)"""
    xi, xj = X.column(i), X.column(j)
    for index, col in ((i, xi), (j, xj)):
        if np.ptp(col) == 0:
            raise DegenerateColumnError(index)
    if i == j:
        return 1.0
    di = xi - xi.mean()
    dj = xj - xj.mean()
    rho = np.dot(di, dj) / np.sqrt(np.dot(di, di) * np.dot(dj, dj))
    return float(np.clip(rho, -1.0, 1.0))


def coherence(X: DataMatrix, width: int = None, workers: int = None) -> CoherenceResult:
    """L_n = max over i < j of |rho_ij|"""
    U = standardized_columns(X, StatisticKind.L_N)
    result = _result(StatisticKind.L_N, masked_max(U, 1, width, workers), 1)
    logger.debug(f"L_n = {result.value:.6f} at {result.pair} ({X.n} x {X.p})")
    return result


def coherence_known_moments(X: DataMatrix, mu: float, sigma: float = None,
                            kind: StatisticKind = StatisticKind.L_TILDE,
                            width: int = None, workers: int = None) -> CoherenceResult:
    """L_tilde (centered at mu) or L_0 (centered at mu, scaled by n * sigma^2)"""
    kind = StatisticKind(kind)
    if kind not in (StatisticKind.L_TILDE, StatisticKind.L_0):
        raise InvalidParameterError(f"Known-moment statistic must be L_tilde or L_0, got {kind.value}")
    if sigma is not None and not (np.isfinite(sigma) and sigma > 0):
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    U = standardized_columns(X, kind, mu=mu, sigma=sigma)
    best = masked_max(U, 1, width, workers, unit_bounded=kind is not StatisticKind.L_0)
    return _result(kind, best, 1)


def m_coherence(X: DataMatrix, m: int, width: int = None, workers: int = None) -> CoherenceResult:
    """L_nm = max over j - i >= m of |rho_ij|"""
    if int(m) != m or not 1 <= m <= X.p - 1:
        raise InvalidParameterError(f"m must be an integer in 1..{X.p - 1}, got {m}")
    m = int(m)
    U = standardized_columns(X, StatisticKind.L_NM)
    return _result(StatisticKind.L_NM, masked_max(U, m, width, workers), m)


def check_statistic_options(kind: StatisticKind, m: Optional[int] = None, mu: float = None,
                            sigma: float = None):
    """Reject options the chosen statistic does not use"""
    kind = StatisticKind(kind)
    if m is not None and kind is not StatisticKind.L_NM:
        raise InvalidParameterError(f"m only applies to L_nm, not {kind.value}")
    if mu is not None and kind in (StatisticKind.L_N, StatisticKind.L_NM):
        raise InvalidParameterError(f"mu only applies to L_tilde and L_0, not {kind.value}")
    if sigma is not None and kind is not StatisticKind.L_0:
        raise InvalidParameterError(f"sigma only applies to L_0, not {kind.value}")


def statistic(X: DataMatrix, kind: StatisticKind = StatisticKind.L_N, m: Optional[int] = None,
              mu: float = None, sigma: float = None, width: int = None,
              workers: int = None) -> CoherenceResult:
    """Dispatch on statistic kind"""
    kind = StatisticKind(kind)
    if kind is StatisticKind.L_N:
        return coherence(X, width, workers)
    if kind is StatisticKind.L_NM:
        if m is None:
            raise InvalidParameterError("L_nm needs the band gap m")
        return m_coherence(X, m, width, workers)
    return coherence_known_moments(X, mu, sigma, kind, width, workers)


def correlation_matrix(X: DataMatrix) -> np.ndarray:
    """Full p x p sample correlation matrix"""
    U = standardized_columns(X, StatisticKind.L_N)
    R = np.clip(U.T @ U, -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    return R


def dump_correlation_csv(X: DataMatrix, path: str, cap: int = None):
    cap = cap or corr_dump_cap()
    if X.p > cap:
        raise InvalidParameterError(f"Refusing to write a {X.p} x {X.p} correlation matrix (cap {cap})")
    pd.DataFrame(correlation_matrix(X)).to_csv(path, header=False, index=False, float_format='%.17g')
    logger.info(f"Correlation matrix written to {path}")
