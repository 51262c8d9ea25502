#!/usr/bin/env python3
"""
Monte Carlo Module
Reproducible parallel replication of the coherence statistics and
measurement of their agreement with the limit laws.

Replication r draws its matrix from a child seed derived from
(master_seed, r), so samples never depend on the worker count.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from coherence import CoherenceResult, StatisticKind, statistic
from errors import CoherenceError, InvalidParameterError, ReplicationError
from hypothesis_tests import Method, calibrate
from limits import (AlphaRegime, PairCountMode, RegimeParams, centering, default_regime,
                    gumbel_cdf, intermediate_cdf, skewness_correction)
from matgen import (DistributionSpec, MAX_SEED, sample_m_dependent, sample_matrix,
                    standardized_moments, tail_exponent)
from settings import default_workers

logger = logging.getLogger(__name__)

DEFAULT_LLN_EPSILONS = (0.1, 0.2, 0.5)


class ReportedStatistic(str, Enum):
    RAW = 'L'              # the coherence statistic itself
    NORMALIZED = 'W'       # n L^2 - 4 log p + log log p (- c_{n,p})
    SCALED = 'scaled'      # sqrt(n / log p) L


def regime_from_spec(spec: DistributionSpec, n: int, p: int) -> RegimeParams:
    """Regime implied by the entry distribution's tail exponent and skewness"""
    try:
        kappa = standardized_moments(spec)[2]
    except InvalidParameterError:
        kappa = 0.0
    alpha = tail_exponent(spec)
    if alpha <= 0:
        return RegimeParams(n=n, p=p, alpha_regime=AlphaRegime.LOW, kappa=kappa)
    return default_regime(n, p, alpha, kappa)


@dataclass(frozen=True)
class SimulationPlan:
    """One Monte Carlo experiment.

    ``m`` switches the design to MA(m) rows; ``test_gap`` is the mask of
    L_nm and defaults to m. Without a regime, one is derived from spec.
    """
    spec: DistributionSpec
    n: int
    p: int
    replications: int
    master_seed: int
    kind: Optional[StatisticKind] = None
    m: Optional[int] = None
    test_gap: Optional[int] = None
    regime: Optional[RegimeParams] = None
    reported: ReportedStatistic = ReportedStatistic.NORMALIZED
    lln_epsilons: Tuple[float, ...] = DEFAULT_LLN_EPSILONS

    def __post_init__(self):
        if int(self.replications) != self.replications or self.replications < 1:
            raise InvalidParameterError(f"Replications must be a positive integer, got {self.replications}")
        if int(self.master_seed) != self.master_seed or not 0 <= self.master_seed < MAX_SEED:
            raise InvalidParameterError(f"Master seed must be an integer in [0, 2^64), got {self.master_seed}")
        if self.m is not None and (int(self.m) != self.m or not 1 <= self.m <= self.p - 1):
            raise InvalidParameterError(f"m must be an integer in 1..{self.p - 1}, got {self.m}")
        if self.test_gap is not None and (int(self.test_gap) != self.test_gap
                                          or not 1 <= self.test_gap <= self.p - 1):
            raise InvalidParameterError(f"Test gap must be an integer in 1..{self.p - 1}, got {self.test_gap}")
        if any(not eps > 0 for eps in self.lln_epsilons):
            raise InvalidParameterError("LLN band half-widths must be positive")

        kind = self.kind
        if kind is None:
            kind = StatisticKind.L_NM if (self.m is not None or self.test_gap is not None) else StatisticKind.L_N
        kind = StatisticKind(kind)
        if kind is StatisticKind.L_NM and self.m is None and self.test_gap is None:
            raise InvalidParameterError("L_nm needs a band gap (m or test_gap)")
        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'reported', ReportedStatistic(self.reported))

        regime = self.regime or regime_from_spec(self.spec, self.n, self.p)
        if (regime.n, regime.p) != (self.n, self.p):
            raise InvalidParameterError(
                f"Regime dimensions {regime.n} x {regime.p} do not match plan {self.n} x {self.p}")
        object.__setattr__(self, 'regime', regime)

    @property
    def gap(self) -> int:
        if self.kind is not StatisticKind.L_NM:
            return 1
        return int(self.test_gap if self.test_gap is not None else self.m)

    @property
    def pair_count_mode(self) -> PairCountMode:
        return PairCountMode.SQUARED if self.kind is StatisticKind.L_NM else PairCountMode.EXACT

    def to_dict(self) -> dict:
        return {
            'spec': self.spec.to_dict(),
            'n': self.n,
            'p': self.p,
            'm': self.m,
            'test_gap': self.test_gap,
            'statistic_kind': self.kind.value,
            'reported': self.reported.value,
            'regime': self.regime.to_dict(),
            'replications': self.replications,
            'master_seed': self.master_seed,
        }


@dataclass
class EmpiricalSummary:
    plan: SimulationPlan
    samples: np.ndarray
    sorted_samples: np.ndarray
    statistics: np.ndarray
    ks_vs_gumbel: float
    ks_vs_intermediate: float
    lln_fraction: Dict[float, float] = field(default_factory=dict)
    mean: float = 0.0
    median: float = 0.0

    def to_dict(self, include_samples: bool = True) -> dict:
        summary = {
            'plan': self.plan.to_dict(),
            'replications': int(self.samples.size),
            'ks_vs_gumbel': self.ks_vs_gumbel,
            'ks_vs_intermediate': self.ks_vs_intermediate,
            'lln_fraction': {f"{eps:g}": frac for eps, frac in self.lln_fraction.items()},
            'mean': self.mean,
            'median': self.median,
        }
        if include_samples:
            summary['samples'] = self.samples.tolist()
        return summary

    def to_json(self, indent: int = 2, include_samples: bool = True) -> str:
        return json.dumps(self.to_dict(include_samples), indent=indent)


def child_seed(master_seed: int, replication: int) -> int:
    """64-bit seed for one replication, hashed from (master_seed, replication)"""
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=(int(replication),))
    return int(sequence.generate_state(1, np.uint64)[0])


def _replicate(plan: SimulationPlan, replication: int) -> float:
    seed = child_seed(plan.master_seed, replication)
    try:
        if plan.m is not None:
            X = sample_m_dependent(plan.spec, plan.n, plan.p, plan.m, seed, workers=1)
        else:
            X = sample_matrix(plan.spec, plan.n, plan.p, seed, workers=1)
        result = statistic(X, plan.kind, m=plan.gap, mu=plan.spec.location,
                           sigma=plan.spec.scale, workers=1)
    except CoherenceError as e:
        raise ReplicationError(replication, str(e))
    return result.value


def simulate_statistics(plan: SimulationPlan, workers: int = None) -> np.ndarray:
    """Raw statistic per replication, in replication order"""
    workers = workers or default_workers()
    if workers > 1 and plan.replications > 1:
        values = Parallel(n_jobs=workers, prefer='threads')(
            delayed(_replicate)(plan, r) for r in range(plan.replications)
        )
    else:
        values = [_replicate(plan, r) for r in range(plan.replications)]
    return np.asarray(values, dtype=np.float64)


def ks_distance(samples, cdf: Callable) -> float:
    """sup distance between the ECDF of sorted samples and a reference cdf"""
    s = np.asarray(samples, dtype=np.float64)
    if s.size == 0:
        raise InvalidParameterError("KS distance needs at least one sample")
    if np.any(np.diff(s) < 0):
        raise InvalidParameterError("Samples must be sorted ascending")
    F = np.asarray(cdf(s), dtype=np.float64)
    R = s.size
    upper = np.arange(1, R + 1) / R
    lower = np.arange(0, R) / R
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(lower - F))))


def lln_fraction(scaled, eps: float) -> float:
    """Fraction of scaled statistics within [2 - eps, 2 + eps]"""
    if not eps > 0:
        raise InvalidParameterError(f"Band half-width must be positive, got {eps}")
    scaled = np.asarray(scaled, dtype=np.float64)
    if scaled.size == 0:
        raise InvalidParameterError("No samples")
    return float(np.mean(np.abs(scaled - 2.0) <= eps))


def intermediate_reference(regime: RegimeParams, mode: PairCountMode) -> Callable:
    """intermediate_cdf on the W scale, extended to the boundary W = -centering"""
    boundary = -(4.0 * regime.log_p - math.log(regime.log_p)) - skewness_correction(regime)
    tiny = 1e-12 * max(1.0, abs(boundary))

    def cdf(y):
        return intermediate_cdf(np.maximum(np.asarray(y, dtype=np.float64), boundary + tiny), regime, mode)

    return cdf


def summarize(plan: SimulationPlan, values: np.ndarray) -> EmpiricalSummary:
    regime = plan.regime
    n, log_p = regime.n, regime.log_p
    w = n * values ** 2 - centering(regime)
    scaled = np.sqrt(n / log_p) * values
    reported = {
        ReportedStatistic.RAW: values,
        ReportedStatistic.NORMALIZED: w,
        ReportedStatistic.SCALED: scaled,
    }[plan.reported]

    w_sorted = np.sort(w)
    return EmpiricalSummary(
        plan=plan,
        samples=reported,
        sorted_samples=np.sort(reported),
        statistics=values,
        ks_vs_gumbel=ks_distance(w_sorted, gumbel_cdf),
        ks_vs_intermediate=ks_distance(w_sorted, intermediate_reference(regime, plan.pair_count_mode)),
        lln_fraction={eps: lln_fraction(scaled, eps) for eps in plan.lln_epsilons},
        mean=float(np.mean(reported)),
        median=float(np.median(reported)),
    )


def run_replications(plan: SimulationPlan, workers: int = None) -> EmpiricalSummary:
    values = simulate_statistics(plan, workers)
    summary = summarize(plan, values)
    logger.info(f"Simulated {plan.replications} replications of {plan.kind.value} "
                f"({plan.spec.label}, n={plan.n}, p={plan.p}): "
                f"KS vs F_Y={summary.ks_vs_gumbel:.4f}, KS vs intermediate={summary.ks_vs_intermediate:.4f}")
    return summary


def lln_check(plan: SimulationPlan, eps: float, workers: int = None) -> float:
    """Fraction of replications with sqrt(n / log p) L in [2 - eps, 2 + eps]"""
    if not eps > 0:
        raise InvalidParameterError(f"Band half-width must be positive, got {eps}")
    values = simulate_statistics(plan, workers)
    return lln_fraction(math.sqrt(plan.n / plan.regime.log_p) * values, eps)


def _rejection_rate(plan: SimulationPlan, level: float, method: Method, mode: PairCountMode,
                    workers: int) -> float:
    if plan.kind not in (StatisticKind.L_N, StatisticKind.L_NM):
        raise InvalidParameterError(f"Rejection rates are defined for L_n and L_nm, not {plan.kind.value}")
    if not 0 < level < 1:
        raise InvalidParameterError(f"Test level must lie in (0, 1), got {level}")
    mode = PairCountMode(mode) if mode is not None else plan.pair_count_mode
    values = simulate_statistics(plan, workers)
    rejections = 0
    for value in values:
        result = CoherenceResult(kind=plan.kind, value=float(value), pair=(1, 1 + plan.gap), mask_gap=plan.gap)
        if calibrate(result, level, method, plan.regime, mode).rejected:
            rejections += 1
    return rejections / values.size


def empirical_size(plan: SimulationPlan, level: float, method: Method = Method.INTERMEDIATE,
                   pair_count_mode: PairCountMode = None, workers: int = None) -> float:
    """Rejection rate of the coherence test on data generated under H0"""
    if plan.m is not None and plan.gap < plan.m:
        raise InvalidParameterError(
            f"MA({plan.m}) data violates H0 for a band test at gap {plan.gap}; use empirical_power")
    rate = _rejection_rate(plan, level, method, pair_count_mode, workers)
    logger.info(f"Empirical size at level {level:g} ({Method(method).value}): {rate:.4f}")
    return rate


def empirical_power(plan: SimulationPlan, level: float, method: Method = Method.INTERMEDIATE,
                    pair_count_mode: PairCountMode = None, workers: int = None) -> float:
    rate = _rejection_rate(plan, level, method, pair_count_mode, workers)
    logger.info(f"Empirical power at level {level:g} ({Method(method).value}): {rate:.4f}")
    return rate


def dump_samples_csv(summary: EmpiricalSummary, path: str):
    """One row per replication: index and value, 17 significant digits"""
    frame = pd.DataFrame({
        'replication': np.arange(summary.samples.size),
        'value': summary.samples,
    })
    frame.to_csv(path, index=False, float_format='%.17g')
    logger.info(f"Samples written to {path}")
