#!/usr/bin/env python3
"""
Tests for regime maps, normalization and the reference distributions
"""

import math

import numpy as np
import pandas as pd
import pytest
from scipy import integrate
from scipy.stats import chi2, norm

from coherence import StatisticKind
from errors import InvalidParameterError
from limits import (AlphaRegime, PairCountMode, RegimeParams, alpha_of_beta, band_width_bound, beta_of_alpha,
                    centering, chisq1_log_sf, chisq1_sf, chisq1_sf_inv, default_regime, dense_regime_limit,
                    distribution_table, epsilon_delta, gamma_set, gumbel_cdf, gumbel_quantile,
                    intermediate_cdf, normalize_W, pair_count, shifted_gumbel_cdf, skewness_correction,
                    write_distribution_table)
from matgen import ma_population_correlation


def test_beta_of_alpha_values():
    assert beta_of_alpha(2.0) == 1.0
    assert beta_of_alpha(4.0 / 3.0) == pytest.approx(0.5, abs=1e-15)
    assert beta_of_alpha(1.0) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert alpha_of_beta(1.0) == 2.0
    assert alpha_of_beta(0.5) == pytest.approx(4.0 / 3.0, abs=1e-15)


@pytest.mark.parametrize('alpha', [0.1, 0.7, 1.9])
def test_alpha_beta_round_trip(alpha):
    assert alpha_of_beta(beta_of_alpha(alpha)) == pytest.approx(alpha, abs=1e-14)


@pytest.mark.parametrize('bad', [0.0, -1.0, 2.5])
def test_beta_of_alpha_range(bad):
    with pytest.raises(InvalidParameterError):
        beta_of_alpha(bad)


def test_beta_maps_are_monotone():
    alphas = np.linspace(0.05, 2.0, 50)
    betas = [beta_of_alpha(a) for a in alphas]
    assert all(b1 < b2 for b1, b2 in zip(betas, betas[1:]))


def test_regime_params_validation():
    with pytest.raises(InvalidParameterError):
        RegimeParams(n=100, p=7)
    with pytest.raises(InvalidParameterError):
        RegimeParams(n=1, p=50)
    with pytest.raises(ValueError):
        RegimeParams(n=100, p=50, alpha_regime='high')
    assert RegimeParams(n=100, p=50, alpha_regime='mid').alpha_regime is AlphaRegime.MID


def test_default_regime_branches():
    assert default_regime(100, 50, 1.0).alpha_regime is AlphaRegime.LOW
    assert default_regime(100, 50, 4 / 3, kappa=2.0).alpha_regime is AlphaRegime.MID
    assert default_regime(100, 50, 2.0).alpha_regime is AlphaRegime.MID


def test_normalize_low_regime():
    regime = RegimeParams(n=100, p=50)
    expected = 9.0 - 4.0 * math.log(50) + math.log(math.log(50))
    stat = normalize_W(0.3, regime)
    assert stat.w == pytest.approx(expected, abs=1e-12)
    assert stat.w == pytest.approx(-5.284, abs=1e-3)
    assert stat.source_kind is StatisticKind.L_N


def test_normalize_zero_statistic():
    regime = RegimeParams(n=100, p=50)
    assert normalize_W(0.0, regime).w == pytest.approx(-4.0 * math.log(50) + math.log(math.log(50)))
    with pytest.raises(InvalidParameterError):
        normalize_W(-0.1, regime)


def test_mid_regime_skewness_correction():
    p = math.exp(10.0)
    # p must be an integer; the correction uses log p of the rounded value
    regime = RegimeParams(n=10_000, p=round(p), alpha_regime='mid', kappa=2.0)
    expected = (32.0 / 3.0) * 1e-2 * math.log(round(p)) ** 1.5
    assert skewness_correction(regime) == pytest.approx(expected, rel=1e-12)
    assert skewness_correction(regime) == pytest.approx(3.373096, abs=1e-5)
    low = RegimeParams(n=10_000, p=round(p), alpha_regime='low', kappa=2.0)
    assert normalize_W(0.1, low).w - normalize_W(0.1, regime).w == pytest.approx(expected, rel=1e-12)


def test_normalize_is_increasing():
    regime = RegimeParams(n=200, p=100)
    ws = [normalize_W(L, regime).w for L in np.linspace(0.0, 1.0, 30)]
    assert all(a < b for a, b in zip(ws, ws[1:]))


def test_gumbel_cdf_values():
    assert gumbel_cdf(0.0) == pytest.approx(math.exp(-1.0 / math.sqrt(8 * math.pi)), abs=1e-15)
    assert gumbel_cdf(0.0) == pytest.approx(0.819040, abs=1e-6)
    assert gumbel_cdf(-1e4) == 0.0
    assert gumbel_cdf(1e4) == 1.0


def test_gumbel_cdf_monotone():
    values = gumbel_cdf(np.linspace(-20.0, 60.0, 2001))
    assert np.all(np.diff(values) >= 0)


def test_gumbel_quantile():
    assert gumbel_quantile(gumbel_cdf(0.0)) == pytest.approx(0.0, abs=1e-12)
    assert gumbel_quantile(1 - 1e-12) > 50
    with pytest.raises(InvalidParameterError):
        gumbel_quantile(0.0)
    with pytest.raises(InvalidParameterError):
        gumbel_quantile(1.0)


def test_gumbel_round_trip():
    q = np.concatenate([[1e-10, 1e-6], np.linspace(0.01, 0.99, 99), [1 - 1e-6, 1 - 1e-10]])
    back = gumbel_cdf(gumbel_quantile(q))
    assert np.allclose(back, q, rtol=1e-9, atol=0)


def test_shifted_gumbel():
    assert shifted_gumbel_cdf(1.0, 0.0) == gumbel_cdf(1.0)
    assert shifted_gumbel_cdf(0.0, 0.5) == pytest.approx(gumbel_cdf(2.0))
    with pytest.raises(InvalidParameterError):
        shifted_gumbel_cdf(0.0, -1.0)


def test_chisq1_sf_values():
    assert chisq1_sf(0.0) == 1.0
    assert chisq1_sf(1.0) == pytest.approx(0.3173105, abs=1e-6)
    assert chisq1_sf(3.8414588) == pytest.approx(0.05, abs=1e-6)
    with pytest.raises(InvalidParameterError):
        chisq1_sf(-1.0)


def test_chisq1_sf_against_normal_cdf():
    y = np.linspace(0.0, 40.0, 401)
    assert np.max(np.abs(chisq1_sf(y) - 2.0 * norm.sf(np.sqrt(y)))) <= 1e-12


def test_chisq1_sf_against_integrated_density():
    for y in [0.5, 1.0, 4.0, 10.0, 25.0, 40.0]:
        tail, _ = integrate.quad(chi2(1).pdf, y, np.inf, epsabs=1e-14, epsrel=1e-12)
        assert abs(chisq1_sf(y) - tail) <= 1e-10


def test_chisq1_log_sf_far_tail():
    y = np.logspace(-3, 6, 400)
    log_sf = chisq1_log_sf(y)
    assert np.all(np.isfinite(log_sf))
    assert np.all(np.diff(log_sf) < 0)
    assert chisq1_log_sf(0.0) == 0.0
    assert chisq1_log_sf(10.0) == pytest.approx(math.log(chisq1_sf(10.0)), rel=1e-12)


def test_chisq1_sf_inv_values():
    assert chisq1_sf_inv(0.05) == pytest.approx(3.8414588, abs=1e-6)
    assert chisq1_sf_inv(0.999) < 2e-6
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(InvalidParameterError):
            chisq1_sf_inv(bad)


def test_chisq1_round_trip():
    for prob in [1e-10, 1e-6, 1e-3, 0.05, 0.3, 0.5, 0.9, 1 - 1e-6]:
        assert chisq1_sf(chisq1_sf_inv(prob)) == pytest.approx(prob, rel=1e-9)


def test_chisq1_sf_inv_deep_tail():
    y = chisq1_sf_inv(1e-300)
    assert math.exp(chisq1_log_sf(y)) == pytest.approx(1e-300, rel=1e-9)


def test_pair_counts():
    assert pair_count(100) == 4950
    assert pair_count(100, PairCountMode.SQUARED) == 5000
    assert pair_count(10, 'exact') == 45


def test_intermediate_cdf_at_zero():
    regime = RegimeParams(n=400, p=100)
    expected = math.exp(-4950 * chisq1_sf(4 * math.log(100) - math.log(math.log(100))))
    assert intermediate_cdf(0.0, regime) == pytest.approx(expected, rel=1e-12)
    squared = math.exp(-5000 * chisq1_sf(4 * math.log(100) - math.log(math.log(100))))
    assert intermediate_cdf(0.0, regime, PairCountMode.SQUARED) == pytest.approx(squared, rel=1e-12)


@pytest.mark.parametrize('y', [-2.0, 0.0, 2.0, 5.0])
def test_pair_count_modes_agree_at_large_p(y):
    regime = RegimeParams(n=20_000, p=10 ** 4)
    exact = -math.log(intermediate_cdf(y, regime, PairCountMode.EXACT))
    squared = -math.log(intermediate_cdf(y, regime, PairCountMode.SQUARED))
    assert abs(squared - exact) / exact <= 2e-4


def test_intermediate_cdf_rejects_nonpositive_argument():
    regime = RegimeParams(n=400, p=8)
    with pytest.raises(InvalidParameterError):
        intermediate_cdf(-50.0, regime)


def test_intermediate_cdf_shift_in_mid_regime():
    regime = RegimeParams(n=400, p=200, alpha_regime='mid', kappa=1.5)
    c = skewness_correction(regime)
    assert intermediate_cdf(0.0, regime) == pytest.approx(intermediate_cdf(c, regime, shift=False), rel=1e-12)


@pytest.mark.parametrize('y', [-2.0, 0.0, 2.0])
def test_intermediate_approaches_gumbel(y):
    regime = RegimeParams(n=10_000, p=10 ** 6)
    assert abs(intermediate_cdf(y, regime) - gumbel_cdf(y)) <= 0.01


def test_centering_matches_normalization():
    regime = RegimeParams(n=300, p=64)
    assert normalize_W(0.2, regime).w == pytest.approx(300 * 0.04 - centering(regime))


def test_epsilon_delta():
    assert epsilon_delta(1.0) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert epsilon_delta(0.5) == pytest.approx(0.2307692, abs=1e-7)
    assert epsilon_delta(1e-9) < 1e-8
    values = [epsilon_delta(d) for d in np.linspace(0.01, 1.0, 40)]
    assert all(a < b for a, b in zip(values, values[1:]))
    with pytest.raises(InvalidParameterError):
        epsilon_delta(0.0)


def test_band_width_bound():
    assert band_width_bound(1000, 1.0) == pytest.approx(10.0)


def test_gamma_set_identity():
    result = gamma_set(np.eye(5), 0.1)
    assert result.indices == []
    assert result.fraction == 0.0


def test_gamma_set_single_strong_pair():
    R = np.eye(4)
    R[0, 1] = R[1, 0] = 0.95
    result = gamma_set(R, 0.1)
    assert result.indices == [1, 2]
    assert result.fraction == 0.5


def test_gamma_set_ma_population():
    result = gamma_set(ma_population_correlation(10, 3), 0.5)
    assert result.indices == list(range(1, 11))
    assert result.fraction == 1.0


def test_gamma_set_malformed():
    with pytest.raises(InvalidParameterError):
        gamma_set(np.ones((3, 2)), 0.1)
    asymmetric = np.eye(3)
    asymmetric[0, 1] = 0.4
    with pytest.raises(InvalidParameterError):
        gamma_set(asymmetric, 0.1)
    with pytest.raises(InvalidParameterError):
        gamma_set(np.eye(3), 1.0)


def test_dense_regime_limit():
    assert dense_regime_limit(0.1) == pytest.approx(math.sqrt(1 - math.exp(-0.4)), abs=1e-15)
    assert dense_regime_limit(0.1) == pytest.approx(0.5742, abs=1e-4)
    assert dense_regime_limit(1e-12) < 1e-5
    assert dense_regime_limit(50.0) == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        dense_regime_limit(0.0)


def test_distribution_table():
    regime = RegimeParams(n=400, p=100)
    table = distribution_table([-2.0, 0.0, 2.0, 4.0], regime)
    assert list(table.columns) == ['y', 'F_Y', 'intermediate']
    assert table.loc[1, 'F_Y'] == pytest.approx(0.819040, abs=1e-6)
    assert table['F_Y'].is_monotonic_increasing
    assert table['intermediate'].is_monotonic_increasing
    with pytest.raises(InvalidParameterError):
        distribution_table([], regime)


def test_write_distribution_table(tmp_path):
    table = distribution_table([0.0, 1.0], RegimeParams(n=400, p=100))
    csv_path = tmp_path / 'table.csv'
    write_distribution_table(table, str(csv_path))
    loaded = pd.read_csv(csv_path, float_precision='round_trip')
    assert np.array_equal(loaded['F_Y'].to_numpy(), table['F_Y'].to_numpy())

    xlsx_path = tmp_path / 'table.xlsx'
    write_distribution_table(table, str(xlsx_path))
    sheet = pd.read_excel(xlsx_path, sheet_name='Distributions', engine='openpyxl')
    assert list(sheet.columns) == ['y', 'F_Y', 'intermediate']
    assert len(sheet) == 2
