#!/usr/bin/env python3
"""
Command-line front end
Batch runs of coherence computation, hypothesis tests, Monte Carlo
simulation, MIP certificates and distribution tables.

Exit codes: 0 success / retain, 10 reject, 2 usage or input error,
3 numeric or degenerate-data error.
"""

import functools
import json
import logging
import math
import sys

import click
import numpy as np

from coherence import StatisticKind, check_statistic_options, dump_correlation_csv, statistic
from errors import EXIT_OK, EXIT_REJECT, EXIT_USAGE, CoherenceError, InvalidParameterError
from hypothesis_tests import Method, independence_test, m_dependence_test, mip_certificate
from limits import AlphaRegime, PairCountMode, RegimeParams, distribution_table, write_distribution_table
from matgen import DistributionSpec, Family, sample_m_dependent, sample_matrix
from matrix_io import read_matrix, write_matrix
from montecarlo import ReportedStatistic, SimulationPlan, dump_samples_csv, regime_from_spec, run_replications
from report_generator import ReportGenerator
from settings import setup_logging

logger = logging.getLogger(__name__)

METHOD_ALIASES = {
    'extreme': Method.EXTREME_LIMIT,
    'extreme_limit': Method.EXTREME_LIMIT,
    'intermediate': Method.INTERMEDIATE,
}
STAT_ALIASES = {
    'Ln': ReportedStatistic.RAW,
    'L': ReportedStatistic.RAW,
    'Wn': ReportedStatistic.NORMALIZED,
    'W': ReportedStatistic.NORMALIZED,
    'scaled': ReportedStatistic.SCALED,
}
KIND_CHOICES = [kind.value for kind in StatisticKind]


def handle_errors(func):
    """Map library errors onto the stable exit codes"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except CoherenceError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
        except OSError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_USAGE)
    return wrapper


def workers_option(func):
    return click.option('--workers', type=click.IntRange(min=1), envvar='COHERENCE_WORKERS',
                        default=1, show_default=True, help='Worker pool size.')(func)


def input_options(func):
    func = click.option('--format', 'fmt', type=click.Choice(['csv', 'binary']), default=None,
                        help='Input format (default: by extension, .cohm/.bin are binary).')(func)
    return click.argument('input_path', type=click.Path(dir_okay=False))(func)


def distribution_options(func):
    func = click.option('--sigma', type=float, default=1.0, show_default=True, help='Entry scale.')(func)
    func = click.option('--mu', type=float, default=0.0, show_default=True, help='Entry location.')(func)
    func = click.option('--param', type=float, default=None,
                        help='Shape parameter: a (symmetric_weibull), q (two_point_skewed), nu (student_t).')(func)
    return click.option('--dist', type=click.Choice([f.value for f in Family]), default='gaussian',
                        show_default=True, help='Entry distribution.')(func)


def regime_options(func):
    func = click.option('--kappa', type=float, default=None, help='Entry skewness (mid-regime correction).')(func)
    return click.option('--regime', type=click.Choice([r.value for r in AlphaRegime]), default=None,
                        help='Tail regime: low (alpha <= 1) or mid (1 < alpha <= 4/3).')(func)


def emit(payload: dict, output: str = None):
    text = json.dumps(payload, indent=2)
    if output:
        with open(output, 'w') as handle:
            handle.write(text + '\n')
    click.echo(text)


def build_regime(n: int, p: int, regime: str, kappa: float) -> RegimeParams:
    return RegimeParams(n=n, p=p, alpha_regime=regime or AlphaRegime.LOW, kappa=kappa or 0.0)


def parse_grid(text: str):
    """'start:stop:step' or a comma-separated list of values"""
    text = (text or '').strip()
    if not text:
        raise InvalidParameterError("Grid is empty")
    parts = text.split(':') if ':' in text else [token for token in text.split(',') if token.strip()]
    try:
        values = [float(part) for part in parts]
    except ValueError:
        raise InvalidParameterError(f"Grid values must be numbers, got {text!r}")
    if ':' not in text:
        return values
    if len(values) != 3:
        raise InvalidParameterError(f"Range grid must be start:stop:step, got {text!r}")
    start, stop, step = values
    if not step > 0 or stop < start:
        raise InvalidParameterError(f"Range grid needs step > 0 and stop >= start, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return (start + step * np.arange(count)).tolist()


@click.group()
@click.option('--log-level', default='WARNING', show_default=True, help='Logging level.')
@click.option('--log-file', default=None, help='Also log to this file.')
def main(log_level, log_file):
    """Coherence statistics of high-dimensional data matrices."""
    try:
        setup_logging(log_level, log_file)
    except CoherenceError as e:
        raise click.BadParameter(str(e), param_hint='--log-level')


@main.command('generate')
@distribution_options
@click.option('--n', type=int, required=True, help='Rows (observations).')
@click.option('--p', type=int, required=True, help='Columns (variables).')
@click.option('--m', type=int, default=None, help='MA(m) rows instead of i.i.d.')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--output', required=True, type=click.Path(dir_okay=False), help='CSV or .cohm file.')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'binary']), default=None)
@workers_option
@handle_errors
def cmd_generate(dist, param, mu, sigma, n, p, m, seed, output, fmt, workers):
    """Write a sampled data matrix."""
    spec = DistributionSpec(dist, param, mu, sigma)
    if m is None:
        matrix = sample_matrix(spec, n, p, seed, workers=workers)
    else:
        matrix = sample_m_dependent(spec, n, p, m, seed, workers=workers)
    write_matrix(matrix, output, fmt)


@main.command('coherence')
@input_options
@click.option('--kind', type=click.Choice(KIND_CHOICES), default=None, help='Statistic (default L_n, or L_nm with --m).')
@click.option('--m', type=int, default=None, help='Band gap for L_nm.')
@click.option('--mu', type=float, default=None, help='Population mean (L_tilde, L_0).')
@click.option('--sigma', type=float, default=None, help='Population scale (L_0).')
@click.option('--dump-corr', type=click.Path(dir_okay=False), default=None, help='Write the correlation matrix CSV.')
@click.option('--output', type=click.Path(dir_okay=False), default=None)
@workers_option
@handle_errors
def cmd_coherence(input_path, fmt, kind, m, mu, sigma, dump_corr, output, workers):
    """Compute a coherence statistic of INPUT_PATH."""
    X = read_matrix(input_path, fmt)
    if kind is None:
        kind = StatisticKind.L_NM if m is not None else StatisticKind.L_N
    check_statistic_options(kind, m, mu, sigma)
    result = statistic(X, kind, m=m, mu=mu, sigma=sigma, workers=workers)
    if dump_corr:
        dump_correlation_csv(X, dump_corr)
    emit({
        'statistic_kind': result.kind.value,
        'value': result.value,
        'pair': list(result.pair),
        'n': X.n,
        'p': X.p,
        'm': result.mask_gap,
    }, output)


@main.command('test')
@input_options
@click.option('--m', type=int, default=None, help='Test m-dependence at band gap m (default: independence).')
@click.option('--level', type=float, default=0.05, show_default=True)
@click.option('--method', type=click.Choice(sorted(METHOD_ALIASES)), default='intermediate', show_default=True)
@regime_options
@click.option('--pair-count', type=click.Choice([c.value for c in PairCountMode]), default=None,
              help='Pair count of the intermediate calibration for --m (default squared).')
@click.option('--output', type=click.Path(dir_okay=False), default=None)
@click.option('--pdf', type=click.Path(dir_okay=False), default=None, help='Also write a PDF report.')
@workers_option
@handle_errors
def cmd_test(input_path, fmt, m, level, method, regime, kappa, pair_count, output, pdf, workers):
    """Independence or m-dependence test on INPUT_PATH."""
    X = read_matrix(input_path, fmt)
    params = build_regime(X.n, X.p, regime, kappa)
    method = METHOD_ALIASES[method]
    if m is None:
        report = independence_test(X, level, method, params, workers=workers)
    else:
        report = m_dependence_test(X, m, level, method, params,
                                   pair_count_mode=pair_count or PairCountMode.SQUARED, workers=workers)
    emit(report.to_dict(), output)
    if pdf:
        ReportGenerator().export_test_report(report, pdf)
    sys.exit(EXIT_REJECT if report.rejected else EXIT_OK)


@main.command('simulate')
@distribution_options
@click.option('--n', type=int, required=True)
@click.option('--p', type=int, required=True)
@click.option('--m', type=int, default=None, help='MA(m) design; the statistic becomes L_nm.')
@click.option('--test-gap', type=int, default=None, help='Band gap of L_nm (default m).')
@click.option('--R', 'replications', type=int, default=100, show_default=True, help='Replications.')
@click.option('--seed', type=int, default=0, show_default=True, help='Master seed.')
@click.option('--stat', type=click.Choice(sorted(STAT_ALIASES)), default='Wn', show_default=True,
              help='Reported statistic: raw L, normalized W or sqrt(n/log p) L.')
@click.option('--kind', type=click.Choice(KIND_CHOICES), default=None)
@regime_options
@click.option('--samples-csv', type=click.Path(dir_okay=False), default=None)
@click.option('--output', type=click.Path(dir_okay=False), default=None)
@click.option('--pdf', type=click.Path(dir_okay=False), default=None)
@click.option('--no-samples', is_flag=True, help='Leave samples out of the JSON summary.')
@workers_option
@handle_errors
def cmd_simulate(dist, param, mu, sigma, n, p, m, test_gap, replications, seed, stat, kind,
                 regime, kappa, samples_csv, output, pdf, no_samples, workers):
    """Monte Carlo replication of a coherence statistic."""
    spec = DistributionSpec(dist, param, mu, sigma)
    params = None
    if regime is not None or kappa is not None:
        derived = regime_from_spec(spec, n, p)
        params = RegimeParams(
            n=n, p=p,
            alpha_regime=regime or derived.alpha_regime,
            kappa=derived.kappa if kappa is None else kappa,
        )
    plan = SimulationPlan(
        spec=spec, n=n, p=p, replications=replications, master_seed=seed,
        kind=kind, m=m, test_gap=test_gap, regime=params, reported=STAT_ALIASES[stat],
    )
    summary = run_replications(plan, workers=workers)
    if samples_csv:
        dump_samples_csv(summary, samples_csv)
    emit(summary.to_dict(include_samples=not no_samples), output)
    if pdf:
        ReportGenerator().export_summary(summary, pdf)


@main.command('mip')
@input_options
@click.option('--mu', type=float, default=0.0, show_default=True, help='Population mean of the entries.')
@click.option('--k', type=int, default=None, help='Sparsity level to certify.')
@click.option('--output', type=click.Path(dir_okay=False), default=None)
@workers_option
@handle_errors
def cmd_mip(input_path, fmt, mu, k, output, workers):
    """Mutual incoherence certificate for a measurement matrix."""
    X = read_matrix(input_path, fmt)
    emit(mip_certificate(X, mu, k, workers=workers).to_dict(), output)


@main.command('dist-tables')
@click.option('--p', type=int, required=True)
@click.option('--n', type=int, default=100, show_default=True)
@regime_options
@click.option('--grid', default='-4:10:0.5', show_default=True, help="'start:stop:step' or 'y1,y2,...'.")
@click.option('--pair-count', type=click.Choice([c.value for c in PairCountMode]), default='exact', show_default=True)
@click.option('--output', type=click.Path(dir_okay=False), default=None, help='CSV or .xlsx (default stdout).')
@handle_errors
def cmd_dist_tables(p, n, regime, kappa, grid, pair_count, output):
    """Tabulate F_Y and the intermediate approximation."""
    table = distribution_table(parse_grid(grid), build_regime(n, p, regime, kappa), pair_count)
    if output:
        write_distribution_table(table, output)
    else:
        click.echo(table.to_csv(index=False, float_format='%.17g'), nl=False)


if __name__ == '__main__':
    main()
