#!/usr/bin/env python3
"""
Coherence Web API
Flask JSON endpoints over the coherence, test, MIP, distribution-table and
simulation routines
"""

import logging
import os
import sys

from flask import Flask, jsonify, request

# Add current directory to path for imports
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from coherence import StatisticKind, check_statistic_options, statistic
from errors import CoherenceError, InvalidParameterError
from hypothesis_tests import Method, independence_test, m_dependence_test, mip_certificate
from limits import PairCountMode, RegimeParams, distribution_table
from matgen import DataMatrix, DistributionSpec
from montecarlo import ReportedStatistic, SimulationPlan, run_replications
from settings import setup_logging

MAX_WEB_REPLICATIONS = 500

app = Flask(__name__)
logger = logging.getLogger(__name__)


def error_response(message: str, status: int = 400):
    logger.warning(f"{request.method} {request.path} rejected: {message}")
    return jsonify({'success': False, 'message': message}), status


@app.errorhandler(CoherenceError)
def handle_coherence_error(e):
    return error_response(str(e))


@app.errorhandler(ValueError)
def handle_bad_value(e):
    return error_response(f"Invalid value: {e}")


@app.errorhandler(KeyError)
def handle_missing_field(e):
    return error_response(f"Missing field: {e.args[0]}")


def request_json() -> dict:
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise InvalidParameterError("Request body must be a JSON object")
    return data


def matrix_from(data: dict) -> DataMatrix:
    rows = data['matrix']
    if not isinstance(rows, list) or not rows or not all(isinstance(row, list) for row in rows):
        raise InvalidParameterError("'matrix' must be a list of rows")
    if len({len(row) for row in rows}) != 1:
        raise InvalidParameterError("All matrix rows must have the same length")
    try:
        return DataMatrix([[float(v) for v in row] for row in rows])
    except (TypeError, ValueError) as e:
        raise InvalidParameterError(f"Matrix entries must be numbers: {e}")


def regime_from(data: dict, n: int, p: int) -> RegimeParams:
    return RegimeParams(n=n, p=p, alpha_regime=data.get('regime', 'low'), kappa=float(data.get('kappa', 0.0)))


@app.route('/health')
def health():
    return jsonify({'success': True})


@app.route('/api/coherence', methods=['POST'])
def api_coherence():
    """Coherence statistic of a posted matrix"""
    data = request_json()
    X = matrix_from(data)
    m = data.get('m')
    kind = data.get('kind') or (StatisticKind.L_NM if m is not None else StatisticKind.L_N)
    mu, sigma = data.get('mu'), data.get('sigma')
    check_statistic_options(kind, m, mu, sigma)
    result = statistic(X, kind, m=m, mu=mu, sigma=sigma)
    return jsonify({'success': True, 'n': X.n, 'p': X.p, **result.to_dict()})


@app.route('/api/test', methods=['POST'])
def api_test():
    """Independence test, or m-dependence test when 'm' is given"""
    data = request_json()
    X = matrix_from(data)
    level = float(data.get('level', 0.05))
    method = Method(data.get('method', Method.INTERMEDIATE.value))
    regime = regime_from(data, X.n, X.p)
    m = data.get('m')
    if m is None:
        report = independence_test(X, level, method, regime)
    else:
        report = m_dependence_test(X, int(m), level, method, regime,
                                   pair_count_mode=data.get('pair_count', PairCountMode.SQUARED.value))
    return jsonify({'success': True, 'report': report.to_dict()})


@app.route('/api/mip', methods=['POST'])
def api_mip():
    data = request_json()
    X = matrix_from(data)
    certificate = mip_certificate(X, float(data.get('mu', 0.0)), data.get('k'))
    return jsonify({'success': True, 'certificate': certificate.to_dict()})


@app.route('/api/dist-table', methods=['GET'])
def api_dist_table():
    """F_Y and the intermediate approximation over an evenly spaced grid"""
    args = request.args
    try:
        p = int(args['p'])
        n = int(args.get('n', 100))
        start = float(args.get('start', -4.0))
        stop = float(args.get('stop', 10.0))
        step = float(args.get('step', 0.5))
        kappa = float(args.get('kappa', 0.0))
    except ValueError as e:
        raise InvalidParameterError(f"Bad query parameter: {e}")
    if not step > 0 or stop < start:
        raise InvalidParameterError("Grid needs step > 0 and stop >= start")
    count = int((stop - start) / step + 1e-9) + 1
    grid = [start + i * step for i in range(count)]
    regime = RegimeParams(n=n, p=p, alpha_regime=args.get('regime', 'low'), kappa=kappa)
    table = distribution_table(grid, regime, args.get('pair_count', PairCountMode.EXACT.value))
    return jsonify({'success': True, 'rows': table.to_dict('records')})


@app.route('/api/simulate', methods=['POST'])
def api_simulate():
    """Small Monte Carlo runs; replications are capped for request latency"""
    data = request_json()
    replications = int(data.get('replications', 100))
    if replications > MAX_WEB_REPLICATIONS:
        raise InvalidParameterError(f"At most {MAX_WEB_REPLICATIONS} replications per request")
    spec = DistributionSpec(data.get('dist', 'gaussian'), data.get('param'),
                            float(data.get('mu', 0.0)), float(data.get('sigma', 1.0)))
    n, p = int(data['n']), int(data['p'])
    regime = regime_from(data, n, p) if ('regime' in data or 'kappa' in data) else None
    plan = SimulationPlan(
        spec=spec, n=n, p=p, replications=replications,
        master_seed=int(data.get('seed', 0)), kind=data.get('kind'),
        m=data.get('m'), test_gap=data.get('test_gap'), regime=regime,
        reported=ReportedStatistic(data.get('stat', ReportedStatistic.NORMALIZED.value)),
    )
    summary = run_replications(plan)
    return jsonify({'success': True, 'summary': summary.to_dict(include_samples=bool(data.get('samples', False)))})


if __name__ == '__main__':
    setup_logging()
    # Get port from environment variable or default to 5000
    port = int(os.environ.get('PORT', 5000))
    # Set debug based on environment
    debug = os.environ.get('FLASK_ENV') == 'development'

    app.run(debug=debug, host='0.0.0.0', port=port)
