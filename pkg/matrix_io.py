#!/usr/bin/env python3
"""
Matrix input/output
CSV (comma separated, optional header, '.' decimal) and the COHM binary
format: 16-byte header (magic "COHM", u32 n, u32 p, u32 reserved) followed
by n*p little-endian float64 values, row-major.
"""

import logging
import os

import numpy as np
import pandas as pd

from errors import InvalidParameterError, MatrixFormatError
from matgen import DataMatrix

logger = logging.getLogger(__name__)

BINARY_MAGIC = b'COHM'
BINARY_HEADER = np.dtype([('magic', 'S4'), ('n', '<u4'), ('p', '<u4'), ('reserved', '<u4')])
BINARY_EXTENSIONS = ('.cohm', '.bin')


def detect_format(path: str, fmt: str = None) -> str:
    if fmt:
        if fmt not in ('csv', 'binary'):
            raise InvalidParameterError(f"Unknown matrix format '{fmt}' (use csv or binary)")
        return fmt
    return 'binary' if os.path.splitext(path)[1].lower() in BINARY_EXTENSIONS else 'csv'


def _is_number(token) -> bool:
    try:
        float(token)
    except (TypeError, ValueError):
        return False
    return True


def read_csv_matrix(path: str) -> DataMatrix:
    """Parse a CSV matrix; the first row is a header when none of its fields is numeric"""
    try:
        raw = pd.read_csv(path, header=None, dtype=str, skipinitialspace=True, keep_default_na=False)
    except FileNotFoundError:
        raise MatrixFormatError(f"Input file not found: {path}")
    except pd.errors.EmptyDataError:
        raise MatrixFormatError(f"Input file is empty: {path}")
    except pd.errors.ParserError as e:
        raise MatrixFormatError(f"Malformed CSV: {e}")

    first_line = 1
    if len(raw) and not any(_is_number(token) for token in raw.iloc[0] if token != ''):
        raw = raw.iloc[1:]
        first_line = 2

    values = np.empty(raw.shape, dtype=np.float64)
    for row, record in enumerate(raw.itertuples(index=False)):
        for col, token in enumerate(record):
            if not isinstance(token, str) or token == '':
                raise MatrixFormatError("Missing value", line=row + first_line, column=col + 1)
            if not _is_number(token):
                raise MatrixFormatError(f"Not a number: {token!r}", line=row + first_line, column=col + 1)
            values[row, col] = float(token)
            if not np.isfinite(values[row, col]):
                raise MatrixFormatError(f"Non-finite value: {token!r}", line=row + first_line, column=col + 1)

    try:
        matrix = DataMatrix(values)
    except InvalidParameterError as e:
        raise MatrixFormatError(str(e))
    logger.info(f"Read {matrix.n} x {matrix.p} matrix from {path}")
    return matrix


def read_binary_matrix(path: str) -> DataMatrix:
    try:
        with open(path, 'rb') as handle:
            blob = handle.read()
    except FileNotFoundError:
        raise MatrixFormatError(f"Input file not found: {path}")
    if len(blob) < BINARY_HEADER.itemsize:
        raise MatrixFormatError(f"Binary file shorter than its {BINARY_HEADER.itemsize}-byte header")
    header = np.frombuffer(blob, dtype=BINARY_HEADER, count=1)[0]
    if header['magic'] != BINARY_MAGIC:
        raise MatrixFormatError(f"Bad magic {bytes(header['magic'])!r}, expected {BINARY_MAGIC!r}")
    n, p = int(header['n']), int(header['p'])
    expected = BINARY_HEADER.itemsize + 8 * n * p
    if len(blob) != expected:
        raise MatrixFormatError(f"Binary payload has {len(blob)} bytes, expected {expected} for {n} x {p}")
    values = np.frombuffer(blob, dtype='<f8', offset=BINARY_HEADER.itemsize).reshape(n, p)
    try:
        return DataMatrix(values)
    except InvalidParameterError as e:
        raise MatrixFormatError(str(e))


def read_matrix(path: str, fmt: str = None) -> DataMatrix:
    if detect_format(path, fmt) == 'binary':
        return read_binary_matrix(path)
    return read_csv_matrix(path)


def write_matrix(matrix: DataMatrix, path: str, fmt: str = None):
    if detect_format(path, fmt) == 'binary':
        header = np.array([(BINARY_MAGIC, matrix.n, matrix.p, 0)], dtype=BINARY_HEADER)
        with open(path, 'wb') as handle:
            handle.write(header.tobytes())
            handle.write(np.ascontiguousarray(matrix.values, dtype='<f8').tobytes())
    else:
        pd.DataFrame(matrix.values).to_csv(path, header=False, index=False, float_format='%.17g')
    logger.info(f"Wrote {matrix.n} x {matrix.p} matrix to {path}")
