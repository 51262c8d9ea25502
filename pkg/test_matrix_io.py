#!/usr/bin/env python3
"""
Tests for CSV and COHM matrix input/output
"""

import numpy as np
import pytest

from errors import InvalidParameterError, MatrixFormatError
from matgen import DistributionSpec, sample_matrix
from matrix_io import BINARY_HEADER, detect_format, read_matrix, write_matrix


def write_text(path, text):
    path.write_text(text)
    return str(path)


def test_detect_format():
    assert detect_format('data.csv') == 'csv'
    assert detect_format('data.COHM') == 'binary'
    assert detect_format('data.bin') == 'binary'
    assert detect_format('data.bin', 'csv') == 'csv'
    with pytest.raises(InvalidParameterError):
        detect_format('data.csv', 'parquet')


def test_read_plain_csv(tmp_path):
    X = read_matrix(write_text(tmp_path / 'm.csv', "1,2\n2,1\n3,3\n"))
    assert (X.n, X.p) == (3, 2)
    assert X.values.tolist() == [[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]]


def test_read_csv_with_header(tmp_path):
    X = read_matrix(write_text(tmp_path / 'm.csv', "x1, x2\n1.5, -2e-3\n2, 1\n"))
    assert X.values.tolist() == [[1.5, -0.002], [2.0, 1.0]]


def test_non_number_reports_location(tmp_path):
    path = write_text(tmp_path / 'm.csv', "1,2\n2,oops\n3,3\n")
    with pytest.raises(MatrixFormatError) as excinfo:
        read_matrix(path)
    assert excinfo.value.line == 2
    assert excinfo.value.column == 2
    assert 'line 2, column 2' in str(excinfo.value)


def test_mixed_first_row_is_not_a_header(tmp_path):
    path = write_text(tmp_path / 'm.csv', "1,abc\n2,1\n3,3\n4,7\n")
    with pytest.raises(MatrixFormatError) as excinfo:
        read_matrix(path)
    assert (excinfo.value.line, excinfo.value.column) == (1, 2)


def test_short_row_reports_location(tmp_path):
    path = write_text(tmp_path / 'm.csv', "1,2,3\n4,5\n6,7,8\n")
    with pytest.raises(MatrixFormatError) as excinfo:
        read_matrix(path)
    assert excinfo.value.line == 2
    assert excinfo.value.column == 3


def test_long_row_is_malformed(tmp_path):
    path = write_text(tmp_path / 'm.csv', "1,2\n3,4\n5,6,7\n")
    with pytest.raises(MatrixFormatError):
        read_matrix(path)


@pytest.mark.parametrize('text', ["", "1,2\n", "1,inf\n2,3\n"])
def test_unusable_csv(tmp_path, text):
    with pytest.raises(MatrixFormatError):
        read_matrix(write_text(tmp_path / 'm.csv', text))


def test_missing_file(tmp_path):
    with pytest.raises(MatrixFormatError):
        read_matrix(str(tmp_path / 'absent.csv'))


@pytest.mark.parametrize('name', ['m.csv', 'm.cohm'])
def test_write_read_is_exact(tmp_path, name):
    X = sample_matrix(DistributionSpec('centered_exponential'), 17, 9, seed=42)
    path = str(tmp_path / name)
    write_matrix(X, path)
    assert np.array_equal(read_matrix(path).values, X.values)


def test_binary_layout(tmp_path):
    X = sample_matrix(DistributionSpec('gaussian'), 3, 4, seed=1)
    path = tmp_path / 'm.cohm'
    write_matrix(X, str(path))
    blob = path.read_bytes()
    assert blob[:4] == b'COHM'
    assert len(blob) == 16 + 8 * 12
    header = np.frombuffer(blob, dtype=BINARY_HEADER, count=1)[0]
    assert (int(header['n']), int(header['p'])) == (3, 4)


def test_binary_errors(tmp_path):
    bad_magic = tmp_path / 'bad.cohm'
    bad_magic.write_bytes(b'XXXX' + bytes(12))
    with pytest.raises(MatrixFormatError):
        read_matrix(str(bad_magic))

    X = sample_matrix(DistributionSpec('gaussian'), 3, 4, seed=1)
    truncated = tmp_path / 'short.cohm'
    write_matrix(X, str(truncated))
    truncated.write_bytes(truncated.read_bytes()[:-8])
    with pytest.raises(MatrixFormatError):
        read_matrix(str(truncated))

    tiny = tmp_path / 'tiny.bin'
    tiny.write_bytes(b'COHM')
    with pytest.raises(MatrixFormatError):
        read_matrix(str(tiny))
