#!/usr/bin/env python3
"""
Error types shared by the library, the CLI and the web API
"""

EXIT_OK = 0
EXIT_REJECT = 10
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class CoherenceError(ValueError):
    """Base class for all errors raised by this package"""
    exit_code = EXIT_USAGE


class InvalidParameterError(CoherenceError):
    """A dimension, range, level or grid argument is out of its domain"""
    exit_code = EXIT_USAGE


class MatrixFormatError(CoherenceError):
    """Matrix input could not be parsed"""
    exit_code = EXIT_USAGE

    def __init__(self, message: str, line: int = None, column: int = None):
        self.message = message
        self.line = line
        self.column = column
        location = ''
        if line is not None:
            location = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(f"{message}{location}")

    def __reduce__(self):
        return (MatrixFormatError, (self.message, self.line, self.column))


class DegenerateColumnError(CoherenceError):
    """A column has zero spread, so its correlation is undefined"""
    exit_code = EXIT_NUMERIC

    def __init__(self, column: int, reason: str = 'has zero sample variance'):
        self.column = column
        self.reason = reason
        super().__init__(f"Column {column} {reason}")

    def __reduce__(self):
        return (DegenerateColumnError, (self.column, self.reason))


class ReplicationError(CoherenceError):
    """A Monte Carlo replication failed; carries the replication index"""
    exit_code = EXIT_NUMERIC

    def __init__(self, replication: int, cause: str):
        self.replication = replication
        self.cause = cause
        super().__init__(f"Replication {replication} failed: {cause}")

    def __reduce__(self):
        return (ReplicationError, (self.replication, self.cause))
