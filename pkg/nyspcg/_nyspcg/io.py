from __future__ import annotations

import os
from enum import Enum, unique
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy import io as scipy_io, sparse
from typing_extensions import override

# two little-endian unsigned 64-bit dimensions
RAW_HEADER_DTYPE = np.dtype('<u8')
RAW_HEADER_SIZE = 2 * RAW_HEADER_DTYPE.itemsize
RAW_VALUE_DTYPE = np.dtype('<f8')


@unique
class MatrixFormat(str, Enum):
    CSV_DENSE = 'csv-dense'
    MATRIX_MARKET = 'matrix-market'
    RAW_F64 = 'raw-f64'

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}.{self._name_}'

    @override
    def __str__(self, /) -> str:
        return self._value_


class MatrixFormatError(Exception):
    def __init__(
        self, path: str | os.PathLike[str], line: int, reason: str, /
    ) -> None:
        super().__init__(f'{os.fspath(path)}:{line}: {reason}')
        self.line = line
        self.path = os.fspath(path)
        self.reason = reason


def load_matrix(
    path: str | os.PathLike[str],
    format_: MatrixFormat,
    /,
    *,
    symmetric: bool = False,
) -> Any:
    """Reads a dense array or, for coordinate files, a CSR matrix.

    Symmetric matrix market files are mirrored on read.
    With ``symmetric`` set the result must equal its transpose.
    """
    format_ = MatrixFormat(format_)
    file_path = Path(path)
    if file_path.stat().st_size == 0:
        raise MatrixFormatError(file_path, 1, 'empty file')
    if format_ is MatrixFormat.MATRIX_MARKET:
        result = _load_matrix_market(file_path)
    elif format_ is MatrixFormat.CSV_DENSE:
        result = _load_csv(file_path)
    else:
        result = _load_raw(file_path)
    if symmetric:
        _validate_symmetric(file_path, result)
    return result


def write_matrix(
    path: str | os.PathLike[str],
    matrix: ArrayLike | sparse.spmatrix,
    format_: MatrixFormat,
    /,
) -> None:
    format_ = MatrixFormat(format_)
    if format_ is MatrixFormat.MATRIX_MARKET:
        with open(path, 'wb') as stream:
            scipy_io.mmwrite(
                stream,
                sparse.coo_matrix(matrix)
                if sparse.issparse(matrix)
                else np.asarray(matrix, dtype=np.float64),
            )
        return
    dense = (
        matrix.toarray()
        if sparse.issparse(matrix)
        else np.asarray(matrix, dtype=np.float64)
    )
    if dense.ndim != 2:
        raise ValueError(
            f'Matrix should be two-dimensional, but got shape {dense.shape!r}.'
        )
    if format_ is MatrixFormat.CSV_DENSE:
        np.savetxt(path, dense, delimiter=',', fmt='%.17g')
    else:
        with open(path, 'wb') as stream:
            stream.write(
                np.array(dense.shape, dtype=RAW_HEADER_DTYPE).tobytes()
            )
            stream.write(
                np.ascontiguousarray(dense, dtype=RAW_VALUE_DTYPE).tobytes()
            )


def _load_csv(path: Path, /) -> Any:
    try:
        return np.loadtxt(path, delimiter=',', ndmin=2, dtype=np.float64)
    except ValueError as error:
        raise MatrixFormatError(
            path, _find_bad_line(path, separator=','), str(error)
        ) from error


def _load_matrix_market(path: Path, /) -> Any:
    try:
        with open(path, 'rb') as stream:
            result = scipy_io.mmread(stream)
    except (IndexError, RuntimeError, ValueError) as error:
        raise MatrixFormatError(
            path, _find_bad_line(path, separator=None), str(error)
        ) from error
    return sparse.csr_matrix(result) if sparse.issparse(result) else result


def _load_raw(path: Path, /) -> Any:
    data = path.read_bytes()
    if len(data) < RAW_HEADER_SIZE:
        raise MatrixFormatError(path, 1, 'truncated header')
    rows, columns = np.frombuffer(
        data[:RAW_HEADER_SIZE], dtype=RAW_HEADER_DTYPE
    ).tolist()
    expected_size = RAW_HEADER_SIZE + rows * columns * RAW_VALUE_DTYPE.itemsize
    if len(data) != expected_size:
        raise MatrixFormatError(
            path,
            1,
            f'expected {expected_size!r} bytes for a {rows}x{columns} '
            f'matrix, but got {len(data)!r}',
        )
    return (
        np.frombuffer(data[RAW_HEADER_SIZE:], dtype=RAW_VALUE_DTYPE)
        .reshape(rows, columns)
        .astype(np.float64)
    )


def _find_bad_line(path: Path, /, *, separator: str | None) -> int:
    """Returns the 1-based number of the first malformed data line."""
    expected_tokens_count: int | None = None
    line_number = 0
    with open(path, encoding='utf-8', errors='replace') as stream:
        for line_number, line in enumerate(stream, start=1):
            content = line.strip()
            if (
                separator is None
                and line_number == 1
                and not content.startswith('%%MatrixMarket')
            ):
                return line_number
            if not content or content.startswith('%'):
                continue
            tokens = content.split(separator)
            try:
                [float(token) for token in tokens]
            except ValueError:
                return line_number
            if separator is None:
                # matrix market size line differs from entry lines
                if expected_tokens_count is None:
                    expected_tokens_count = -1
                    continue
                if expected_tokens_count == -1:
                    expected_tokens_count = len(tokens)
            elif expected_tokens_count is None:
                expected_tokens_count = len(tokens)
            if len(tokens) != expected_tokens_count:
                return line_number
    return max(line_number, 1)


def _validate_symmetric(path: Path, matrix: Any, /) -> None:
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(
            f'{os.fspath(path)}: expected a square matrix, '
            f'but got shape {matrix.shape!r}.'
        )
    difference = abs(matrix - matrix.T)
    scale = abs(matrix).max() if matrix.size else 0.0
    if difference.max() > 1e-12 * max(scale, 1.0):
        raise ValueError(
            f'{os.fspath(path)}: expected a symmetric matrix.'
        )
