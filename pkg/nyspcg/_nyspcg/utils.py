from __future__ import annotations

from typing import Any, TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray

Matrix: TypeAlias = NDArray[np.float64]
Vector: TypeAlias = NDArray[np.float64]


def freeze(array: NDArray[Any], /) -> NDArray[Any]:
    array.setflags(write=False)
    return array


def scale_rows(factors: Vector, values: NDArray[np.float64], /) -> Matrix:
    return (
        factors[:, np.newaxis] * values
        if values.ndim == 2
        else factors * values
    )


def to_finite_matrix(value: ArrayLike, /, *, name: str) -> Matrix:
    result = np.array(value, dtype=np.float64)
    if result.ndim != 2:
        raise ValueError(
            f'{name} should be two-dimensional, '
            f'but got shape {result.shape!r}.'
        )
    if not np.all(np.isfinite(result)):
        raise ValueError(f'{name} should have finite entries only.')
    return result


def to_finite_vector(value: ArrayLike, /, *, dim: int, name: str) -> Vector:
    result = np.asarray(value, dtype=np.float64)
    if result.shape != (dim,):
        raise ValueError(
            f'{name} should have shape {(dim,)!r}, '
            f'but got {result.shape!r}.'
        )
    if not np.all(np.isfinite(result)):
        raise ValueError(f'{name} should have finite entries only.')
    return result


def to_finite_block(value: ArrayLike, /, *, dim: int, name: str) -> Matrix:
    result = np.asarray(value, dtype=np.float64)
    if result.ndim != 2 or result.shape[0] != dim:
        raise ValueError(
            f'{name} should have shape ({dim!r}, k), '
            f'but got {result.shape!r}.'
        )
    if not np.all(np.isfinite(result)):
        raise ValueError(f'{name} should have finite entries only.')
    return result


def validate_positive_integer(value: int, /, *, name: str) -> None:
    if not isinstance(value, int | np.integer) or isinstance(value, bool):
        raise TypeError(type(value))
    if value < 1:
        raise ValueError(f'{name} should be positive, but got {value!r}.')


def validate_real(
    value: float,
    /,
    *,
    name: str,
    positive: bool = False,
    nonnegative: bool = False,
) -> None:
    if not isinstance(value, int | float | np.floating | np.integer):
        raise TypeError(type(value))
    if not np.isfinite(value):
        raise ValueError(f'{name} should be finite, but got {value!r}.')
    if positive and value <= 0:
        raise ValueError(f'{name} should be positive, but got {value!r}.')
    if nonnegative and value < 0:
        raise ValueError(
            f'{name} should be nonnegative, but got {value!r}.'
        )


RandomSource: TypeAlias = np.random.Generator | int


def to_generator(value: RandomSource, /) -> np.random.Generator:
    if isinstance(value, np.random.Generator):
        return value
    if isinstance(value, int | np.integer) and not isinstance(value, bool):
        return np.random.default_rng(int(value))
    raise TypeError(
        'Randomness should be supplied as a seeded generator or a seed, '
        f'but got {type(value)!r}.'
    )
