from __future__ import annotations

from typing import Any, final, overload

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg
from typing_extensions import Self, override

from .operators import DenseOperator
from .utils import (
    RandomSource,
    Vector,
    freeze,
    to_generator,
    validate_positive_integer,
    validate_real,
)


@final
class SpectrumProfile:
    """Explicit nonincreasing list of eigenvalues lambda_1 >= ... >= 0."""

    @classmethod
    def exponential(cls, dim: int, base: float, /) -> Self:
        """Spectrum lambda_j = base ** j for j = 1, ..., dim."""
        validate_positive_integer(dim, name='Dimension')
        validate_real(base, name='Base', positive=True)
        if base > 1:
            raise ValueError(f'Base should not exceed 1, but got {base!r}.')
        return cls(float(base) ** np.arange(1, dim + 1))

    @classmethod
    def from_values(
        cls, values: ArrayLike, /, *, seed: int | None = None
    ) -> Self:
        """Sorts arbitrary nonnegative values into a profile."""
        return cls(-np.sort(-np.asarray(values, dtype=np.float64)), seed=seed)

    @classmethod
    def polynomial(cls, dim: int, power: float, /) -> Self:
        """Spectrum lambda_j = j ** -power for j = 1, ..., dim."""
        validate_positive_integer(dim, name='Dimension')
        validate_real(power, name='Power', nonnegative=True)
        return cls(np.arange(1, dim + 1, dtype=np.float64) ** -float(power))

    @property
    def dim(self, /) -> int:
        return self._eigenvalues.shape[0]

    @property
    def eigenvalues(self, /) -> Vector:
        return self._eigenvalues

    @property
    def rank(self, /) -> int:
        return int(np.count_nonzero(self._eigenvalues))

    @property
    def seed(self, /) -> int | None:
        return self._seed

    def eigenvalue(self, index: int, /) -> float:
        """Returns the index-th largest eigenvalue, counting from one."""
        if not (1 <= index <= self.dim):
            raise ValueError(
                f'Eigenvalue index should be in [1, {self.dim!r}], '
                f'but got {index!r}.'
            )
        return float(self._eigenvalues[index - 1])

    _eigenvalues: Vector
    _seed: int | None

    __slots__ = '_eigenvalues', '_seed'

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {SpectrumProfile.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(
        cls, eigenvalues: ArrayLike, /, *, seed: int | None = None
    ) -> Self:
        values = np.array(eigenvalues, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] < 1:
            raise ValueError(
                'Eigenvalues should be a non-empty list, '
                f'but got shape {values.shape!r}.'
            )
        if not np.all(np.isfinite(values)):
            raise ValueError('Eigenvalues should be finite.')
        if np.any(values < 0):
            raise ValueError(
                f'Eigenvalues should be nonnegative, but got {values!r}.'
            )
        if np.any(np.diff(values) > 0):
            raise ValueError(
                f'Eigenvalues should be nonincreasing, but got {values!r}.'
            )
        if seed is not None and not isinstance(seed, int):
            raise TypeError(type(seed))
        self = super().__new__(cls)
        self._eigenvalues, self._seed = freeze(values), seed
        return self

    @overload
    def __eq__(self, other: Self, /) -> bool: ...

    @overload
    def __eq__(self, other: Any, /) -> Any: ...

    @override
    def __eq__(self, other: Any, /) -> Any:
        return (
            (
                np.array_equal(self._eigenvalues, other._eigenvalues)
                and self._seed == other._seed
            )
            if isinstance(other, SpectrumProfile)
            else NotImplemented
        )

    @override
    def __hash__(self, /) -> int:
        return hash((self._eigenvalues.tobytes(), self._seed))

    @override
    def __repr__(self, /) -> str:
        return (
            f'{type(self).__qualname__}'
            f'({self._eigenvalues.tolist()!r}, seed={self._seed!r})'
        )


def random_orthogonal(dim: int, rng: RandomSource, /) -> Any:
    generator = to_generator(rng)
    gaussian = generator.standard_normal((dim, dim))
    q, r = linalg.qr(gaussian)
    # sign correction makes the distribution Haar
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def synthesize_operator(
    profile: SpectrumProfile, rng: RandomSource | None = None, /
) -> DenseOperator:
    """Builds A = Q diag(lambda) Q^T for a seeded random orthogonal Q."""
    if not isinstance(profile, SpectrumProfile):
        raise TypeError(type(profile))
    if rng is None:
        if profile.seed is None:
            raise ValueError(
                'Either a generator or a profile seed should be supplied.'
            )
        rng = profile.seed
    q = random_orthogonal(profile.dim, rng)
    matrix = (q * profile.eigenvalues) @ q.T
    return DenseOperator((matrix + matrix.T) / 2.0)
