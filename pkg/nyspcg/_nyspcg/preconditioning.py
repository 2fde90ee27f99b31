from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, final

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg
from typing_extensions import Self, override

from .approximation import NystromApproximation, randomized_nystrom
from .operators import LinearOperator, to_dense_oracle
from .utils import (
    Matrix,
    RandomSource,
    Vector,
    freeze,
    scale_rows,
    to_finite_vector,
    validate_positive_integer,
    validate_real,
)


class Preconditioner(ABC):
    """Symmetric positive-definite P = U diag(s) U^T + (I - U U^T)."""

    @property
    def dim(self, /) -> int:
        return self._u.shape[0]

    @property
    def mu(self, /) -> float:
        return self._mu

    @property
    def rank(self, /) -> int:
        return self._u.shape[1]

    @property
    def u(self, /) -> Matrix:
        return self._u

    def apply(self, value: ArrayLike, /) -> Any:
        """Forward action of P on a vector or an n x s block."""
        return _apply_spectral(self._u, self._scales, self._validate(value))

    def apply_inverse(self, value: ArrayLike, /) -> Any:
        """Action of the inverse of P on a vector or an n x s block."""
        return _apply_spectral(
            self._u, 1.0 / self._scales, self._validate(value)
        )

    def to_dense(self, /) -> Matrix:
        return (self._u * (self._scales - 1.0)) @ self._u.T + np.eye(
            self.dim
        )

    _mu: float
    _scales: Vector
    _u: Matrix

    __slots__ = '_mu', '_scales', '_u'

    @abstractmethod
    def __repr__(self, /) -> str:
        raise NotImplementedError

    def _validate(self, value: ArrayLike, /) -> Matrix:
        result = np.asarray(value, dtype=np.float64)
        if result.ndim not in (1, 2) or result.shape[0] != self.dim:
            raise ValueError(
                f'Expected a vector or a block with {self.dim!r} rows, '
                f'but got shape {result.shape!r}.'
            )
        return result


@final
class NystromPreconditioner(Preconditioner):
    @classmethod
    def identity(cls, dim: int, mu: float, /) -> Self:
        """Rank-zero preconditioner, equal to the identity."""
        validate_positive_integer(dim, name='Dimension')
        return cls(np.zeros((dim, 0)), np.zeros(0), mu)

    @property
    def eigenvalues(self, /) -> Vector:
        return self._eigenvalues

    @property
    def lambda_ell(self, /) -> float:
        return float(self._eigenvalues[-1]) if self.rank > 0 else 0.0

    _eigenvalues: Vector

    __slots__ = ('_eigenvalues',)

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {NystromPreconditioner.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(
        cls, u: ArrayLike, eigenvalues: ArrayLike, mu: float, /
    ) -> Self:
        validate_real(mu, name='Regularization parameter', positive=True)
        # reuses factor validation of the approximation type
        approximation = NystromApproximation(u, eigenvalues, shift_used=0.0)
        self = super().__new__(cls)
        self._eigenvalues, self._mu, self._u = (
            approximation.eigenvalues,
            float(mu),
            approximation.u,
        )
        self._scales = freeze(
            (approximation.eigenvalues + mu) / (approximation.lambda_ell + mu)
        )
        return self

    @override
    def __repr__(self, /) -> str:
        return (
            f'{type(self).__qualname__}'
            f'(<{self.dim}x{self.rank}>, {self._eigenvalues.tolist()!r}, '
            f'{self._mu!r})'
        )

    @override
    def apply_inverse(self, value: ArrayLike, /) -> Any:
        if self.rank == 0:
            return np.array(self._validate(value), dtype=np.float64)
        return super().apply_inverse(value)


@final
class OptimalPreconditioner(Preconditioner):
    """Preconditioner built from the exact top eigenpairs."""

    @property
    def condition_number(self, /) -> float:
        """Condition number of the preconditioned regularized system."""
        return (self._lambda_next + self._mu) / (self._lambda_min + self._mu)

    @property
    def eigenvalues(self, /) -> Vector:
        return self._eigenvalues

    @property
    def lambda_min(self, /) -> float:
        return self._lambda_min

    @property
    def lambda_next(self, /) -> float:
        return self._lambda_next

    _eigenvalues: Vector
    _lambda_min: float
    _lambda_next: float

    __slots__ = '_eigenvalues', '_lambda_min', '_lambda_next'

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {OptimalPreconditioner.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(
        cls,
        eigenvectors: ArrayLike,
        eigenvalues: ArrayLike,
        mu: float,
        /,
        *,
        lambda_next: float,
        lambda_min: float,
    ) -> Self:
        validate_real(mu, name='Regularization parameter', positive=True)
        validate_real(lambda_next, name='Next eigenvalue', nonnegative=True)
        validate_real(lambda_min, name='Smallest eigenvalue', nonnegative=True)
        approximation = NystromApproximation(
            eigenvectors, eigenvalues, shift_used=0.0
        )
        if approximation.lambda_ell < lambda_next or lambda_next < lambda_min:
            raise ValueError(
                'Eigenvalues should be ordered as retained >= next >= min, '
                f'but got {approximation.lambda_ell!r}, {lambda_next!r}, '
                f'{lambda_min!r}.'
            )
        self = super().__new__(cls)
        self._eigenvalues, self._mu, self._u = (
            approximation.eigenvalues,
            float(mu),
            approximation.u,
        )
        self._lambda_min, self._lambda_next = (
            float(lambda_min),
            float(lambda_next),
        )
        self._scales = freeze(
            (approximation.eigenvalues + mu) / (lambda_next + mu)
        )
        return self

    @override
    def __repr__(self, /) -> str:
        return (
            f'{type(self).__qualname__}'
            f'(<{self.dim}x{self.rank}>, {self._eigenvalues.tolist()!r}, '
            f'{self._mu!r}, lambda_next={self._lambda_next!r}, '
            f'lambda_min={self._lambda_min!r})'
        )


def build_preconditioner(
    approximation: NystromApproximation, mu: float, /
) -> NystromPreconditioner:
    if not isinstance(approximation, NystromApproximation):
        raise TypeError(type(approximation))
    return NystromPreconditioner(
        approximation.u, approximation.eigenvalues, mu
    )


def apply(preconditioner: Preconditioner, value: ArrayLike, /) -> Any:
    return preconditioner.apply(value)


def apply_inverse(preconditioner: Preconditioner, value: ArrayLike, /) -> Any:
    return preconditioner.apply_inverse(value)


def optimal_preconditioner(
    matrix: Any, ell: int, mu: float, /
) -> OptimalPreconditioner:
    dense = to_dense_oracle(matrix)
    dim = dense.shape[0]
    validate_positive_integer(ell, name='Rank')
    if ell >= dim:
        raise ValueError(
            f'Rank should be less than dimension {dim!r}, but got {ell!r}.'
        )
    eigenvalues, eigenvectors = linalg.eigh(dense)
    eigenvalues = np.maximum(eigenvalues[::-1], 0.0)
    eigenvectors = eigenvectors[:, ::-1]
    return OptimalPreconditioner(
        eigenvectors[:, :ell],
        eigenvalues[:ell],
        mu,
        lambda_next=float(eigenvalues[ell]),
        lambda_min=float(eigenvalues[-1]),
    )


def woodbury_inverse_apply(
    u: ArrayLike, eigenvalues: ArrayLike, mu: float, value: ArrayLike, /
) -> Any:
    """Applies (U diag(eigenvalues) U^T + mu I)^-1 without forming it."""
    validate_real(mu, name='Regularization parameter', positive=True)
    factor = np.asarray(u, dtype=np.float64)
    values = np.asarray(value, dtype=np.float64)
    projection = factor.T @ values
    return (
        factor
        @ scale_rows(
            1.0 / (np.asarray(eigenvalues, dtype=np.float64) + mu),
            projection,
        )
        + (values - factor @ projection) / mu
    )


def sketch_and_solve(
    operator: LinearOperator,
    rhs: ArrayLike,
    mu: float,
    ell: int,
    rng: RandomSource,
    /,
) -> Vector:
    validate_real(mu, name='Regularization parameter', positive=True)
    vector = to_finite_vector(rhs, dim=operator.dim, name='Right-hand side')
    approximation = randomized_nystrom(operator, ell, rng)
    return woodbury_inverse_apply(
        approximation.u, approximation.eigenvalues, mu, vector
    )


def _apply_spectral(u: Matrix, scales: Vector, values: Any, /) -> Any:
    projection = u.T @ values
    return u @ scale_rows(scales, projection) + (values - u @ projection)

