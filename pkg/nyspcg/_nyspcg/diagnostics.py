from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, final

import numpy as np
from scipy import linalg
from typing_extensions import Self, override

from .operators import to_dense_oracle
from .preconditioning import Preconditioner
from .spectrum import SpectrumProfile
from .utils import Matrix, validate_positive_integer, validate_real

# slack for comparisons against sums of floating point eigenvalues
_LEMMA_SLACK = 1e-12


@final
class ConditionBounds:
    """Deterministic two-sided bound on the preconditioned condition number."""

    @property
    def error_norm(self, /) -> float:
        return self._error_norm

    @property
    def lambda_ell(self, /) -> float:
        return self._lambda_ell

    @property
    def lambda_min(self, /) -> float:
        return self._lambda_min

    @property
    def lower(self, /) -> float:
        return self._lower

    @property
    def mu(self, /) -> float:
        return self._mu

    @property
    def upper(self, /) -> float:
        return self._upper

    def __contains__(self, value: float, /) -> bool:
        return self._lower <= value <= self._upper

    _error_norm: float
    _lambda_ell: float
    _lambda_min: float
    _lower: float
    _mu: float
    _upper: float

    __slots__ = (
        '_error_norm',
        '_lambda_ell',
        '_lambda_min',
        '_lower',
        '_mu',
        '_upper',
    )

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {ConditionBounds.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(
        cls,
        lambda_ell: float,
        mu: float,
        error_norm: float,
        lambda_min: float,
        /,
    ) -> Self:
        for value, name in (
            (lambda_ell, 'Smallest retained eigenvalue'),
            (mu, 'Regularization parameter'),
            (error_norm, 'Error norm'),
            (lambda_min, 'Smallest eigenvalue'),
        ):
            validate_real(value, name=name, nonnegative=True)
        if mu + lambda_min == 0:
            raise ValueError(
                'Regularized matrix is singular: '
                'mu and the smallest eigenvalue are both zero.'
            )
        lower = max((lambda_ell + mu) / (lambda_min + mu), 1.0)
        scale = (lambda_ell + lambda_min + 2.0 * mu) / (
            (lambda_ell + mu) * (lambda_min + mu)
        )
        if mu > 0:
            scale = min(1.0 / mu, scale)
        upper = (lambda_ell + mu + error_norm) * scale
        self = super().__new__(cls)
        self._error_norm, self._lambda_ell, self._lambda_min, self._mu = (
            float(error_norm),
            float(lambda_ell),
            float(lambda_min),
            float(mu),
        )
        self._lower, self._upper = lower, max(upper, lower)
        return self

    @override
    def __repr__(self, /) -> str:
        return (
            f'{type(self).__qualname__}'
            f'({self._lambda_ell!r}, {self._mu!r}, {self._error_norm!r}, '
            f'{self._lambda_min!r})'
        )


@dataclass(frozen=True, slots=True)
class LemmaViolation:
    item: int
    index: int
    lhs: float
    rhs: float


@dataclass(frozen=True, slots=True)
class LemmaCheck:
    effective_dimension: float
    violation: LemmaViolation | None

    def __bool__(self, /) -> bool:
        return self.violation is None


def effective_dimension(profile: SpectrumProfile, mu: float, /) -> float:
    validate_real(mu, name='Regularization parameter', positive=True)
    eigenvalues = profile.eigenvalues
    return float(np.sum(eigenvalues / (eigenvalues + mu)))


def p_stable_rank(profile: SpectrumProfile, p: int, /) -> float:
    """Tail mass from the p-th eigenvalue on, in units of that eigenvalue."""
    validate_positive_integer(p, name='Index')
    pivot = profile.eigenvalue(p)
    if pivot == 0:
        raise ValueError(
            f'Stable rank is undefined for zero eigenvalue at index {p!r}.'
        )
    return float(profile.eigenvalues[p - 1 :].sum()) / pivot


def recommended_sketch_size(profile: SpectrumProfile, mu: float, /) -> int:
    return min(
        2 * math.ceil(1.5 * effective_dimension(profile, mu)) + 1, profile.dim
    )


def sketch_and_solve_sketch_size(
    profile: SpectrumProfile, mu: float, epsilon: float, /
) -> int:
    """Sketch size making sketch-and-solve accurate to epsilon."""
    validate_real(epsilon, name='Accuracy', positive=True)
    return min(
        2 * math.ceil(1.5 * effective_dimension(profile, epsilon * mu)) + 1,
        profile.dim,
    )


def condition_bounds(
    lambda_ell: float, mu: float, error_norm: float, lambda_min: float, /
) -> ConditionBounds:
    return ConditionBounds(lambda_ell, mu, error_norm, lambda_min)


def inverse_perturbation_bound(error_norm: float, mu: float, /) -> float:
    validate_real(error_norm, name='Error norm', nonnegative=True)
    validate_real(mu, name='Regularization parameter', positive=True)
    return error_norm / (mu * (error_norm + mu))


def optimal_inverse_discrepancy(lambda_next: float, mu: float, /) -> float:
    """Inverse discrepancy attained by the best rank-ell approximation."""
    return inverse_perturbation_bound(lambda_next, mu)


def expected_inverse_error_bound(
    profile: SpectrumProfile, p: int, mu: float, /
) -> float:
    validate_real(mu, name='Regularization parameter', positive=True)
    pivot = profile.eigenvalue(p)
    if pivot == 0:
        return 0.0
    return (3.0 + 4.0 * math.e**2 / p * p_stable_rank(profile, p)) * (
        pivot / (mu * (pivot + mu))
    )


def preconditioned_matrix(
    preconditioner: Preconditioner, regularized: Any, /
) -> Matrix:
    """Dense P^-1/2 A_mu P^-1/2 through a symmetric square root."""
    dense = to_dense_oracle(regularized)
    if preconditioner.dim != dense.shape[0]:
        raise ValueError(
            f'Preconditioner dimension {preconditioner.dim!r} does not '
            f'match matrix dimension {dense.shape[0]!r}.'
        )
    eigenvalues, eigenvectors = linalg.eigh(preconditioner.to_dense())
    if eigenvalues[0] <= 0:
        raise ValueError(
            'Preconditioner should be positive definite, '
            f'but has eigenvalue {eigenvalues[0]!r}.'
        )
    inverse_root = (eigenvectors / np.sqrt(eigenvalues)) @ eigenvectors.T
    result = inverse_root @ dense @ inverse_root
    return (result + result.T) / 2.0


def exact_condition_number(
    preconditioner: Preconditioner, regularized: Any, /
) -> float:
    eigenvalues = linalg.eigvalsh(
        preconditioned_matrix(preconditioner, regularized)
    )
    if eigenvalues[0] <= 0:
        raise ValueError(
            'Preconditioned matrix should be positive definite, '
            f'but has eigenvalue {eigenvalues[0]!r}.'
        )
    return float(eigenvalues[-1] / eigenvalues[0])


def key_lemma_check(
    profile: SpectrumProfile, mu: float, gamma: float, /
) -> LemmaCheck:
    """Scans all indices for the eigenvalue and tail-sum lemma statements.

    Item 1: lambda_j <= gamma * mu for every j >= (1 + 1 / gamma) * d_eff.
    Item 2: sum of lambda_j over j > k is at most d_eff * mu
    for every k >= d_eff.
    """
    validate_real(gamma, name='Gamma', positive=True)
    dimension = effective_dimension(profile, mu)
    eigenvalues = profile.eigenvalues
    scale = max(float(eigenvalues[0]), mu)
    first_index = max(math.ceil((1.0 + 1.0 / gamma) * dimension), 1)
    for index in range(first_index, profile.dim + 1):
        value = float(eigenvalues[index - 1])
        if value > gamma * mu + _LEMMA_SLACK * scale:
            return LemmaCheck(
                dimension, LemmaViolation(1, index, value, gamma * mu)
            )
    # tails[k] is the sum of eigenvalues past the k-th one
    tails = np.concatenate([np.cumsum(eigenvalues[::-1])[::-1], [0.0]])
    bound = dimension * mu
    for index in range(max(math.ceil(dimension), 1), profile.dim + 1):
        tail = float(tails[index])
        if tail > bound + _LEMMA_SLACK * scale * profile.dim:
            return LemmaCheck(
                dimension, LemmaViolation(2, index, tail, bound)
            )
    return LemmaCheck(dimension, None)

