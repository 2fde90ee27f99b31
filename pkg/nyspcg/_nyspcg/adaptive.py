from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum, unique

import numpy as np
from numpy.typing import ArrayLike
from typing_extensions import override

from .approximation import (
    NystromApproximation,
    SketchKind,
    SketchPair,
    column_sketch,
    extend_sketch,
    gaussian_sketch,
)
from .constants import (
    DEFAULT_ERROR_TAU,
    DEFAULT_POWER_ITERATIONS,
    DEFAULT_RATIO_TAU,
    POSTERIOR_SAFETY_FACTOR,
    SMALL_EIGENVALUE_DIVISOR,
)
from .operators import LinearOperator
from .solving import iteration_bound
from .utils import (
    RandomSource,
    scale_rows,
    to_generator,
    validate_positive_integer,
    validate_real,
)

logger = logging.getLogger(__name__)


@unique
class RankSelectionMode(str, Enum):
    ERROR = 'error'
    FIXED = 'fixed'
    RATIO = 'ratio'

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}.{self._name_}'

    @override
    def __str__(self, /) -> str:
        return self._value_


@dataclass(frozen=True, slots=True)
class AdaptiveConfig:
    """Parameters of a rank search.

    ``tau`` defaults to 30 for error tolerance and to 10 for
    eigenvalue ratio selection.
    """

    initial_size: int
    max_size: int
    mu: float
    mode: RankSelectionMode = RankSelectionMode.ERROR
    tau: float | None = None
    power_iterations: int = DEFAULT_POWER_ITERATIONS
    sketch_kind: SketchKind = SketchKind.GAUSSIAN
    small_eigenvalue_check: bool = True

    @property
    def tolerance(self, /) -> float:
        """Absolute threshold the stopping rule compares against."""
        assert self.tau is not None, self
        return self.tau * self.mu

    def __post_init__(self, /) -> None:
        validate_positive_integer(self.initial_size, name='Initial size')
        validate_positive_integer(self.max_size, name='Maximum size')
        if self.initial_size > self.max_size:
            raise ValueError(
                f'Initial size {self.initial_size!r} should not exceed '
                f'maximum size {self.max_size!r}.'
            )
        validate_real(self.mu, name='Regularization parameter', positive=True)
        validate_positive_integer(
            self.power_iterations, name='Power iterations count'
        )
        object.__setattr__(self, 'mode', RankSelectionMode(self.mode))
        object.__setattr__(self, 'sketch_kind', SketchKind(self.sketch_kind))
        if self.tau is None:
            object.__setattr__(
                self,
                'tau',
                DEFAULT_RATIO_TAU
                if self.mode is RankSelectionMode.RATIO
                else DEFAULT_ERROR_TAU,
            )
        else:
            validate_real(self.tau, name='Tolerance multiplier', positive=True)


@dataclass(frozen=True, slots=True)
class AdaptiveOutcome:
    approximation: NystromApproximation
    error_estimate: float | None
    doublings: int
    hit_cap: bool
    mu: float

    @property
    def posterior_condition_estimate(self, /) -> float | None:
        """Condition number estimate with the estimated error inflated."""
        if self.error_estimate is None:
            return None
        return posterior_condition_estimate(
            self.approximation.lambda_ell,
            self.mu,
            POSTERIOR_SAFETY_FACTOR * self.error_estimate,
        )

    @property
    def rank(self, /) -> int:
        return self.approximation.rank

    def iteration_forecast(self, epsilon: float, /) -> int:
        kappa = self.posterior_condition_estimate
        if kappa is None:
            raise ValueError(
                'Iteration forecast requires an error estimate, '
                'ratio selection does not measure one.'
            )
        return iteration_bound(kappa, epsilon)


def estimate_error_power(
    operator: LinearOperator,
    u: ArrayLike,
    eigenvalues: ArrayLike,
    power_iterations: int,
    rng: RandomSource,
    /,
) -> float:
    """Power-method estimate of the norm of A - U diag(eigenvalues) U^T."""
    validate_positive_integer(power_iterations, name='Power iterations count')
    factor = np.asarray(u, dtype=np.float64)
    values = np.asarray(eigenvalues, dtype=np.float64)
    vector = to_generator(rng).standard_normal(operator.dim)
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for _ in range(power_iterations):
        image = operator.matvec(vector) - factor @ scale_rows(
            values, factor.T @ vector
        )
        estimate = float(vector @ image)
        image_norm = np.linalg.norm(image)
        if image_norm == 0.0:
            break
        vector = image / image_norm
    return max(estimate, 0.0)


def posterior_condition_estimate(
    lambda_ell: float, mu: float, error_estimate: float, /
) -> float:
    validate_real(mu, name='Regularization parameter', positive=True)
    validate_real(lambda_ell, name='Smallest eigenvalue', nonnegative=True)
    validate_real(error_estimate, name='Error estimate', nonnegative=True)
    return (lambda_ell + mu + error_estimate) / mu


def adaptive_nystrom(
    operator: LinearOperator, config: AdaptiveConfig, rng: RandomSource, /
) -> AdaptiveOutcome:
    """Doubles the sketch size until the estimated error is small enough."""
    _validate_mode(config, RankSelectionMode.ERROR)
    generator = to_generator(rng)
    tolerance = config.tolerance
    eigenvalue_tolerance = tolerance / SMALL_EIGENVALUE_DIVISOR

    def measure(approximation: NystromApproximation, /) -> float:
        return estimate_error_power(
            operator,
            approximation.u,
            approximation.eigenvalues,
            config.power_iterations,
            generator,
        )

    def accept(
        approximation: NystromApproximation, estimate: float, /
    ) -> bool:
        return estimate <= tolerance and (
            not config.small_eigenvalue_check
            or approximation.lambda_ell <= eigenvalue_tolerance
        )

    return _double_until(operator, config, generator, measure, accept)


def adaptive_nystrom_ratio(
    operator: LinearOperator, config: AdaptiveConfig, rng: RandomSource, /
) -> AdaptiveOutcome:
    """Doubles the sketch size until lambda_ell / mu drops to tau."""
    _validate_mode(config, RankSelectionMode.RATIO)
    assert config.tau is not None, config

    def accept(approximation: NystromApproximation, _: None, /) -> bool:
        return approximation.lambda_ell / config.mu <= config.tau

    return _double_until(
        operator, config, to_generator(rng), _skip_measure, accept
    )


def fixed_rank_nystrom(
    operator: LinearOperator, config: AdaptiveConfig, rng: RandomSource, /
) -> AdaptiveOutcome:
    """Builds at the largest affordable size and measures its error."""
    _validate_mode(config, RankSelectionMode.FIXED)
    _validate_dimension(operator, config)
    generator = to_generator(rng)
    approximation = _initial_sketch(
        operator, config.max_size, config.sketch_kind, generator
    ).to_approximation()
    estimate = estimate_error_power(
        operator,
        approximation.u,
        approximation.eigenvalues,
        config.power_iterations,
        generator,
    )
    return AdaptiveOutcome(
        approximation=approximation,
        error_estimate=estimate,
        doublings=0,
        hit_cap=False,
        mu=config.mu,
    )


def select_rank(
    operator: LinearOperator, config: AdaptiveConfig, rng: RandomSource, /
) -> AdaptiveOutcome:
    if config.mode is RankSelectionMode.ERROR:
        return adaptive_nystrom(operator, config, rng)
    elif config.mode is RankSelectionMode.RATIO:
        return adaptive_nystrom_ratio(operator, config, rng)
    else:
        assert config.mode is RankSelectionMode.FIXED, config
        return fixed_rank_nystrom(operator, config, rng)


def _double_until(
    operator: LinearOperator,
    config: AdaptiveConfig,
    generator: np.random.Generator,
    measure: Callable[[NystromApproximation], float | None],
    accept: Callable[[NystromApproximation, float | None], bool],
    /,
) -> AdaptiveOutcome:
    _validate_dimension(operator, config)
    sketch = _initial_sketch(
        operator, config.initial_size, config.sketch_kind, generator
    )
    approximation = sketch.to_approximation()
    estimate = measure(approximation)
    doublings = 0
    hit_cap = False
    while not accept(approximation, estimate):
        size = sketch.size
        if size >= config.max_size:
            hit_cap = True
            break
        extra = min(size, config.max_size - size)
        sketch = extend_sketch(sketch, operator, extra, generator)
        approximation = sketch.to_approximation()
        doublings += 1
        logger.debug(
            'Sketch size grown from %r to %r, previous estimate %r.',
            size,
            sketch.size,
            estimate,
        )
        if extra < size:
            # topped up to the cap, the last estimate stays as reported
            hit_cap = True
            break
        estimate = measure(approximation)
    return AdaptiveOutcome(
        approximation=approximation,
        error_estimate=estimate,
        doublings=doublings,
        hit_cap=hit_cap,
        mu=config.mu,
    )


def _initial_sketch(
    operator: LinearOperator,
    size: int,
    kind: SketchKind,
    generator: np.random.Generator,
    /,
) -> SketchPair:
    return (
        column_sketch(operator, size, generator)
        if kind is SketchKind.COLUMN
        else gaussian_sketch(operator, size, generator)
    )


def _skip_measure(_: NystromApproximation, /) -> None:
    return None


def _validate_dimension(
    operator: LinearOperator, config: AdaptiveConfig, /
) -> None:
    if config.max_size > operator.dim:
        raise ValueError(
            f'Maximum size {config.max_size!r} should not exceed '
            f'operator dimension {operator.dim!r}.'
        )


def _validate_mode(
    config: AdaptiveConfig, expected: RankSelectionMode, /
) -> None:
    if not isinstance(config, AdaptiveConfig):
        raise TypeError(type(config))
    if config.mode is not expected:
        raise ValueError(
            f'Expected configuration with mode {expected!r}, '
            f'but got {config.mode!r}.'
        )
