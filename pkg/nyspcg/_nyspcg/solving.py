from __future__ import annotations

import logging
import math
import time
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum, unique

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg
from typing_extensions import override

from .constants import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
    DEFLATION_THRESHOLD,
)
from .operators import LinearOperator, RegularizedOperator
from .preconditioning import NystromPreconditioner
from .utils import (
    Matrix,
    Vector,
    to_finite_block,
    to_finite_vector,
    validate_positive_integer,
    validate_real,
)

logger = logging.getLogger(__name__)

Callback = Callable[[Vector], None]


@unique
class TerminationStatus(str, Enum):
    CONVERGED = 'converged'
    MAX_ITERATIONS = 'max-iterations'

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}.{self._name_}'

    @override
    def __str__(self, /) -> str:
        return self._value_


class DivergenceError(Exception):
    def __init__(
        self, iteration: int, residual_history: Sequence[float], /
    ) -> None:
        super().__init__(
            f'Non-finite values encountered at iteration {iteration!r}.'
        )
        self.iteration = iteration
        self.residual_history = tuple(residual_history)


@dataclass(frozen=True, slots=True)
class SolveReport:
    solution: Vector
    iterations: int
    residual_history: tuple[float, ...]
    status: TerminationStatus
    threshold: float
    relative: bool
    wall_time: float

    @property
    def converged(self, /) -> bool:
        return self.status is TerminationStatus.CONVERGED

    @property
    def matvec_count(self, /) -> int:
        # initial residual plus one per iteration
        return self.iterations + 1


@dataclass(frozen=True, slots=True)
class BlockSolveReport:
    solutions: Matrix
    iterations: int
    residual_histories: tuple[tuple[float, ...], ...]
    converged: tuple[bool, ...]
    deflation_record: tuple[int, ...]
    fallback_count: int
    matvec_count: int
    thresholds: tuple[float, ...]
    wall_time: float

    @property
    def all_converged(self, /) -> bool:
        return all(self.converged)


def cg(
    operator: LinearOperator,
    rhs: ArrayLike,
    /,
    *,
    x0: ArrayLike | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    relative: bool = False,
    callback: Callback | None = None,
) -> SolveReport:
    """Unpreconditioned conjugate gradients on a positive-definite operator.

    Stops once the residual norm drops to ``tolerance``
    (times the norm of ``rhs`` when ``relative`` is set).
    """
    return _conjugate_gradients(
        operator,
        rhs,
        None,
        x0=x0,
        tolerance=tolerance,
        max_iterations=max_iterations,
        relative=relative,
        callback=callback,
    )


def nystrom_pcg(
    operator: LinearOperator,
    rhs: ArrayLike,
    mu: float,
    preconditioner: NystromPreconditioner,
    /,
    *,
    x0: ArrayLike | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    relative: bool = False,
    callback: Callback | None = None,
) -> SolveReport:
    """Solves (A + mu I) x = rhs by left-preconditioned CG."""
    regularized = _regularize_for(operator, mu, preconditioner)
    return _conjugate_gradients(
        regularized,
        rhs,
        preconditioner,
        x0=x0,
        tolerance=tolerance,
        max_iterations=max_iterations,
        relative=relative,
        callback=callback,
    )


def block_nystrom_pcg(
    operator: LinearOperator,
    rhs: ArrayLike,
    mu: float,
    preconditioner: NystromPreconditioner,
    /,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    relative: bool = False,
) -> BlockSolveReport:
    """Block PCG for several right-hand sides sharing one operator.

    The right-hand sides are orthonormalized once, numerically dependent
    columns are deflated and recovered from the triangular factor.
    """
    start = time.perf_counter()
    regularized = _regularize_for(operator, mu, preconditioner)
    block = to_finite_block(
        rhs, dim=regularized.dim, name='Right-hand sides'
    )
    columns_count = block.shape[1]
    if columns_count < 1:
        raise ValueError('At least one right-hand side is required.')
    validate_real(tolerance, name='Tolerance', positive=True)
    validate_positive_integer(max_iterations, name='Iterations limit')
    rhs_norms = np.linalg.norm(block, axis=0)
    thresholds = tolerance * rhs_norms if relative else np.full(
        columns_count, float(tolerance)
    )
    singular_values = linalg.svdvals(block)
    if singular_values[0] == 0.0:
        return BlockSolveReport(
            solutions=np.zeros_like(block),
            iterations=0,
            residual_histories=((0.0,),) * columns_count,
            converged=(True,) * columns_count,
            deflation_record=tuple(range(columns_count)),
            fallback_count=0,
            matvec_count=0,
            thresholds=tuple(thresholds.tolist()),
            wall_time=time.perf_counter() - start,
        )
    rank = int(
        np.count_nonzero(
            singular_values > DEFLATION_THRESHOLD * singular_values[0]
        )
    )
    q, triangular, pivots = linalg.qr(block, mode='economic', pivoting=True)
    basis = q[:, :rank]
    coefficients = np.empty((rank, columns_count))
    coefficients[:, pivots] = triangular[:rank]
    deflated = tuple(sorted(int(index) for index in pivots[rank:]))
    if deflated:
        logger.debug('Deflated right-hand sides %r.', deflated)
    histories: list[list[float]] = [[norm] for norm in rhs_norms.tolist()]
    converged = rhs_norms <= thresholds
    iterate = np.zeros_like(basis)
    residual = basis.copy()
    preconditioned = preconditioner.apply_inverse(residual)
    direction = preconditioned.copy()
    residual_product = residual.T @ preconditioned
    fallback_count = iterations = 0
    while iterations < max_iterations and not converged.all():
        image = regularized.matmat(direction)
        step, fallback = _solve_small(direction.T @ image, residual_product)
        fallback_count += fallback
        iterate += direction @ step
        residual -= image @ step
        iterations += 1
        column_norms = np.linalg.norm(residual @ coefficients, axis=0)
        if not np.all(np.isfinite(column_norms)):
            raise DivergenceError(
                iterations, [max(values) for values in zip(*histories)]
            )
        for history, norm in zip(histories, column_norms.tolist()):
            history.append(norm)
        converged = column_norms <= thresholds
        if converged.all():
            break
        preconditioned = preconditioner.apply_inverse(residual)
        next_product = residual.T @ preconditioned
        conjugation, fallback = _solve_small(residual_product, next_product)
        fallback_count += fallback
        residual_product = next_product
        direction = preconditioned + direction @ conjugation
    if not converged.all():
        logger.info(
            'Block solve stopped after %r iterations '
            'with %r of %r columns converged.',
            iterations,
            int(converged.sum()),
            columns_count,
        )
    return BlockSolveReport(
        solutions=iterate @ coefficients,
        iterations=iterations,
        residual_histories=tuple(map(tuple, histories)),
        converged=tuple(converged.tolist()),
        deflation_record=deflated,
        fallback_count=fallback_count,
        matvec_count=iterations * rank,
        thresholds=tuple(thresholds.tolist()),
        wall_time=time.perf_counter() - start,
    )


def iteration_bound(kappa: float, epsilon: float, /) -> int:
    """Iterations after which the CG error bound drops below epsilon."""
    validate_real(kappa, name='Condition number')
    if kappa < 1:
        raise ValueError(
            f'Condition number should be at least 1, but got {kappa!r}.'
        )
    _validate_accuracy(epsilon)
    if kappa == 1:
        return 1
    root = math.sqrt(kappa)
    return max(
        math.ceil(math.log(2.0 / epsilon) / math.log((root + 1) / (root - 1))),
        1,
    )


def adaptive_iteration_bound(tau: float, epsilon: float, /) -> int:
    """Iteration count guaranteed after error-tolerance rank selection."""
    validate_real(tau, name='Tolerance multiplier', positive=True)
    _validate_accuracy(epsilon)
    root = math.sqrt(1.0 + 12.0 * tau / 11.0)
    rate = (root - 1.0) / (root + 1.0)
    return max(math.ceil(math.log(2.0 / epsilon) / math.log(1.0 / rate)), 1)


def _conjugate_gradients(
    operator: LinearOperator,
    rhs: ArrayLike,
    preconditioner: NystromPreconditioner | None,
    /,
    *,
    x0: ArrayLike | None,
    tolerance: float,
    max_iterations: int,
    relative: bool,
    callback: Callback | None,
) -> SolveReport:
    start = time.perf_counter()
    vector = to_finite_vector(rhs, dim=operator.dim, name='Right-hand side')
    validate_real(tolerance, name='Tolerance', positive=True)
    validate_positive_integer(max_iterations, name='Iterations limit')
    threshold = (
        float(tolerance) * float(np.linalg.norm(vector))
        if relative
        else float(tolerance)
    )
    solution = (
        np.zeros_like(vector)
        if x0 is None
        else np.array(
            to_finite_vector(x0, dim=operator.dim, name='Initial guess')
        )
    )
    residual = vector - operator.matvec(solution)
    history = [float(np.linalg.norm(residual))]
    iterations = 0
    status = TerminationStatus.MAX_ITERATIONS
    if history[-1] <= threshold:
        status = TerminationStatus.CONVERGED
    else:
        preconditioned = (
            residual
            if preconditioner is None
            else preconditioner.apply_inverse(residual)
        )
        direction = preconditioned.copy()
        residual_product = residual @ preconditioned
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            while iterations < max_iterations:
                image = operator.matvec(direction)
                step = residual_product / (direction @ image)
                solution = solution + step * direction
                residual = residual - step * image
                iterations += 1
                history.append(float(np.linalg.norm(residual)))
                if not (np.isfinite(step) and np.isfinite(history[-1])):
                    raise DivergenceError(iterations, history)
                if callback is not None:
                    callback(solution)
                if history[-1] <= threshold:
                    status = TerminationStatus.CONVERGED
                    break
                preconditioned = (
                    residual
                    if preconditioner is None
                    else preconditioner.apply_inverse(residual)
                )
                next_product = residual @ preconditioned
                conjugation = next_product / residual_product
                if not np.isfinite(conjugation):
                    raise DivergenceError(iterations, history)
                residual_product = next_product
                direction = preconditioned + conjugation * direction
    if status is TerminationStatus.MAX_ITERATIONS:
        logger.info(
            'Stopped after %r iterations with residual norm %r '
            'above threshold %r.',
            iterations,
            history[-1],
            threshold,
        )
    return SolveReport(
        solution=solution,
        iterations=iterations,
        residual_history=tuple(history),
        status=status,
        threshold=threshold,
        relative=relative,
        wall_time=time.perf_counter() - start,
    )


def _regularize_for(
    operator: LinearOperator,
    mu: float,
    preconditioner: NystromPreconditioner,
    /,
) -> RegularizedOperator:
    if not isinstance(preconditioner, NystromPreconditioner):
        raise TypeError(type(preconditioner))
    validate_real(mu, name='Regularization parameter', positive=True)
    if not math.isclose(preconditioner.mu, mu, rel_tol=1e-12):
        raise ValueError(
            f'Preconditioner is built for mu={preconditioner.mu!r}, '
            f'but the system uses mu={mu!r}.'
        )
    if preconditioner.dim != operator.dim:
        raise ValueError(
            f'Preconditioner dimension {preconditioner.dim!r} does not match '
            f'operator dimension {operator.dim!r}.'
        )
    return RegularizedOperator(operator, mu)


def _solve_small(matrix: Matrix, rhs: Matrix, /) -> tuple[Matrix, int]:
    symmetric = (matrix + matrix.T) / 2.0
    with warnings.catch_warnings():
        warnings.simplefilter('error', linalg.LinAlgWarning)
        try:
            return linalg.solve(symmetric, rhs, assume_a='sym'), 0
        except (linalg.LinAlgError, linalg.LinAlgWarning):
            pass
    size = symmetric.shape[0]
    # pseudo-inverse with a cutoff ten times the default one
    cutoff = 10.0 * size * np.finfo(np.float64).eps
    logger.debug('Falling back to pseudo-inverse in block step.')
    return linalg.pinvh(symmetric, rtol=cutoff) @ rhs, 1


def _validate_accuracy(epsilon: float, /) -> None:
    validate_real(epsilon, name='Accuracy')
    if not (0 < epsilon < 1):
        raise ValueError(
            f'Accuracy should lie in (0, 1), but got {epsilon!r}.'
        )
