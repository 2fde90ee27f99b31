from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from enum import Enum, unique
from typing import final

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg
from typing_extensions import Self, override

from .constants import CHOLESKY_RETRIES, DENSE_ORACLE_CAP, SHIFT_ESCALATION
from .operators import LinearOperator, require_column_access
from .spectrum import SpectrumProfile
from .utils import (
    Matrix,
    RandomSource,
    Vector,
    freeze,
    scale_rows,
    to_finite_matrix,
    to_generator,
    validate_positive_integer,
)

logger = logging.getLogger(__name__)


class NystromConstructionError(Exception):
    def __init__(
        self, shifts: Sequence[float], min_core_eigenvalue: float, /
    ) -> None:
        super().__init__(
            'Cholesky factorization of the shifted core matrix failed '
            f'for every shift in {list(shifts)!r}, '
            f'smallest core eigenvalue is {min_core_eigenvalue!r}.'
        )
        self.shifts = tuple(shifts)
        self.min_core_eigenvalue = min_core_eigenvalue


@final
class NystromApproximation:
    """Factored low-rank approximation U diag(eigenvalues) U^T."""

    @property
    def dim(self, /) -> int:
        return self._u.shape[0]

    @property
    def eigenvalues(self, /) -> Vector:
        return self._eigenvalues

    @property
    def lambda_ell(self, /) -> float:
        """Smallest retained eigenvalue, zero for the empty approximation."""
        return float(self._eigenvalues[-1]) if self.rank > 0 else 0.0

    @property
    def rank(self, /) -> int:
        return self._u.shape[1]

    @property
    def shift_used(self, /) -> float:
        return self._shift_used

    @property
    def u(self, /) -> Matrix:
        return self._u

    def apply(self, vector: ArrayLike, /) -> Vector:
        """Applies U diag(eigenvalues) U^T to a vector or an n x k block."""
        values = np.asarray(vector, dtype=np.float64)
        return self._u @ scale_rows(self._eigenvalues, self._u.T @ values)

    def error_operator(self, operator: LinearOperator, /) -> LinearOperator:
        """Matvec access to the residual A - U diag(eigenvalues) U^T."""
        if operator.dim != self.dim:
            raise ValueError(
                f'Operator dimension {operator.dim!r} does not match '
                f'approximation dimension {self.dim!r}.'
            )
        return _ApproximationError(operator, self)

    def to_dense(self, /) -> Matrix:
        return (self._u * self._eigenvalues) @ self._u.T

    _eigenvalues: Vector
    _shift_used: float
    _u: Matrix

    __slots__ = '_eigenvalues', '_shift_used', '_u'

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {NystromApproximation.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(
        cls, u: ArrayLike, eigenvalues: ArrayLike, /, *, shift_used: float
    ) -> Self:
        u_matrix = np.array(u, dtype=np.float64)
        eigenvalues_vector = np.array(eigenvalues, dtype=np.float64)
        if u_matrix.ndim != 2:
            raise ValueError(
                f'Factor should be two-dimensional, '
                f'but got shape {u_matrix.shape!r}.'
            )
        if eigenvalues_vector.shape != (u_matrix.shape[1],):
            raise ValueError(
                'Eigenvalues count should match factor columns count, '
                f'but got {eigenvalues_vector.shape!r} '
                f'for factor of shape {u_matrix.shape!r}.'
            )
        if np.any(eigenvalues_vector < 0):
            raise ValueError(
                'Eigenvalues should be nonnegative, '
                f'but got {eigenvalues_vector!r}.'
            )
        if np.any(np.diff(eigenvalues_vector) > 0):
            raise ValueError(
                'Eigenvalues should be nonincreasing, '
                f'but got {eigenvalues_vector!r}.'
            )
        if shift_used < 0:
            raise ValueError(shift_used)
        self = super().__new__(cls)
        self._eigenvalues, self._shift_used, self._u = (
            freeze(eigenvalues_vector),
            float(shift_used),
            freeze(u_matrix),
        )
        return self

    @override
    def __repr__(self, /) -> str:
        return (
            f'{type(self).__qualname__}'
            f'(<{self.dim}x{self.rank}>, {self._eigenvalues.tolist()!r}, '
            f'shift_used={self._shift_used!r})'
        )


@unique
class SketchKind(str, Enum):
    COLUMN = 'column'
    GAUSSIAN = 'gaussian'

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}.{self._name_}'

    @override
    def __str__(self, /) -> str:
        return self._value_


@final
class SketchPair:
    """Orthonormal test matrix together with its sketch Y = A @ Omega."""

    @property
    def dim(self, /) -> int:
        return self._test_matrix.shape[0]

    @property
    def indices(self, /) -> tuple[int, ...] | None:
        return self._indices

    @property
    def kind(self, /) -> SketchKind:
        return self._kind

    @property
    def size(self, /) -> int:
        return self._test_matrix.shape[1]

    @property
    def sketch(self, /) -> Matrix:
        return self._sketch

    @property
    def test_matrix(self, /) -> Matrix:
        return self._test_matrix

    def to_approximation(self, /) -> NystromApproximation:
        return stable_nystrom(self._test_matrix, self._sketch)

    _indices: tuple[int, ...] | None
    _kind: SketchKind
    _sketch: Matrix
    _test_matrix: Matrix

    __slots__ = '_indices', '_kind', '_sketch', '_test_matrix'

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {SketchPair.__qualname__!r} is not an acceptable base type'
        )

    def __new__(
        cls,
        test_matrix: ArrayLike,
        sketch: ArrayLike,
        /,
        *,
        kind: SketchKind = SketchKind.GAUSSIAN,
        indices: Sequence[int] | None = None,
    ) -> Self:
        test = to_finite_matrix(test_matrix, name='Test matrix')
        sketched = to_finite_matrix(sketch, name='Sketch')
        if test.shape != sketched.shape:
            raise ValueError(
                'Test matrix and sketch should have equal shapes, '
                f'but got {test.shape!r} and {sketched.shape!r}.'
            )
        kind = SketchKind(kind)
        if (kind is SketchKind.COLUMN) is (indices is None):
            raise ValueError(
                'Indices should be given exactly for column sketches.'
            )
        self = super().__new__(cls)
        self._indices = None if indices is None else tuple(map(int, indices))
        self._kind, self._sketch, self._test_matrix = (
            kind,
            freeze(sketched),
            freeze(test),
        )
        return self

    @override
    def __repr__(self, /) -> str:
        return (
            f'{type(self).__qualname__}'
            f'(<{self.dim}x{self.size}>, kind={self._kind!r})'
        )


def stable_nystrom(
    test_matrix: Matrix, sketch: Matrix, /
) -> NystromApproximation:
    """Shifted Cholesky pipeline turning a sketch into (U, eigenvalues)."""
    size = test_matrix.shape[1]
    sketch_norm = linalg.norm(sketch, 'fro')
    if size == 0 or sketch_norm == 0.0:
        return NystromApproximation(
            test_matrix, np.zeros(size), shift_used=0.0
        )
    shift = float(np.spacing(sketch_norm))
    shifts_tried = []
    for _ in range(CHOLESKY_RETRIES + 1):
        shifts_tried.append(shift)
        shifted_sketch = sketch + shift * test_matrix
        core = test_matrix.T @ shifted_sketch
        core = (core + core.T) / 2.0
        try:
            factor = linalg.cholesky(core, lower=False)
        except linalg.LinAlgError:
            logger.warning(
                'Cholesky factorization failed with shift %r, '
                'escalating by %r.',
                shift,
                SHIFT_ESCALATION,
            )
            shift *= SHIFT_ESCALATION
        else:
            break
    else:
        raise NystromConstructionError(
            shifts_tried, float(linalg.eigvalsh(core)[0])
        )
    b = linalg.solve_triangular(
        factor, shifted_sketch.T, trans='T', lower=False
    ).T
    u, singular_values, _ = linalg.svd(b, full_matrices=False)
    eigenvalues = np.maximum(singular_values**2 - shift, 0.0)
    order = np.argsort(-eigenvalues, kind='stable')
    return NystromApproximation(
        u[:, order], eigenvalues[order], shift_used=shift
    )


def gaussian_sketch(
    operator: LinearOperator, ell: int, rng: RandomSource, /
) -> SketchPair:
    _validate_sketch_size(ell, dim=operator.dim)
    test_matrix = _orthonormal_gaussian(
        operator.dim, ell, to_generator(rng), basis=None
    )
    return SketchPair(
        test_matrix, operator.matmat(test_matrix), kind=SketchKind.GAUSSIAN
    )


def column_sketch(
    operator: LinearOperator,
    ell: int,
    rng: RandomSource,
    /,
    *,
    indices: Sequence[int] | None = None,
) -> SketchPair:
    """Sketch with a test matrix of distinct standard basis vectors.

    Indices are sampled uniformly without replacement unless given.
    """
    accessible = require_column_access(operator)
    _validate_sketch_size(ell, dim=operator.dim)
    if indices is None:
        indices = to_generator(rng).choice(
            operator.dim, size=ell, replace=False
        ).tolist()
    elif len(indices) != ell or len(set(indices)) != ell:
        raise ValueError(
            f'Expected {ell!r} distinct indices, but got {indices!r}.'
        )
    return SketchPair(
        _basis_columns(operator.dim, indices),
        accessible.columns(indices),
        kind=SketchKind.COLUMN,
        indices=indices,
    )


def extend_sketch(
    pair: SketchPair,
    operator: LinearOperator,
    extra: int,
    rng: RandomSource,
    /,
) -> SketchPair:
    """Appends ``extra`` fresh test columns and their matvecs."""
    validate_positive_integer(extra, name='Extra columns count')
    if operator.dim != pair.dim:
        raise ValueError(
            f'Operator dimension {operator.dim!r} does not match '
            f'sketch dimension {pair.dim!r}.'
        )
    _validate_sketch_size(pair.size + extra, dim=pair.dim)
    generator = to_generator(rng)
    if pair.kind is SketchKind.COLUMN:
        assert pair.indices is not None, pair
        available = np.setdiff1d(np.arange(pair.dim), pair.indices)
        new_indices = generator.choice(
            available, size=extra, replace=False
        ).tolist()
        new_test_matrix = _basis_columns(pair.dim, new_indices)
        new_sketch = require_column_access(operator).columns(new_indices)
        indices: list[int] | None = [*pair.indices, *new_indices]
    else:
        new_test_matrix = _orthonormal_gaussian(
            pair.dim, extra, generator, basis=pair.test_matrix
        )
        new_sketch = operator.matmat(new_test_matrix)
        indices = None
    return SketchPair(
        np.hstack([pair.test_matrix, new_test_matrix]),
        np.hstack([pair.sketch, new_sketch]),
        kind=pair.kind,
        indices=indices,
    )


def randomized_nystrom(
    operator: LinearOperator, ell: int, rng: RandomSource, /
) -> NystromApproximation:
    return gaussian_sketch(operator, ell, rng).to_approximation()


def column_sampling_nystrom(
    operator: LinearOperator,
    ell: int,
    rng: RandomSource,
    /,
    *,
    indices: Sequence[int] | None = None,
) -> NystromApproximation:
    return column_sketch(
        operator, ell, rng, indices=indices
    ).to_approximation()


def nystrom_definitional(
    matrix: ArrayLike, test_matrix: ArrayLike, /
) -> Matrix:
    """Evaluates (A X) (X^T A X)^+ (A X)^T densely."""
    dense = to_finite_matrix(matrix, name='Matrix')
    test = to_finite_matrix(test_matrix, name='Test matrix')
    if dense.shape[0] > DENSE_ORACLE_CAP:
        raise ValueError(
            f'Dense oracle is limited to dimension {DENSE_ORACLE_CAP!r}, '
            f'but got {dense.shape[0]!r}.'
        )
    if dense.shape[1] != test.shape[0]:
        raise ValueError((dense.shape, test.shape))
    sketch = dense @ test
    core = test.T @ sketch
    result = sketch @ linalg.pinvh((core + core.T) / 2.0) @ sketch.T
    return (result + result.T) / 2.0


@unique
class ErrorBoundForm(str, Enum):
    GENERAL = 'general'
    TAIL = 'tail'

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}.{self._name_}'


def expected_error_bound(
    profile: SpectrumProfile,
    ell: int,
    p: int,
    /,
    *,
    form: ErrorBoundForm = ErrorBoundForm.GENERAL,
) -> float:
    """Upper bound on the expected spectral error of a rank-ell sketch.

    The general form needs 2 <= p <= ell - 2, the tail form needs
    ell = 2p - 1 and is stated through the p-stable rank.
    """
    validate_positive_integer(ell, name='Sketch size')
    validate_positive_integer(p, name='Oversampling index')
    eigenvalues = profile.eigenvalues
    form = ErrorBoundForm(form)
    if form is ErrorBoundForm.TAIL:
        if p < 2 or ell != 2 * p - 1 or p > profile.dim:
            raise ValueError(
                'Tail form requires p >= 2, ell = 2p - 1 and p <= dim, '
                f'but got ell={ell!r}, p={p!r}, dim={profile.dim!r}.'
            )
        # sr_p * lambda_p = sum_{j >= p} lambda_j, so lambda_p = 0 is fine
        return 3.0 * eigenvalues[p - 1] + (
            4.0 * math.e**2 / p
        ) * float(eigenvalues[p - 1 :].sum())
    if not (2 <= p <= ell - 2) or ell - p + 1 > profile.dim:
        raise ValueError(
            'General form requires 2 <= p <= ell - 2 and ell - p < dim, '
            f'but got ell={ell!r}, p={p!r}, dim={profile.dim!r}.'
        )
    head = ell - p
    return (1.0 + 2.0 * head / (p - 1)) * float(eigenvalues[head]) + (
        2.0 * math.e**2 * ell / (p**2 - 1)
    ) * float(eigenvalues[head:].sum())


def _basis_columns(dim: int, indices: Sequence[int], /) -> Matrix:
    result = np.zeros((dim, len(indices)))
    result[np.asarray(indices, dtype=np.intp), np.arange(len(indices))] = 1.0
    return result


def _orthonormal_gaussian(
    dim: int,
    size: int,
    generator: np.random.Generator,
    /,
    *,
    basis: Matrix | None,
) -> Matrix:
    # column-major draws so that consecutive extensions replay a single draw
    gaussian = generator.standard_normal((size, dim)).T
    if basis is not None and basis.shape[1] > 0:
        for _ in range(2):
            gaussian = gaussian - basis @ (basis.T @ gaussian)
    q, _ = linalg.qr(gaussian, mode='economic')
    return q


def _validate_sketch_size(ell: int, /, *, dim: int) -> None:
    validate_positive_integer(ell, name='Sketch size')
    if ell > dim:
        raise ValueError(
            f'Sketch size should not exceed dimension {dim!r}, '
            f'but got {ell!r}.'
        )


@final
class _ApproximationError(LinearOperator):
    @property
    def dim(self, /) -> int:
        return self._operator.dim

    _approximation: NystromApproximation
    _operator: LinearOperator

    __slots__ = '_approximation', '_operator'

    def __new__(
        cls, operator: LinearOperator, approximation: NystromApproximation, /
    ) -> Self:
        self = super().__new__(cls)
        self._approximation, self._operator = approximation, operator
        return self

    @override
    def __repr__(self, /) -> str:
        return (
            f'{type(self).__qualname__}'
            f'({self._operator!r}, {self._approximation!r})'
        )

    @override
    def _apply(self, vector: Vector, /) -> Vector:
        return self._operator.matvec(vector) - self._approximation.apply(
            vector
        )

    @override
    def _apply_block(self, block: Matrix, /) -> Matrix:
        return self._operator.matmat(block) - self._approximation.apply(block)
