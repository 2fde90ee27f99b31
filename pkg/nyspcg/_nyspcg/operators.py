from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Sequence
from enum import Enum, unique
from typing import Any, ClassVar, TypeGuard, final

import numpy as np
from numpy.typing import ArrayLike
from scipy import sparse
from scipy.spatial.distance import cdist
from typing_extensions import Self, override

from .constants import (
    DENSE_ORACLE_CAP,
    KERNEL_DENSE_CAP,
    KERNEL_MATVEC_BLOCK_SIZE,
)
from .utils import (
    Matrix,
    Vector,
    freeze,
    to_finite_block,
    to_finite_matrix,
    to_finite_vector,
    validate_positive_integer,
    validate_real,
)


class UnsupportedCapabilityError(Exception):
    pass


class LinearOperator(ABC):
    """Symmetric positive-semidefinite matrix accessed through matvecs."""

    @property
    @abstractmethod
    def dim(self, /) -> int:
        raise NotImplementedError

    def matvec(self, vector: ArrayLike, /) -> Vector:
        return self._apply(
            to_finite_vector(vector, dim=self.dim, name='Vector')
        )

    def matmat(self, block: ArrayLike, /) -> Matrix:
        return self._apply_block(
            to_finite_block(block, dim=self.dim, name='Block')
        )

    def to_dense(self, /) -> Matrix:
        return self._apply_block(np.eye(self.dim))

    __slots__ = ()

    @abstractmethod
    def _apply(self, vector: Vector, /) -> Vector:
        raise NotImplementedError

    def _apply_block(self, block: Matrix, /) -> Matrix:
        result = np.empty_like(block)
        for index in range(block.shape[1]):
            result[:, index] = self._apply(block[:, index])
        return result


class ColumnAccessible(ABC):
    """Capability of operators whose columns can be read directly."""

    @property
    @abstractmethod
    def dim(self, /) -> int:
        raise NotImplementedError

    def column(self, index: int, /) -> Vector:
        self._validate_index(index)
        return self._column(index)

    def columns(self, indices: Sequence[int], /) -> Matrix:
        for index in indices:
            self._validate_index(index)
        if len(indices) == 0:
            return np.empty((self.dim, 0))
        return self._columns(np.asarray(indices, dtype=np.intp))

    __slots__ = ()

    @abstractmethod
    def _column(self, index: int, /) -> Vector:
        raise NotImplementedError

    def _columns(self, indices: Any, /) -> Matrix:
        return np.column_stack([self._column(index) for index in indices])

    def _validate_index(self, index: int, /) -> None:
        if not isinstance(index, int | np.integer):
            raise TypeError(type(index))
        if not (0 <= index < self.dim):
            raise ValueError(
                f'Column index should be in range(0, {self.dim!r}), '
                f'but got {index!r}.'
            )


def has_column_access(
    operator: LinearOperator, /
) -> TypeGuard[ColumnAccessible]:
    return isinstance(operator, ColumnAccessible)


def require_column_access(operator: LinearOperator, /) -> ColumnAccessible:
    if not has_column_access(operator):
        raise UnsupportedCapabilityError(
            f'{type(operator).__qualname__} does not expose column access.'
        )
    return operator


@final
class DenseOperator(LinearOperator, ColumnAccessible):
    @property
    @override
    def dim(self, /) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self, /) -> Matrix:
        return self._matrix

    @override
    def to_dense(self, /) -> Matrix:
        return self._matrix.copy()

    _matrix: Matrix

    __slots__ = ('_matrix',)

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {DenseOperator.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(cls, matrix: ArrayLike, /) -> Self:
        dense = to_finite_matrix(matrix, name='Matrix')
        if dense.shape[0] != dense.shape[1] or dense.shape[0] < 1:
            raise ValueError(
                f'Matrix should be square and non-empty, '
                f'but got shape {dense.shape!r}.'
            )
        self = super().__new__(cls)
        self._matrix = freeze(dense)
        return self

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}(<{self.dim}x{self.dim}>)'

    @override
    def _apply(self, vector: Vector, /) -> Vector:
        return self._matrix @ vector

    @override
    def _apply_block(self, block: Matrix, /) -> Matrix:
        return self._matrix @ block

    @override
    def _column(self, index: int, /) -> Vector:
        return self._matrix[:, index].copy()

    @override
    def _columns(self, indices: Any, /) -> Matrix:
        return self._matrix[:, indices]


@final
class SparseOperator(LinearOperator, ColumnAccessible):
    """Coordinate-list matrix stored in compressed sparse row form."""

    @property
    @override
    def dim(self, /) -> int:
        return self._matrix.shape[0]

    @override
    def to_dense(self, /) -> Matrix:
        return self._matrix.toarray()

    _matrix: sparse.csr_matrix

    __slots__ = ('_matrix',)

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {SparseOperator.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(cls, matrix: Any, /) -> Self:
        if not sparse.issparse(matrix):
            raise TypeError(type(matrix))
        compressed = sparse.csr_matrix(matrix, dtype=np.float64)
        if (
            compressed.shape[0] != compressed.shape[1]
            or compressed.shape[0] < 1
        ):
            raise ValueError(
                f'Matrix should be square and non-empty, '
                f'but got shape {compressed.shape!r}.'
            )
        if not np.all(np.isfinite(compressed.data)):
            raise ValueError('Matrix should have finite entries only.')
        self = super().__new__(cls)
        self._matrix = compressed
        return self

    @override
    def __repr__(self, /) -> str:
        return (
            f'{type(self).__qualname__}'
            f'(<{self.dim}x{self.dim}, nnz={self._matrix.nnz}>)'
        )

    @override
    def _apply(self, vector: Vector, /) -> Vector:
        return np.asarray(self._matrix @ vector, dtype=np.float64)

    @override
    def _apply_block(self, block: Matrix, /) -> Matrix:
        return np.asarray(self._matrix @ block, dtype=np.float64)

    @override
    def _column(self, index: int, /) -> Vector:
        return self._matrix[:, [index]].toarray().ravel()


@final
class IdentityOperator(LinearOperator, ColumnAccessible):
    @property
    @override
    def dim(self, /) -> int:
        return self._dim

    _dim: int

    __slots__ = ('_dim',)

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {IdentityOperator.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(cls, dim: int, /) -> Self:
        validate_positive_integer(dim, name='Dimension')
        self = super().__new__(cls)
        self._dim = int(dim)
        return self

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}({self._dim!r})'

    @override
    def _apply(self, vector: Vector, /) -> Vector:
        return vector.copy()

    @override
    def _apply_block(self, block: Matrix, /) -> Matrix:
        return block.copy()

    @override
    def _column(self, index: int, /) -> Vector:
        result = np.zeros(self._dim)
        result[index] = 1.0
        return result


@final
class RegularizedOperator(LinearOperator):
    @property
    def base(self, /) -> LinearOperator:
        return self._base

    @property
    @override
    def dim(self, /) -> int:
        return self._base.dim

    @property
    def mu(self, /) -> float:
        return self._mu

    _base: LinearOperator
    _mu: float

    __slots__ = '_base', '_mu'

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {RegularizedOperator.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(cls, base: LinearOperator, mu: float, /) -> Self:
        if not isinstance(base, LinearOperator):
            raise TypeError(type(base))
        validate_real(mu, name='Regularization parameter', nonnegative=True)
        self = super().__new__(cls)
        self._base, self._mu = base, float(mu)
        return self

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}({self._base!r}, {self._mu!r})'

    @override
    def _apply(self, vector: Vector, /) -> Vector:
        return self._base._apply(vector) + self._mu * vector

    @override
    def _apply_block(self, block: Matrix, /) -> Matrix:
        return self._base._apply_block(block) + self._mu * block


@final
class GramRidgeOperator(LinearOperator):
    """Applies v -> (1/n_rows) * G^T (G v) without forming G^T G."""

    @property
    def design(self, /) -> Matrix:
        return self._design

    @property
    @override
    def dim(self, /) -> int:
        return self._design.shape[1]

    _design: Matrix

    __slots__ = ('_design',)

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {GramRidgeOperator.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(cls, design: ArrayLike, /) -> Self:
        matrix = to_finite_matrix(design, name='Design matrix')
        if matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ValueError(
                f'Design matrix should be non-empty, '
                f'but got shape {matrix.shape!r}.'
            )
        self = super().__new__(cls)
        self._design = freeze(matrix)
        return self

    @override
    def __repr__(self, /) -> str:
        rows_count, columns_count = self._design.shape
        return f'{type(self).__qualname__}(<{rows_count}x{columns_count}>)'

    @override
    def _apply(self, vector: Vector, /) -> Vector:
        return (self._design.T @ (self._design @ vector)) / (
            self._design.shape[0]
        )

    @override
    def _apply_block(self, block: Matrix, /) -> Matrix:
        return (self._design.T @ (self._design @ block)) / (
            self._design.shape[0]
        )


@final
class KernelOperator(LinearOperator, ColumnAccessible):
    """Gaussian kernel matrix K_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)).

    The matrix is stored densely up to ``dense_cap`` points, beyond that
    matvecs are computed block-wise from the stored points.
    """

    DEFAULT_DENSE_CAP: ClassVar[int] = KERNEL_DENSE_CAP

    @property
    def bandwidth(self, /) -> float:
        return self._bandwidth

    @property
    @override
    def dim(self, /) -> int:
        return self._points.shape[0]

    @property
    def is_dense(self, /) -> bool:
        return self._matrix is not None

    @property
    def points(self, /) -> Matrix:
        return self._points

    @override
    def to_dense(self, /) -> Matrix:
        if self._matrix is not None:
            return self._matrix.copy()
        return self._kernel_rows(self._points)

    _bandwidth: float
    _matrix: Matrix | None
    _points: Matrix

    __slots__ = '_bandwidth', '_matrix', '_points'

    def __init_subclass__(cls, /) -> None:
        raise TypeError(
            f'type {KernelOperator.__qualname__!r} '
            'is not an acceptable base type'
        )

    def __new__(
        cls,
        points: ArrayLike,
        bandwidth: float,
        /,
        *,
        dense_cap: int = DEFAULT_DENSE_CAP,
    ) -> Self:
        validate_real(bandwidth, name='Bandwidth', positive=True)
        validate_positive_integer(dense_cap, name='Dense cap')
        points_matrix = np.array(points, dtype=np.float64)
        if points_matrix.ndim == 1:
            points_matrix = points_matrix[:, np.newaxis]
        points_matrix = to_finite_matrix(points_matrix, name='Points')
        if points_matrix.shape[0] < 1:
            raise ValueError('At least one point expected.')
        self = super().__new__(cls)
        self._bandwidth, self._points = float(bandwidth), freeze(points_matrix)
        self._matrix = (
            freeze(self._kernel_rows(points_matrix))
            if points_matrix.shape[0] <= dense_cap
            else None
        )
        return self

    @override
    def __repr__(self, /) -> str:
        return (
            f'{type(self).__qualname__}'
            f'(<{self.dim} points>, {self._bandwidth!r})'
        )

    @override
    def _apply(self, vector: Vector, /) -> Vector:
        if self._matrix is not None:
            return self._matrix @ vector
        return self._apply_block(vector[:, np.newaxis])[:, 0]

    @override
    def _apply_block(self, block: Matrix, /) -> Matrix:
        if self._matrix is not None:
            return self._matrix @ block
        result = np.empty_like(block)
        for start in range(0, self.dim, KERNEL_MATVEC_BLOCK_SIZE):
            stop = min(start + KERNEL_MATVEC_BLOCK_SIZE, self.dim)
            result[start:stop] = (
                self._kernel_rows(self._points[start:stop]) @ block
            )
        return result

    @override
    def _column(self, index: int, /) -> Vector:
        if self._matrix is not None:
            return self._matrix[:, index].copy()
        return self._kernel_rows(self._points[[index]])[0]

    @override
    def _columns(self, indices: Any, /) -> Matrix:
        if self._matrix is not None:
            return self._matrix[:, indices]
        return self._kernel_rows(self._points[indices]).T

    def _kernel_rows(self, rows_points: Matrix, /) -> Matrix:
        squared_distances = cdist(rows_points, self._points, 'sqeuclidean')
        return np.exp(-squared_distances / (2.0 * self._bandwidth**2))


@unique
class RegularizerConvention(str, Enum):
    MU = 'mu'
    N_MU = 'n-mu'

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}.{self._name_}'

    @override
    def __str__(self, /) -> str:
        return self._value_


def krr_shift(
    points_count: int, mu: float, convention: RegularizerConvention, /
) -> float:
    """Returns the literal shift the solver receives for a kernel problem."""
    validate_positive_integer(points_count, name='Points count')
    validate_real(mu, name='Regularization parameter', nonnegative=True)
    convention = RegularizerConvention(convention)
    return (
        points_count * float(mu)
        if convention is RegularizerConvention.N_MU
        else float(mu)
    )


def as_operator(matrix: Any, /) -> LinearOperator:
    if isinstance(matrix, LinearOperator):
        return matrix
    if sparse.issparse(matrix):
        return SparseOperator(matrix)
    return DenseOperator(matrix)


def matvec(operator: LinearOperator, vector: ArrayLike, /) -> Vector:
    return operator.matvec(vector)


def regularize(operator: LinearOperator, mu: float, /) -> RegularizedOperator:
    return RegularizedOperator(operator, mu)


def gram_ridge(design: ArrayLike, /) -> GramRidgeOperator:
    return GramRidgeOperator(design)


def gaussian_kernel(
    points: ArrayLike,
    sigma: float,
    /,
    *,
    dense_cap: int = KernelOperator.DEFAULT_DENSE_CAP,
) -> KernelOperator:
    return KernelOperator(points, sigma, dense_cap=dense_cap)


def to_dense_oracle(matrix: Any, /) -> Matrix:
    """Symmetrized dense copy of a matrix small enough for oracles."""
    operator = as_operator(matrix)
    if operator.dim > DENSE_ORACLE_CAP:
        raise ValueError(
            f'Dense oracle is limited to dimension {DENSE_ORACLE_CAP!r}, '
            f'but got {operator.dim!r}.'
        )
    dense = operator.to_dense()
    return (dense + dense.T) / 2.0
