import math

import numpy as np
import pytest
from hypothesis import given
from scipy import sparse

from nyspcg.operators import (
    DenseOperator,
    GramRidgeOperator,
    IdentityOperator,
    KernelOperator,
    LinearOperator,
    RegularizedOperator,
    RegularizerConvention,
    SparseOperator,
    UnsupportedCapabilityError,
    as_operator,
    gaussian_kernel,
    gram_ridge,
    has_column_access,
    krr_shift,
    matvec,
    regularize,
    require_column_access,
    to_dense_oracle,
)

from tests.strategies import psd_problem_strategy, seed_strategy


def test_identity_matvec() -> None:
    result = IdentityOperator(3).matvec(np.array([1.0, 2.0, 3.0]))

    assert np.array_equal(result, [1.0, 2.0, 3.0])


def test_zero_matvec() -> None:
    operator = DenseOperator(np.zeros((2, 2)))

    assert np.array_equal(operator.matvec(np.array([5.0, -1.0])), [0.0, 0.0])


def test_dense_matvec() -> None:
    operator = DenseOperator([[2.0, 1.0], [1.0, 2.0]])

    assert np.array_equal(operator.matvec(np.array([1.0, 0.0])), [2.0, 1.0])


def test_regularized_matvec() -> None:
    zero_shifted = RegularizedOperator(DenseOperator(np.zeros((2, 2))), 1.0)
    diagonal_shifted = RegularizedOperator(
        DenseOperator(np.diag([2.0, 1.0])), 0.5
    )

    assert np.array_equal(zero_shifted.matvec([3.0, 4.0]), [3.0, 4.0])
    assert np.array_equal(diagonal_shifted.matvec([1.0, 1.0]), [2.5, 1.5])


@given(psd_problem_strategy, seed_strategy)
def test_unshifted_regularization(
    problem: tuple[object, DenseOperator, int], seed: int
) -> None:
    _, operator, _ = problem
    vector = np.random.default_rng(seed).standard_normal(operator.dim)

    result = RegularizedOperator(operator, 0.0).matvec(vector)

    assert np.array_equal(result, operator.matvec(vector))


@given(psd_problem_strategy, seed_strategy)
def test_symmetry_and_semidefiniteness(
    problem: tuple[object, DenseOperator, int], seed: int
) -> None:
    _, operator, _ = problem
    generator = np.random.default_rng(seed)
    left, right = generator.standard_normal((2, operator.dim))
    scale = np.linalg.norm(operator.matrix, 2)

    asymmetry = left @ operator.matvec(right) - operator.matvec(left) @ right

    assert abs(asymmetry) <= (
        1e-10 * np.linalg.norm(left) * np.linalg.norm(right) * scale
    )
    assert left @ operator.matvec(left) >= -1e-10 * (left @ left) * scale


@given(psd_problem_strategy, seed_strategy)
def test_matvec_determinism(
    problem: tuple[object, DenseOperator, int], seed: int
) -> None:
    _, operator, _ = problem
    vector = np.random.default_rng(seed).standard_normal(operator.dim)

    assert np.array_equal(operator.matvec(vector), operator.matvec(vector))


def test_gram_ridge_matvec() -> None:
    assert np.array_equal(
        GramRidgeOperator(np.eye(2)).matvec([2.0, 4.0]), [1.0, 2.0]
    )
    assert np.array_equal(
        GramRidgeOperator([[1.0, 0.0], [0.0, 2.0]]).matvec([1.0, 1.0]),
        [0.5, 2.0],
    )


def test_gram_ridge_dense_agreement(generator: np.random.Generator) -> None:
    design = generator.standard_normal((6, 3))
    vector = generator.standard_normal(3)

    result = GramRidgeOperator(design).matvec(vector)

    assert np.allclose(
        result, design.T @ design @ vector / 6, rtol=0.0, atol=1e-12
    )


def test_gram_ridge_has_no_column_access() -> None:
    operator = GramRidgeOperator(np.eye(3))

    assert not has_column_access(operator)
    with pytest.raises(UnsupportedCapabilityError):
        require_column_access(operator)


def test_kernel_entries() -> None:
    duplicated = KernelOperator([[1.0, 2.0], [1.0, 2.0]], 1.0)
    separated = KernelOperator([0.0, 2.0], 1.0)

    assert np.array_equal(duplicated.to_dense(), np.ones((2, 2)))
    assert math.isclose(
        separated.column(1)[0], math.exp(-2.0), rel_tol=1e-12
    )


def test_kernel_unit_diagonal(generator: np.random.Generator) -> None:
    operator = KernelOperator(generator.standard_normal((15, 3)), 0.7)

    assert np.allclose(np.diag(operator.to_dense()), 1.0, rtol=0, atol=0)


def test_kernel_blockwise_matvec(generator: np.random.Generator) -> None:
    points = generator.standard_normal((40, 2))
    block = generator.standard_normal((40, 3))
    dense = KernelOperator(points, 1.5)
    blockwise = KernelOperator(points, 1.5, dense_cap=1)

    assert dense.is_dense
    assert not blockwise.is_dense
    assert np.allclose(
        blockwise.matmat(block), dense.matmat(block), rtol=0, atol=1e-12
    )
    assert np.allclose(
        blockwise.columns([3, 7]),
        dense.to_dense()[:, [3, 7]],
        rtol=0,
        atol=1e-12,
    )


def test_sparse_operator(generator: np.random.Generator) -> None:
    dense = np.diag([3.0, 2.0, 1.0])
    dense[0, 2] = dense[2, 0] = 0.5
    operator = as_operator(sparse.coo_matrix(dense))
    vector = generator.standard_normal(3)

    assert isinstance(operator, SparseOperator)
    assert np.allclose(operator.matvec(vector), dense @ vector)
    assert np.array_equal(operator.column(2), dense[:, 2])


def test_krr_shift() -> None:
    assert math.isclose(
        krr_shift(100, 1e-3, RegularizerConvention.N_MU), 0.1
    )
    assert krr_shift(100, 1e-3, RegularizerConvention.MU) == 1e-3


def test_dense_operator_validation() -> None:
    with pytest.raises(ValueError):
        DenseOperator(np.ones((2, 3)))
    with pytest.raises(ValueError):
        DenseOperator([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        DenseOperator(np.eye(2)).matvec(np.ones(3))


def test_dense_oracle_cap() -> None:
    with pytest.raises(ValueError):
        to_dense_oracle(IdentityOperator(2001))


def test_custom_operator_default_block() -> None:
    class Doubling(LinearOperator):
        @property
        def dim(self) -> int:
            return 3

        def _apply(self, vector: np.ndarray) -> np.ndarray:
            return 2.0 * vector

    block = np.arange(6.0).reshape(3, 2)

    assert np.array_equal(Doubling().matmat(block), 2.0 * block)


def test_constructors(generator: np.random.Generator) -> None:
    design = generator.standard_normal((6, 3))
    points = generator.standard_normal((5, 2))
    vector = generator.standard_normal(3)

    ridge = gram_ridge(design)
    kernel = gaussian_kernel(points, 0.5)

    assert np.allclose(
        matvec(regularize(ridge, 0.1), vector),
        design.T @ (design @ vector) / 6 + 0.1 * vector,
    )
    assert np.array_equal(
        kernel.to_dense(), KernelOperator(points, 0.5).to_dense()
    )
