import numpy as np
import pytest
from hypothesis import given
from scipy import linalg

from nyspcg.operators import (
    SpectrumProfile,
    random_orthogonal,
    synthesize_operator,
)

from tests.strategies import profile_strategy, seed_strategy


def test_polynomial_profile() -> None:
    profile = SpectrumProfile.polynomial(4, 2.0)

    assert np.allclose(profile.eigenvalues, [1.0, 1 / 4, 1 / 9, 1 / 16])


def test_exponential_profile() -> None:
    profile = SpectrumProfile.exponential(3, 0.5)

    assert np.allclose(profile.eigenvalues, [0.5, 0.25, 0.125])
    with pytest.raises(ValueError):
        SpectrumProfile.exponential(3, 1.5)


def test_profile_validation() -> None:
    with pytest.raises(ValueError):
        SpectrumProfile([1.0, 2.0])
    with pytest.raises(ValueError):
        SpectrumProfile([1.0, -1.0])
    with pytest.raises(ValueError):
        SpectrumProfile([])


def test_from_values_sorts() -> None:
    profile = SpectrumProfile.from_values([1.0, 4.0, 2.0])

    assert profile == SpectrumProfile([4.0, 2.0, 1.0])
    assert profile.eigenvalue(2) == 2.0
    assert profile.rank == 3


def test_flat_profile_synthesizes_identity(
    generator: np.random.Generator,
) -> None:
    operator = synthesize_operator(SpectrumProfile(np.ones(6)), 7)
    vector = generator.standard_normal(6)

    assert np.allclose(operator.matvec(vector), vector, rtol=0, atol=1e-12)


def test_synthesized_eigenvalues() -> None:
    operator = synthesize_operator(SpectrumProfile([4.0, 2.0, 1.0]), 3)

    assert np.allclose(
        linalg.eigvalsh(operator.matrix)[::-1], [4.0, 2.0, 1.0], atol=1e-10
    )


@given(profile_strategy, seed_strategy)
def test_synthesis_determinism(profile: SpectrumProfile, seed: int) -> None:
    first = synthesize_operator(profile, seed)
    second = synthesize_operator(profile, seed)

    assert np.array_equal(first.matrix, second.matrix)


@given(profile_strategy, seed_strategy)
def test_synthesized_spectrum(profile: SpectrumProfile, seed: int) -> None:
    operator = synthesize_operator(profile, seed)

    assert np.allclose(
        linalg.eigvalsh(operator.matrix)[::-1],
        profile.eigenvalues,
        rtol=0,
        atol=1e-10 * profile.eigenvalue(1),
    )


def test_seeded_profile() -> None:
    profile = SpectrumProfile([2.0, 1.0], seed=11)

    assert np.array_equal(
        synthesize_operator(profile).matrix,
        synthesize_operator(profile, 11).matrix,
    )
    with pytest.raises(ValueError):
        synthesize_operator(SpectrumProfile([2.0, 1.0]))


@given(seed_strategy)
def test_random_orthogonal(seed: int) -> None:
    q = random_orthogonal(5, seed)

    assert np.allclose(q.T @ q, np.eye(5), rtol=0, atol=1e-12)
