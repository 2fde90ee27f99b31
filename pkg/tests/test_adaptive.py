import math

import numpy as np
import pytest
from hypothesis import given
from scipy import linalg

from nyspcg.adaptive import (
    AdaptiveConfig,
    RankSelectionMode,
    adaptive_nystrom,
    adaptive_nystrom_ratio,
    estimate_error_power,
    fixed_rank_nystrom,
    posterior_condition_estimate,
    select_rank,
)
from nyspcg.approximation import SketchKind, randomized_nystrom
from nyspcg.diagnostics import effective_dimension, exact_condition_number
from nyspcg.operators import (
    DenseOperator,
    RegularizedOperator,
    SpectrumProfile,
    random_orthogonal,
    synthesize_operator,
    to_dense_oracle,
)
from nyspcg.preconditioning import build_preconditioner
from nyspcg.solving import (
    adaptive_iteration_bound,
    iteration_bound,
    nystrom_pcg,
)

from tests.strategies import psd_problem_strategy, seed_strategy
from tests.utils import to_energy_error_recorder


def test_error_of_exact_approximation(generator: np.random.Generator) -> None:
    operator = DenseOperator(np.diag([2.0, 1.0, 0.0, 0.0, 0.0]))
    approximation = randomized_nystrom(operator, 3, generator)

    estimate = estimate_error_power(
        operator,
        approximation.u,
        approximation.eigenvalues,
        5,
        generator,
    )

    assert 0.0 <= estimate <= 1e-10 * 2.0


def test_error_of_empty_approximation(generator: np.random.Generator) -> None:
    estimate = estimate_error_power(
        DenseOperator(np.diag([3.0, 1.0])),
        np.zeros((2, 0)),
        np.zeros(0),
        20,
        generator,
    )

    assert 3.0 * (1 - 1e-6) <= estimate <= 3.0 * (1 + 1e-12)


@given(psd_problem_strategy, seed_strategy)
def test_error_estimate_is_lower_bound(
    problem: tuple[SpectrumProfile, DenseOperator, int], seed: int
) -> None:
    profile, operator, ell = problem
    generator = np.random.default_rng(seed)
    approximation = randomized_nystrom(operator, ell, generator)
    error_norm = linalg.eigvalsh(
        operator.matrix - approximation.to_dense()
    )[-1]

    estimate = estimate_error_power(
        operator, approximation.u, approximation.eigenvalues, 5, generator
    )

    assert estimate <= error_norm + 1e-10 * profile.eigenvalue(1)


def test_immediate_acceptance(generator: np.random.Generator) -> None:
    operator = DenseOperator(np.diag([1.0, *np.full(99, 1e-12)]))
    config = AdaptiveConfig(initial_size=10, max_size=100, mu=0.5, tau=1.0)

    outcome = adaptive_nystrom(operator, config, generator)

    assert outcome.rank == 10
    assert outcome.doublings == 0
    assert not outcome.hit_cap
    assert outcome.error_estimate is not None
    assert outcome.error_estimate <= 0.5


def test_flat_spectrum_hits_cap(generator: np.random.Generator) -> None:
    config = AdaptiveConfig(initial_size=4, max_size=16, mu=0.5, tau=1.0)

    outcome = adaptive_nystrom(DenseOperator(np.eye(100)), config, generator)

    assert outcome.hit_cap
    assert outcome.rank == 16
    assert outcome.doublings == 2


def test_top_up_to_cap(generator: np.random.Generator) -> None:
    config = AdaptiveConfig(initial_size=3, max_size=10, mu=0.5, tau=1.0)

    outcome = adaptive_nystrom(DenseOperator(np.eye(20)), config, generator)

    assert outcome.hit_cap
    assert outcome.rank == 10
    assert outcome.doublings == 2


@given(psd_problem_strategy, seed_strategy)
def test_doubling_schedule(
    problem: tuple[SpectrumProfile, DenseOperator, int], seed: int
) -> None:
    _, operator, _ = problem
    config = AdaptiveConfig(
        initial_size=1, max_size=operator.dim, mu=1e-3, tau=30.0
    )

    outcome = adaptive_nystrom(operator, config, seed)

    assert outcome.rank == min(2**outcome.doublings, operator.dim)
    assert outcome.hit_cap or (
        outcome.error_estimate is not None
        and outcome.error_estimate <= config.tolerance
        and outcome.approximation.lambda_ell <= config.tolerance / 11
    )


def test_ratio_selection(generator: np.random.Generator) -> None:
    operator = synthesize_operator(
        SpectrumProfile.polynomial(80, 2.0), generator
    )
    config = AdaptiveConfig(
        initial_size=2,
        max_size=80,
        mu=1e-3,
        mode=RankSelectionMode.RATIO,
    )

    outcome = adaptive_nystrom_ratio(operator, config, generator)

    assert config.tau == 10.0
    assert outcome.error_estimate is None
    assert outcome.posterior_condition_estimate is None
    assert outcome.approximation.lambda_ell / 1e-3 <= 10.0
    with pytest.raises(ValueError):
        outcome.iteration_forecast(1e-6)


def test_ratio_immediate_stop(generator: np.random.Generator) -> None:
    config = AdaptiveConfig(
        initial_size=2, max_size=8, mu=1.0, mode=RankSelectionMode.RATIO
    )

    outcome = adaptive_nystrom_ratio(
        DenseOperator(np.diag([5.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])),
        config,
        generator,
    )

    assert outcome.doublings == 0


def test_ratio_flat_spectrum_hits_cap(generator: np.random.Generator) -> None:
    config = AdaptiveConfig(
        initial_size=4,
        max_size=16,
        mu=1e-6,
        mode=RankSelectionMode.RATIO,
    )

    outcome = adaptive_nystrom_ratio(
        DenseOperator(np.eye(100)), config, generator
    )

    assert outcome.hit_cap
    assert outcome.rank == 16


def test_fixed_rank(generator: np.random.Generator) -> None:
    operator = synthesize_operator(
        SpectrumProfile.exponential(30, 0.7), generator
    )
    config = AdaptiveConfig(
        initial_size=5, max_size=12, mu=1e-3, mode=RankSelectionMode.FIXED
    )

    outcome = fixed_rank_nystrom(operator, config, generator)

    assert outcome.rank == 12
    assert outcome.doublings == 0
    assert not outcome.hit_cap
    assert outcome.error_estimate is not None


def test_column_selection(generator: np.random.Generator) -> None:
    operator = synthesize_operator(
        SpectrumProfile.exponential(40, 0.5), generator
    )
    config = AdaptiveConfig(
        initial_size=2,
        max_size=40,
        mu=1e-3,
        sketch_kind=SketchKind.COLUMN,
    )

    outcome = select_rank(operator, config, generator)

    assert outcome.hit_cap or (
        outcome.error_estimate is not None
        and outcome.error_estimate <= config.tolerance
    )


def test_mode_mismatch(generator: np.random.Generator) -> None:
    config = AdaptiveConfig(
        initial_size=2, max_size=4, mu=1.0, mode=RankSelectionMode.RATIO
    )

    with pytest.raises(ValueError):
        adaptive_nystrom(DenseOperator(np.eye(4)), config, generator)


def test_config_validation() -> None:
    assert AdaptiveConfig(initial_size=1, max_size=2, mu=1.0).tau == 30.0
    with pytest.raises(ValueError):
        AdaptiveConfig(initial_size=4, max_size=2, mu=1.0)
    with pytest.raises(ValueError):
        AdaptiveConfig(initial_size=1, max_size=2, mu=0.0)
    with pytest.raises(ValueError):
        adaptive_nystrom(
            DenseOperator(np.eye(3)),
            AdaptiveConfig(initial_size=1, max_size=4, mu=1.0),
            0,
        )


def test_posterior_condition_estimate() -> None:
    assert posterior_condition_estimate(0.0, 1.0, 0.0) == 1.0
    assert posterior_condition_estimate(1.0, 1.0, 2.0) == 4.0


def test_forecast_bounds_observed_iterations(
    generator: np.random.Generator,
) -> None:
    operator = synthesize_operator(
        SpectrumProfile.polynomial(150, 2.0), generator
    )
    mu = 1e-3
    config = AdaptiveConfig(initial_size=4, max_size=150, mu=mu)
    outcome = adaptive_nystrom(operator, config, generator)
    matrix = to_dense_oracle(operator) + mu * np.eye(150)
    solution = generator.standard_normal(150)
    errors, record = to_energy_error_recorder(matrix, solution)

    nystrom_pcg(
        operator,
        matrix @ solution,
        mu,
        build_preconditioner(outcome.approximation, mu),
        tolerance=1e-12,
        relative=True,
        max_iterations=outcome.iteration_forecast(1e-6),
        callback=record,
    )

    assert outcome.posterior_condition_estimate is not None
    assert min(errors) <= 1e-6
    assert outcome.iteration_forecast(1e-6) == iteration_bound(
        outcome.posterior_condition_estimate, 1e-6
    )


def test_selected_rank_scales_with_effective_dimension(
    generator: np.random.Generator,
) -> None:
    profile = SpectrumProfile.exponential(500, 0.7)
    operator = synthesize_operator(profile, generator)
    mu, tau, initial_size = 1e-3, 44.0, 10
    matrix = to_dense_oracle(operator) + mu * np.eye(500)
    target = 2 * math.ceil(2 * effective_dimension(profile, mu)) + 1
    doublings_limit = math.ceil(math.log2(target / initial_size))
    iterations_limit = adaptive_iteration_bound(tau, 1e-6)
    config = AdaptiveConfig(
        initial_size=initial_size, max_size=500, mu=mu, tau=tau
    )
    few_doublings = small_rank = fast_solve = 0

    for _ in range(40):
        outcome = adaptive_nystrom(operator, config, generator)
        solution = generator.standard_normal(500)
        errors, record = to_energy_error_recorder(matrix, solution)
        nystrom_pcg(
            operator,
            matrix @ solution,
            mu,
            build_preconditioner(outcome.approximation, mu),
            tolerance=1e-12,
            relative=True,
            max_iterations=iterations_limit,
            callback=record,
        )
        few_doublings += outcome.doublings <= doublings_limit
        small_rank += outcome.rank <= 2 * target
        fast_solve += min(errors) <= 1e-6

    assert few_doublings >= 30
    assert small_rank >= 30
    assert fast_solve >= 30


def test_ratio_sketch_size_keeps_error_small(
    generator: np.random.Generator,
) -> None:
    profile = SpectrumProfile.polynomial(300, 2.0)
    operator = synthesize_operator(profile, generator)
    mu, tau = 1e-3, 10.0
    regularized = RegularizedOperator(operator, mu)
    size = 2 * math.ceil(2 * effective_dimension(profile, tau * mu)) + 1
    successes = 0

    for _ in range(40):
        approximation = randomized_nystrom(operator, size, generator)
        kappa = exact_condition_number(
            build_preconditioner(approximation, mu), regularized
        )
        excess = kappa - (approximation.lambda_ell + mu) / mu
        successes += max(excess, 0.0) <= 4 * tau

    assert successes >= 30


def test_power_estimate_with_eigengap(generator: np.random.Generator) -> None:
    values = np.concatenate([[10.0, 9.0, 4.0, 2.0], np.linspace(1, 0, 46)])
    seed = 29
    # same seed, same rotation
    operator = synthesize_operator(SpectrumProfile.from_values(values), seed)
    q = random_orthogonal(50, seed)

    for _ in range(10):
        estimate = estimate_error_power(
            operator, q[:, :2], values[:2], 20, generator
        )

        assert 0.99 * 4.0 <= estimate <= 4.0 * (1 + 1e-10)


@given(psd_problem_strategy, seed_strategy)
def test_selection_is_reproducible(
    problem: tuple[SpectrumProfile, DenseOperator, int], seed: int
) -> None:
    profile, operator, _ = problem
    config = AdaptiveConfig(initial_size=1, max_size=profile.dim, mu=1e-3)

    first = adaptive_nystrom(operator, config, seed)
    second = adaptive_nystrom(operator, config, seed)

    assert first.rank == second.rank
    assert first.doublings == second.doublings
    assert first.hit_cap == second.hit_cap
    assert first.error_estimate == second.error_estimate
    assert np.array_equal(
        first.approximation.eigenvalues, second.approximation.eigenvalues
    )
    assert np.array_equal(first.approximation.u, second.approximation.u)


def test_regularized_operator_selection(
    generator: np.random.Generator,
) -> None:
    operator = RegularizedOperator(
        synthesize_operator(SpectrumProfile.polynomial(20, 1.0), generator),
        0.0,
    )
    config = AdaptiveConfig(
        initial_size=2, max_size=20, mu=1e-2, mode=RankSelectionMode.FIXED
    )

    assert select_rank(operator, config, generator).rank == 20
