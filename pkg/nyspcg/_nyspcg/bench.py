from __future__ import annotations

import dataclasses
import json
import logging
import os
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np
from scipy import linalg
from typing_extensions import Self

from .adaptive import AdaptiveConfig, RankSelectionMode, select_rank
from .approximation import NystromConstructionError
from .constants import THREADS_ENVIRONMENT_VARIABLE
from .io import MatrixFormatError
from .operators import UnsupportedCapabilityError
from .preconditioning import (
    NystromPreconditioner,
    build_preconditioner,
    woodbury_inverse_apply,
)
from .problems import (
    Problem,
    ProblemSpec,
    RankPolicy,
    SolverKind,
    build_problem,
)
from .solving import (
    DivergenceError,
    TerminationStatus,
    block_nystrom_pcg,
    cg,
    nystrom_pcg,
)
from .utils import validate_positive_integer

logger = logging.getLogger(__name__)

FAILED_STATUS = 'failed'

_POLICY_MODES = {
    RankPolicy.ADAPTIVE_ERROR: RankSelectionMode.ERROR,
    RankPolicy.ADAPTIVE_RATIO: RankSelectionMode.RATIO,
    RankPolicy.FIXED: RankSelectionMode.FIXED,
}
_RECOVERABLE_ERRORS = (
    DivergenceError,
    MatrixFormatError,
    NystromConstructionError,
    UnsupportedCapabilityError,
    linalg.LinAlgError,
    ValueError,
)


@dataclass(frozen=True)
class BenchRecord:
    spec_hash: str
    trial: int
    seed: int
    solver: str
    policy: str
    n: int
    d: int
    mu: float
    shift: float
    ell_final: int
    doublings: int
    iterations: int
    matvec_count: int
    status: str
    residual: float | None
    relative_error: float | None
    error_estimate: float | None
    condition_estimate: float | None
    sketch_time: float
    precondition_time: float
    solve_time: float
    wall_time: float
    error: str | None = None

    @classmethod
    def from_json(cls, value: str, /) -> Self:
        fields = json.loads(value)
        if fields.pop('type', None) != 'trial':
            raise ValueError('Expected a trial record.')
        return cls(**fields)

    @property
    def converged(self, /) -> bool:
        return self.status == TerminationStatus.CONVERGED.value

    @property
    def problem_id(self, /) -> str:
        return self.spec_hash[:12]

    def to_json(self, /) -> str:
        return json.dumps({'type': 'trial', **dataclasses.asdict(self)})


@dataclass(frozen=True)
class BenchSummary:
    METRICS: ClassVar[tuple[str, ...]] = (
        'ell_final',
        'iterations',
        'matvec_count',
        'residual',
        'relative_error',
        'error_estimate',
        'condition_estimate',
        'sketch_time',
        'precondition_time',
        'solve_time',
        'wall_time',
    )

    spec_hash: str
    trials: int
    converged: int
    failed: int
    means: dict[str, float]
    stds: dict[str, float]

    def to_json(self, /) -> str:
        return json.dumps({'type': 'summary', **dataclasses.asdict(self)})


def run_benchmark(spec: ProblemSpec, /, *, trial: int = 0) -> BenchRecord:
    """Runs the configured pipeline once, failures end up in the record."""
    spec_hash = spec.spec_hash()
    generator = np.random.default_rng(spec.seed)
    try:
        problem = build_problem(spec, generator)
    except _RECOVERABLE_ERRORS as error:
        return _failed_record(spec, spec_hash, trial, error)
    timings = dict.fromkeys(('sketch', 'precondition', 'solve'), 0.0)
    ell_final = doublings = 0
    error_estimate = condition_estimate = None
    preconditioner = NystromPreconditioner.identity(problem.dim, problem.shift)
    start = time.perf_counter()
    try:
        if spec.solver is not SolverKind.CG:
            outcome = select_rank(
                problem.operator, to_adaptive_config(spec, problem), generator
            )
            approximation = outcome.approximation
            ell_final, doublings = approximation.rank, outcome.doublings
            error_estimate = outcome.error_estimate
            condition_estimate = outcome.posterior_condition_estimate
            timings['sketch'] = time.perf_counter() - start
            phase_start = time.perf_counter()
            preconditioner = build_preconditioner(approximation, problem.shift)
            timings['precondition'] = time.perf_counter() - phase_start
        phase_start = time.perf_counter()
        solution, iterations, matvec_count, status = _solve(
            spec, problem, preconditioner
        )
        timings['solve'] = time.perf_counter() - phase_start
    except _RECOVERABLE_ERRORS as error:
        return _failed_record(
            spec, spec_hash, trial, error, n=problem.dim, d=problem.data_dim
        )
    wall_time = time.perf_counter() - start
    residual = problem.rhs - problem.regularized.matmat(solution)
    return BenchRecord(
        spec_hash=spec_hash,
        trial=trial,
        seed=spec.seed,
        solver=spec.solver.value,
        policy=spec.policy.value,
        n=problem.dim,
        d=problem.data_dim,
        mu=spec.mu,
        shift=problem.shift,
        ell_final=ell_final,
        doublings=doublings,
        iterations=iterations,
        matvec_count=matvec_count,
        status=status,
        residual=float(np.linalg.norm(residual)),
        relative_error=float(
            np.linalg.norm(solution - problem.solution)
            / np.linalg.norm(problem.solution)
        ),
        error_estimate=error_estimate,
        condition_estimate=condition_estimate,
        sketch_time=timings['sketch'],
        precondition_time=timings['precondition'],
        solve_time=timings['solve'],
        wall_time=wall_time,
    )


def run_trials(
    spec: ProblemSpec, trials: int, /, *, threads: int | None = None
) -> list[BenchRecord]:
    """Runs trials with seeds spec.seed + index, ordered by index."""
    validate_positive_integer(trials, name='Trials count')
    workers = min(resolve_threads(threads), trials)
    specs = [spec.with_seed(spec.seed + index) for index in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(
            executor.map(
                lambda indexed: run_benchmark(indexed[1], trial=indexed[0]),
                enumerate(specs),
            )
        )


def resolve_threads(threads: int | None = None, /) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENVIRONMENT_VARIABLE)
        if raw is None:
            return os.cpu_count() or 1
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(
                f'{THREADS_ENVIRONMENT_VARIABLE} should be an integer, '
                f'but got {raw!r}.'
            ) from None
    validate_positive_integer(threads, name='Threads count')
    return threads


def summarize(records: Sequence[BenchRecord], /) -> BenchSummary:
    if not records:
        raise ValueError('At least one record is required.')
    means: dict[str, float] = {}
    stds: dict[str, float] = {}
    for metric in BenchSummary.METRICS:
        values = [
            value
            for record in records
            if record.status != FAILED_STATUS
            and (value := getattr(record, metric)) is not None
        ]
        if values:
            means[metric] = float(np.mean(values))
            stds[metric] = (
                float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            )
    return BenchSummary(
        spec_hash=records[0].spec_hash,
        trials=len(records),
        converged=sum(record.converged for record in records),
        failed=sum(record.status == FAILED_STATUS for record in records),
        means=means,
        stds=stds,
    )


def _failed_record(
    spec: ProblemSpec,
    spec_hash: str,
    trial: int,
    error: Exception,
    /,
    *,
    n: int = 0,
    d: int = 0,
) -> BenchRecord:
    logger.warning('Trial %r with seed %r failed: %s', trial, spec.seed, error)
    return BenchRecord(
        spec_hash=spec_hash,
        trial=trial,
        seed=spec.seed,
        solver=spec.solver.value,
        policy=spec.policy.value,
        n=n,
        d=d,
        mu=spec.mu,
        shift=spec.mu,
        ell_final=0,
        doublings=0,
        iterations=0,
        matvec_count=0,
        status=FAILED_STATUS,
        residual=None,
        relative_error=None,
        error_estimate=None,
        condition_estimate=None,
        sketch_time=0.0,
        precondition_time=0.0,
        solve_time=0.0,
        wall_time=0.0,
        error=f'{type(error).__name__}: {error}',
    )


def _solve(
    spec: ProblemSpec,
    problem: Problem,
    preconditioner: NystromPreconditioner,
    /,
) -> tuple[Any, int, int, str]:
    if spec.solver is SolverKind.SKETCH_AND_SOLVE:
        solution = woodbury_inverse_apply(
            preconditioner.u,
            preconditioner.eigenvalues,
            problem.shift,
            problem.rhs,
        )
        return solution, 0, 0, TerminationStatus.CONVERGED.value
    if spec.solver is SolverKind.BLOCK_PCG:
        block_report = block_nystrom_pcg(
            problem.operator,
            problem.rhs,
            problem.shift,
            preconditioner,
            tolerance=spec.tolerance,
            max_iterations=spec.max_iterations,
            relative=spec.relative,
        )
        return (
            block_report.solutions,
            block_report.iterations,
            block_report.matvec_count,
            (
                TerminationStatus.CONVERGED
                if block_report.all_converged
                else TerminationStatus.MAX_ITERATIONS
            ).value,
        )
    rhs = problem.rhs[:, 0]
    if spec.solver is SolverKind.CG:
        report = cg(
            problem.regularized,
            rhs,
            tolerance=spec.tolerance,
            max_iterations=spec.max_iterations,
            relative=spec.relative,
        )
    else:
        report = nystrom_pcg(
            problem.operator,
            rhs,
            problem.shift,
            preconditioner,
            tolerance=spec.tolerance,
            max_iterations=spec.max_iterations,
            relative=spec.relative,
        )
    return (
        report.solution[:, np.newaxis],
        report.iterations,
        report.matvec_count,
        report.status.value,
    )


def to_adaptive_config(
    spec: ProblemSpec, problem: Problem, /
) -> AdaptiveConfig:
    """Translates a rank policy into a rank search over the built problem."""
    rank = min(spec.rank, problem.dim)
    mode = _POLICY_MODES[spec.policy]
    if mode is RankSelectionMode.FIXED:
        max_rank = rank
    elif spec.max_rank is None:
        max_rank = problem.dim
    else:
        max_rank = min(spec.max_rank, problem.dim)
    return AdaptiveConfig(
        initial_size=rank,
        max_size=max(max_rank, rank),
        mu=problem.shift,
        mode=mode,
        tau=spec.tau,
        sketch_kind=spec.sketch_kind,
    )
