from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from collections.abc import Iterable, Sequence
from contextlib import ExitStack
from typing import Any, Final, TextIO

import numpy as np
from scipy import linalg

from .adaptive import select_rank
from .approximation import NystromConstructionError, SketchKind
from .bench import (
    FAILED_STATUS,
    BenchRecord,
    run_benchmark,
    run_trials,
    summarize,
    to_adaptive_config,
)
from .constants import DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE
from .diagnostics import effective_dimension, recommended_sketch_size
from .io import MatrixFormat, MatrixFormatError
from .operators import (
    RegularizerConvention,
    UnsupportedCapabilityError,
    to_dense_oracle,
)
from .problems import (
    FileSource,
    KernelSource,
    ProblemSource,
    ProblemSpec,
    RankPolicy,
    RidgeSource,
    SolverKind,
    SyntheticSource,
    build_problem,
)
from .solving import DivergenceError, TerminationStatus
from .spectrum import SpectrumProfile

if sys.version_info < (3, 11):
    from exceptiongroup import ExceptionGroup

logger = logging.getLogger(__name__)

EXIT_CONVERGED: Final[int] = 0
EXIT_ERROR: Final[int] = 1
EXIT_MAX_ITERATIONS: Final[int] = 2

_HANDLED_ERRORS = (
    DivergenceError,
    ExceptionGroup,
    MatrixFormatError,
    NystromConstructionError,
    OSError,
    UnsupportedCapabilityError,
    linalg.LinAlgError,
    ValueError,
)


def main(argv: Sequence[str] | None = None, /) -> int:
    parser = build_parser()
    try:
        arguments = parser.parse_args(argv)
    except SystemExit as exit_:
        return EXIT_CONVERGED if exit_.code == 0 else EXIT_ERROR
    logging.basicConfig(
        level=logging.DEBUG if arguments.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    with ExitStack() as stack:
        stream: TextIO = (
            sys.stdout
            if arguments.out is None
            else stack.enter_context(
                open(arguments.out, 'w', encoding='utf-8')
            )
        )
        try:
            return _COMMANDS[arguments.command](arguments, stream)
        except _HANDLED_ERRORS as error:
            logger.error('%s', error)
            return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_argument_group('problem source')
    source.add_argument('--matrix', help='path to the input matrix')
    source.add_argument(
        '--format',
        type=MatrixFormat,
        choices=list(MatrixFormat),
        default=MatrixFormat.MATRIX_MARKET,
    )
    source.add_argument(
        '--spectrum',
        help='synthetic spectrum, "poly:P" or "exp:B"',
    )
    source.add_argument('--dim', type=int, default=1000)
    source.add_argument(
        '--kernel-sigma',
        type=float,
        help='treat the matrix as points of a Gaussian kernel problem',
    )
    source.add_argument(
        '--ridge',
        action='store_true',
        help='treat the matrix as a ridge regression design matrix',
    )
    source.add_argument(
        '--random-features',
        type=int,
        help='map the design matrix rows to random features first',
    )
    source.add_argument(
        '--regularizer-convention',
        type=RegularizerConvention,
        choices=list(RegularizerConvention),
        default=RegularizerConvention.N_MU,
    )
    method = common.add_argument_group('method')
    method.add_argument('--mu', type=float, default=1e-3)
    method.add_argument('--rank', type=int, default=10)
    method.add_argument('--max-rank', type=int)
    method.add_argument('--tau', type=float)
    method.add_argument(
        '--policy',
        type=RankPolicy,
        choices=list(RankPolicy),
        default=RankPolicy.FIXED,
    )
    method.add_argument(
        '--sketch',
        type=SketchKind,
        choices=list(SketchKind),
        default=SketchKind.GAUSSIAN,
    )
    method.add_argument(
        '--solver',
        type=SolverKind,
        choices=list(SolverKind),
        default=SolverKind.NYSTROM_PCG,
    )
    method.add_argument('--rhs-count', type=int, default=1)
    method.add_argument('--tol', type=float, default=DEFAULT_TOLERANCE)
    method.add_argument(
        '--max-iter', type=int, default=DEFAULT_MAX_ITERATIONS
    )
    method.add_argument(
        '--relative',
        action='store_true',
        help='scale the tolerance by the right-hand side norm',
    )
    method.add_argument('--seed', type=int, default=0)
    method.add_argument('--trials', type=int, default=1)
    output = common.add_argument_group('output')
    output.add_argument('--out', help='write JSON lines to this path')
    output.add_argument('--verbose', action='store_true')
    parser = argparse.ArgumentParser(
        prog='nyspcg',
        description=(
            'Randomized Nystrom preconditioning '
            'for regularized linear systems.'
        ),
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, help_message in (
        ('solve', 'solve one regularized system'),
        ('approx', 'build a fixed-rank Nystrom approximation'),
        ('adaptive', 'select the approximation rank adaptively'),
        ('deff', 'report the effective dimension'),
        ('bench', 'run repeated trials and summarize them'),
    ):
        subparsers.add_parser(name, parents=[common], help=help_message)
    return parser


def to_problem_spec(arguments: argparse.Namespace, /) -> ProblemSpec:
    return ProblemSpec(
        source=_to_source(arguments),
        mu=arguments.mu,
        solver=arguments.solver,
        policy=arguments.policy,
        rank=arguments.rank,
        max_rank=arguments.max_rank,
        tolerance=arguments.tol,
        max_iterations=arguments.max_iter,
        relative=arguments.relative,
        seed=arguments.seed,
        rhs_count=arguments.rhs_count,
        sketch_kind=arguments.sketch,
        tau=arguments.tau,
    )


def _run_adaptive(arguments: argparse.Namespace, stream: TextIO, /) -> int:
    spec = to_problem_spec(arguments)
    if spec.policy is RankPolicy.FIXED:
        spec = dataclasses.replace(spec, policy=RankPolicy.ADAPTIVE_ERROR)
    return _run_selection(spec, stream)


def _run_approx(arguments: argparse.Namespace, stream: TextIO, /) -> int:
    spec = to_problem_spec(arguments)
    if spec.policy is not RankPolicy.FIXED:
        spec = dataclasses.replace(spec, policy=RankPolicy.FIXED)
    return _run_selection(spec, stream)


def _run_bench(arguments: argparse.Namespace, stream: TextIO, /) -> int:
    records = run_trials(to_problem_spec(arguments), arguments.trials)
    _write_lines(stream, (record.to_json() for record in records))
    _write_lines(stream, [summarize(records).to_json()])
    return _exit_code(records)


def _run_deff(arguments: argparse.Namespace, stream: TextIO, /) -> int:
    spec = to_problem_spec(arguments)
    if isinstance(spec.source, SyntheticSource):
        profile = spec.source.to_profile()
        shift = spec.mu
    else:
        problem = build_problem(spec, spec.seed)
        profile = SpectrumProfile.from_values(
            np.maximum(linalg.eigvalsh(to_dense_oracle(problem.operator)), 0.0)
        )
        shift = problem.shift
    _write_lines(
        stream,
        [
            json.dumps(
                {
                    'type': 'deff',
                    'dim': profile.dim,
                    'mu': shift,
                    'effective_dimension': effective_dimension(
                        profile, shift
                    ),
                    'recommended_sketch_size': recommended_sketch_size(
                        profile, shift
                    ),
                }
            )
        ],
    )
    return EXIT_CONVERGED


def _run_solve(arguments: argparse.Namespace, stream: TextIO, /) -> int:
    record = run_benchmark(to_problem_spec(arguments))
    _write_lines(stream, [record.to_json()])
    return _exit_code([record])


def _run_selection(spec: ProblemSpec, stream: TextIO, /) -> int:
    generator = np.random.default_rng(spec.seed)
    problem = build_problem(spec, generator)
    outcome = select_rank(
        problem.operator, to_adaptive_config(spec, problem), generator
    )
    payload: dict[str, Any] = {
        'type': 'approximation',
        'dim': problem.dim,
        'mu': problem.shift,
        'rank': outcome.rank,
        'eigenvalues': outcome.approximation.eigenvalues.tolist(),
        'shift_used': outcome.approximation.shift_used,
        'doublings': outcome.doublings,
        'hit_cap': outcome.hit_cap,
        'error_estimate': outcome.error_estimate,
        'condition_estimate': outcome.posterior_condition_estimate,
    }
    _write_lines(stream, [json.dumps(payload)])
    return EXIT_CONVERGED


_COMMANDS = {
    'adaptive': _run_adaptive,
    'approx': _run_approx,
    'bench': _run_bench,
    'deff': _run_deff,
    'solve': _run_solve,
}


def _exit_code(records: Sequence[BenchRecord], /) -> int:
    if any(record.status == FAILED_STATUS for record in records):
        for record in records:
            if record.error is not None:
                logger.error('Trial %r: %s', record.trial, record.error)
        return EXIT_ERROR
    if all(
        record.status == TerminationStatus.CONVERGED.value
        for record in records
    ):
        return EXIT_CONVERGED
    return EXIT_MAX_ITERATIONS


def _to_source(arguments: argparse.Namespace, /) -> ProblemSource:
    if arguments.spectrum is not None:
        return SyntheticSource(arguments.spectrum, arguments.dim)
    if arguments.matrix is None:
        raise ValueError('Either --matrix or --spectrum should be given.')
    if arguments.kernel_sigma is not None and not arguments.ridge:
        return KernelSource(
            path=arguments.matrix,
            format=arguments.format,
            sigma=arguments.kernel_sigma,
            convention=arguments.regularizer_convention,
        )
    if arguments.ridge or arguments.random_features is not None:
        return RidgeSource(
            path=arguments.matrix,
            format=arguments.format,
            random_features=arguments.random_features,
            sigma=(
                1.0
                if arguments.kernel_sigma is None
                else arguments.kernel_sigma
            ),
        )
    return FileSource(arguments.matrix, arguments.format)


def _write_lines(stream: TextIO, lines: Iterable[str], /) -> None:
    for line in lines:
        stream.write(line + '\n')
    stream.flush()
