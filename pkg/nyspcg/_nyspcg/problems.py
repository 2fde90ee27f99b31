from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from enum import Enum, unique
from typing import Any, ClassVar, TypeAlias

import numpy as np
from numpy.typing import ArrayLike
from typing_extensions import Self, override

from .approximation import SketchKind
from .constants import DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE
from .io import MatrixFormat, load_matrix
from .operators import (
    GramRidgeOperator,
    KernelOperator,
    LinearOperator,
    RegularizedOperator,
    RegularizerConvention,
    as_operator,
    krr_shift,
)
from .spectrum import SpectrumProfile, synthesize_operator
from .utils import (
    Matrix,
    RandomSource,
    to_finite_matrix,
    to_generator,
    validate_positive_integer,
    validate_real,
)

if sys.version_info < (3, 11):
    from exceptiongroup import ExceptionGroup


def random_features(
    points: ArrayLike, features_count: int, sigma: float, rng: RandomSource, /
) -> Matrix:
    """Random Fourier features of the Gaussian kernel with bandwidth sigma.

    Inner products of the rows approximate
    exp(-|x_i - x_j|^2 / (2 sigma^2)).
    """
    validate_positive_integer(features_count, name='Features count')
    validate_real(sigma, name='Bandwidth', positive=True)
    data = np.array(points, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, np.newaxis]
    data = to_finite_matrix(data, name='Points')
    generator = to_generator(rng)
    weights = generator.normal(
        scale=1.0 / sigma, size=(data.shape[1], features_count)
    )
    offsets = generator.uniform(0.0, 2.0 * math.pi, size=features_count)
    return math.sqrt(2.0 / features_count) * np.cos(data @ weights + offsets)


@unique
class SolverKind(str, Enum):
    BLOCK_PCG = 'block_pcg'
    CG = 'cg'
    NYSTROM_PCG = 'nystrom_pcg'
    SKETCH_AND_SOLVE = 'sketch_and_solve'

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}.{self._name_}'

    @override
    def __str__(self, /) -> str:
        return self._value_


@unique
class RankPolicy(str, Enum):
    ADAPTIVE_ERROR = 'adaptive-error'
    ADAPTIVE_RATIO = 'adaptive-ratio'
    FIXED = 'fixed'

    @override
    def __repr__(self, /) -> str:
        return f'{type(self).__qualname__}.{self._name_}'

    @override
    def __str__(self, /) -> str:
        return self._value_


@dataclass(frozen=True)
class FileSource:
    """Symmetric positive-semidefinite matrix read from a file."""

    kind: ClassVar[str] = 'file'

    path: str
    format: MatrixFormat = MatrixFormat.MATRIX_MARKET

    def __post_init__(self, /) -> None:
        object.__setattr__(self, 'format', MatrixFormat(self.format))


@dataclass(frozen=True)
class SyntheticSource:
    """Random rotation of an explicit spectrum, ``poly:P`` or ``exp:B``."""

    kind: ClassVar[str] = 'synthetic'

    spectrum: str
    dim: int

    def to_profile(self, /) -> SpectrumProfile:
        family, _, parameter = self.spectrum.partition(':')
        try:
            value = float(parameter)
        except ValueError:
            raise ValueError(
                f'Invalid spectrum parameter in {self.spectrum!r}.'
            ) from None
        if family == 'poly':
            return SpectrumProfile.polynomial(self.dim, value)
        elif family == 'exp':
            return SpectrumProfile.exponential(self.dim, value)
        raise ValueError(
            'Spectrum should be given as "poly:P" or "exp:B", '
            f'but got {self.spectrum!r}.'
        )


@dataclass(frozen=True)
class RidgeSource:
    """Ridge regression Gram matrix G^T G / rows.

    Without a path a standard Gaussian design of the given shape is drawn,
    with ``random_features`` the rows are mapped to that many features.
    """

    kind: ClassVar[str] = 'ridge'

    path: str | None = None
    format: MatrixFormat = MatrixFormat.CSV_DENSE
    rows: int = 0
    columns: int = 0
    random_features: int | None = None
    sigma: float = 1.0

    def __post_init__(self, /) -> None:
        object.__setattr__(self, 'format', MatrixFormat(self.format))


@dataclass(frozen=True)
class KernelSource:
    """Gaussian kernel matrix over points read from a file or drawn."""

    kind: ClassVar[str] = 'krr'

    path: str | None = None
    format: MatrixFormat = MatrixFormat.CSV_DENSE
    rows: int = 0
    columns: int = 0
    sigma: float = 1.0
    convention: RegularizerConvention = RegularizerConvention.N_MU

    def __post_init__(self, /) -> None:
        object.__setattr__(self, 'format', MatrixFormat(self.format))
        object.__setattr__(
            self, 'convention', RegularizerConvention(self.convention)
        )


ProblemSource: TypeAlias = (
    FileSource | SyntheticSource | RidgeSource | KernelSource
)
_SOURCE_TYPES = (FileSource, SyntheticSource, RidgeSource, KernelSource)


@dataclass(frozen=True)
class ProblemSpec:
    source: ProblemSource
    mu: float
    solver: SolverKind = SolverKind.NYSTROM_PCG
    policy: RankPolicy = RankPolicy.FIXED
    rank: int = 10
    max_rank: int | None = None
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    relative: bool = False
    seed: int = 0
    rhs_count: int = 1
    sketch_kind: SketchKind = SketchKind.GAUSSIAN
    tau: float | None = None

    @classmethod
    def from_json_dict(cls, value: dict[str, Any], /) -> Self:
        fields = dict(value)
        source_fields = dict(fields.pop('source'))
        source_kind = source_fields.pop('kind')
        source_type = next(
            (type_ for type_ in _SOURCE_TYPES if type_.kind == source_kind),
            None,
        )
        if source_type is None:
            raise ValueError(f'Unknown source kind {source_kind!r}.')
        return cls(source=source_type(**source_fields), **fields)

    def to_json_dict(self, /) -> dict[str, Any]:
        result = _to_plain(dataclasses.asdict(self))
        result['source'] = {
            'kind': self.source.kind,
            **_to_plain(dataclasses.asdict(self.source)),
        }
        return result

    def canonical_json(self, /) -> str:
        return json.dumps(
            self.to_json_dict(), sort_keys=True, separators=(',', ':')
        )

    def spec_hash(self, /) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def with_seed(self, seed: int, /) -> Self:
        return dataclasses.replace(self, seed=seed)

    def __post_init__(self, /) -> None:
        for name, type_ in (
            ('solver', SolverKind),
            ('policy', RankPolicy),
            ('sketch_kind', SketchKind),
        ):
            object.__setattr__(self, name, type_(getattr(self, name)))
        errors = [
            *_collect_errors(self._validate_source),
            *_collect_errors(
                validate_real,
                self.mu,
                name='Regularization parameter',
                positive=True,
            ),
            *_collect_errors(
                validate_real, self.tolerance, name='Tolerance', positive=True
            ),
            *_collect_errors(
                validate_positive_integer,
                self.max_iterations,
                name='Iterations limit',
            ),
            *_collect_errors(
                validate_positive_integer, self.rank, name='Rank'
            ),
            *_collect_errors(
                validate_positive_integer,
                self.rhs_count,
                name='Right-hand sides count',
            ),
            *_collect_errors(self._validate_consistency),
        ]
        if errors:
            raise ExceptionGroup('Invalid problem specification.', errors)

    def _validate_consistency(self, /) -> None:
        if self.max_rank is not None and self.max_rank < self.rank:
            raise ValueError(
                f'Maximum rank {self.max_rank!r} should not be less than '
                f'rank {self.rank!r}.'
            )
        if self.rhs_count > 1 and self.solver is not SolverKind.BLOCK_PCG:
            raise ValueError(
                'Several right-hand sides require the block solver, '
                f'but got {self.solver!r}.'
            )
        if self.tau is not None:
            validate_real(self.tau, name='Tolerance multiplier', positive=True)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValueError(f'Seed should be an integer, got {self.seed!r}.')

    def _validate_source(self, /) -> None:
        source = self.source
        if not isinstance(source, _SOURCE_TYPES):
            raise ValueError(
                'Exactly one problem source should be given, '
                f'but got {source!r}.'
            )
        if isinstance(source, SyntheticSource):
            validate_positive_integer(source.dim, name='Dimension')
            source.to_profile()
        elif isinstance(source, RidgeSource | KernelSource):
            if source.path is None:
                validate_positive_integer(source.rows, name='Rows count')
                validate_positive_integer(
                    source.columns, name='Columns count'
                )
            validate_real(source.sigma, name='Bandwidth', positive=True)
            if (
                isinstance(source, RidgeSource)
                and source.random_features is not None
            ):
                validate_positive_integer(
                    source.random_features, name='Features count'
                )


@dataclass(frozen=True)
class Problem:
    operator: LinearOperator
    shift: float
    rhs: Matrix
    solution: Matrix
    data_dim: int

    @property
    def dim(self, /) -> int:
        return self.operator.dim

    @property
    def regularized(self, /) -> RegularizedOperator:
        return RegularizedOperator(self.operator, self.shift)


def build_problem(spec: ProblemSpec, rng: RandomSource, /) -> Problem:
    """Materializes the operator and a right-hand side with known solution.

    The solution block has ``spec.rhs_count`` columns.
    """
    generator = to_generator(rng)
    source = spec.source
    shift = spec.mu
    if isinstance(source, FileSource):
        operator = as_operator(
            load_matrix(source.path, source.format, symmetric=True)
        )
        data_dim = operator.dim
    elif isinstance(source, SyntheticSource):
        operator = synthesize_operator(source.to_profile(), generator)
        data_dim = operator.dim
    elif isinstance(source, RidgeSource):
        design = _load_or_draw(source, generator)
        if source.random_features is not None:
            design = random_features(
                design, source.random_features, source.sigma, generator
            )
        operator = GramRidgeOperator(design)
        data_dim = design.shape[0]
    else:
        assert isinstance(source, KernelSource), source
        points = _load_or_draw(source, generator)
        operator = KernelOperator(points, source.sigma)
        shift = krr_shift(operator.dim, spec.mu, source.convention)
        data_dim = points.shape[1]
    solution = generator.standard_normal((operator.dim, spec.rhs_count))
    rhs = RegularizedOperator(operator, shift).matmat(solution)
    return Problem(
        operator=operator,
        shift=shift,
        rhs=rhs,
        solution=solution,
        data_dim=data_dim,
    )


def _collect_errors(
    validator: Any, /, *args: Any, **kwargs: Any
) -> list[Exception]:
    try:
        validator(*args, **kwargs)
    except (TypeError, ValueError) as error:
        return [error]
    return []


def _load_or_draw(
    source: RidgeSource | KernelSource, generator: np.random.Generator, /
) -> Matrix:
    if source.path is None:
        return generator.standard_normal((source.rows, source.columns))
    data = load_matrix(source.path, source.format)
    return to_finite_matrix(
        data.toarray() if hasattr(data, 'toarray') else data, name='Data'
    )


def _to_plain(value: Any, /) -> Any:
    if isinstance(value, dict):
        return {key: _to_plain(item) for key, item in value.items()}
    if isinstance(value, Enum):
        return value.value
    return value
