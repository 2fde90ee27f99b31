from .adaptive import (
    AdaptiveConfig as AdaptiveConfig,
    AdaptiveOutcome as AdaptiveOutcome,
    RankSelectionMode as RankSelectionMode,
    adaptive_nystrom as adaptive_nystrom,
    adaptive_nystrom_ratio as adaptive_nystrom_ratio,
    estimate_error_power as estimate_error_power,
    fixed_rank_nystrom as fixed_rank_nystrom,
    posterior_condition_estimate as posterior_condition_estimate,
    select_rank as select_rank,
)
from .approximation import (
    ErrorBoundForm as ErrorBoundForm,
    NystromApproximation as NystromApproximation,
    NystromConstructionError as NystromConstructionError,
    SketchKind as SketchKind,
    SketchPair as SketchPair,
    column_sampling_nystrom as column_sampling_nystrom,
    column_sketch as column_sketch,
    expected_error_bound as expected_error_bound,
    extend_sketch as extend_sketch,
    gaussian_sketch as gaussian_sketch,
    nystrom_definitional as nystrom_definitional,
    randomized_nystrom as randomized_nystrom,
    stable_nystrom as stable_nystrom,
)
from .bench import (
    BenchRecord as BenchRecord,
    BenchSummary as BenchSummary,
    resolve_threads as resolve_threads,
    run_benchmark as run_benchmark,
    run_trials as run_trials,
    summarize as summarize,
)
from .cli import main as main
from .diagnostics import (
    ConditionBounds as ConditionBounds,
    LemmaCheck as LemmaCheck,
    LemmaViolation as LemmaViolation,
    condition_bounds as condition_bounds,
    effective_dimension as effective_dimension,
    exact_condition_number as exact_condition_number,
    expected_inverse_error_bound as expected_inverse_error_bound,
    inverse_perturbation_bound as inverse_perturbation_bound,
    key_lemma_check as key_lemma_check,
    optimal_inverse_discrepancy as optimal_inverse_discrepancy,
    p_stable_rank as p_stable_rank,
    preconditioned_matrix as preconditioned_matrix,
    recommended_sketch_size as recommended_sketch_size,
    sketch_and_solve_sketch_size as sketch_and_solve_sketch_size,
)
from .io import (
    MatrixFormat as MatrixFormat,
    MatrixFormatError as MatrixFormatError,
    load_matrix as load_matrix,
    write_matrix as write_matrix,
)
from .operators import (
    ColumnAccessible as ColumnAccessible,
    DenseOperator as DenseOperator,
    GramRidgeOperator as GramRidgeOperator,
    IdentityOperator as IdentityOperator,
    KernelOperator as KernelOperator,
    LinearOperator as LinearOperator,
    RegularizedOperator as RegularizedOperator,
    RegularizerConvention as RegularizerConvention,
    SparseOperator as SparseOperator,
    UnsupportedCapabilityError as UnsupportedCapabilityError,
    as_operator as as_operator,
    gaussian_kernel as gaussian_kernel,
    gram_ridge as gram_ridge,
    has_column_access as has_column_access,
    krr_shift as krr_shift,
    matvec as matvec,
    regularize as regularize,
    require_column_access as require_column_access,
    to_dense_oracle as to_dense_oracle,
)
from .preconditioning import (
    NystromPreconditioner as NystromPreconditioner,
    OptimalPreconditioner as OptimalPreconditioner,
    Preconditioner as Preconditioner,
    apply as apply,
    apply_inverse as apply_inverse,
    build_preconditioner as build_preconditioner,
    optimal_preconditioner as optimal_preconditioner,
    sketch_and_solve as sketch_and_solve,
    woodbury_inverse_apply as woodbury_inverse_apply,
)
from .problems import (
    FileSource as FileSource,
    KernelSource as KernelSource,
    Problem as Problem,
    ProblemSource as ProblemSource,
    ProblemSpec as ProblemSpec,
    RankPolicy as RankPolicy,
    RidgeSource as RidgeSource,
    SolverKind as SolverKind,
    SyntheticSource as SyntheticSource,
    build_problem as build_problem,
    random_features as random_features,
)
from .solving import (
    BlockSolveReport as BlockSolveReport,
    DivergenceError as DivergenceError,
    SolveReport as SolveReport,
    TerminationStatus as TerminationStatus,
    adaptive_iteration_bound as adaptive_iteration_bound,
    block_nystrom_pcg as block_nystrom_pcg,
    cg as cg,
    iteration_bound as iteration_bound,
    nystrom_pcg as nystrom_pcg,
)
from .spectrum import (
    SpectrumProfile as SpectrumProfile,
    random_orthogonal as random_orthogonal,
    synthesize_operator as synthesize_operator,
)
