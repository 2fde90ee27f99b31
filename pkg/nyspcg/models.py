from typing import get_args

from . import _nyspcg as _module

# operators
DenseOperator = _module.DenseOperator
GramRidgeOperator = _module.GramRidgeOperator
IdentityOperator = _module.IdentityOperator
KernelOperator = _module.KernelOperator
LinearOperator = _module.LinearOperator
RegularizedOperator = _module.RegularizedOperator
SparseOperator = _module.SparseOperator

Operator = (
    DenseOperator
    | GramRidgeOperator
    | IdentityOperator
    | KernelOperator
    | RegularizedOperator
    | SparseOperator
)

assert (
    len(
        missing_operator_classes := [
            cls
            for cls in get_args(Operator)
            if cls is not globals().get(cls.__name__)
        ]
    )
    == 0
), missing_operator_classes

# spectra
SpectrumProfile = _module.SpectrumProfile

# approximations
NystromApproximation = _module.NystromApproximation
SketchPair = _module.SketchPair

# preconditioners
NystromPreconditioner = _module.NystromPreconditioner
OptimalPreconditioner = _module.OptimalPreconditioner
Preconditioner = _module.Preconditioner

# reports
AdaptiveConfig = _module.AdaptiveConfig
AdaptiveOutcome = _module.AdaptiveOutcome
BlockSolveReport = _module.BlockSolveReport
ConditionBounds = _module.ConditionBounds
LemmaCheck = _module.LemmaCheck
LemmaViolation = _module.LemmaViolation
SolveReport = _module.SolveReport

# benchmarks
BenchRecord = _module.BenchRecord
BenchSummary = _module.BenchSummary
Problem = _module.Problem
ProblemSpec = _module.ProblemSpec
