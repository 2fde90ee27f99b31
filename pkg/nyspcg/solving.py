from . import _nyspcg as _module

# reports
BlockSolveReport = _module.BlockSolveReport
DivergenceError = _module.DivergenceError
SolveReport = _module.SolveReport
TerminationStatus = _module.TerminationStatus

# solvers
block_nystrom_pcg = _module.block_nystrom_pcg
cg = _module.cg
nystrom_pcg = _module.nystrom_pcg

# iteration counts
adaptive_iteration_bound = _module.adaptive_iteration_bound
iteration_bound = _module.iteration_bound
