from . import _nyspcg as _module

# problems
FileSource = _module.FileSource
KernelSource = _module.KernelSource
Problem = _module.Problem
ProblemSource = _module.ProblemSource
ProblemSpec = _module.ProblemSpec
RankPolicy = _module.RankPolicy
RidgeSource = _module.RidgeSource
SolverKind = _module.SolverKind
SyntheticSource = _module.SyntheticSource
build_problem = _module.build_problem
random_features = _module.random_features

# runs
BenchRecord = _module.BenchRecord
BenchSummary = _module.BenchSummary
resolve_threads = _module.resolve_threads
run_benchmark = _module.run_benchmark
run_trials = _module.run_trials
summarize = _module.summarize
