import dataclasses
import json
from pathlib import Path

import pytest

from nyspcg.bench import (
    BenchRecord,
    FileSource,
    KernelSource,
    ProblemSpec,
    RankPolicy,
    SolverKind,
    SyntheticSource,
    resolve_threads,
    run_benchmark,
    run_trials,
    summarize,
)
from nyspcg.operators import MatrixFormat

TIME_FIELDS = ('sketch_time', 'precondition_time', 'solve_time', 'wall_time')
ADAPTIVE_SPEC = ProblemSpec(
    SyntheticSource('poly:2', 100),
    mu=1e-3,
    policy=RankPolicy.ADAPTIVE_ERROR,
    rank=4,
)


def _without_times(record: BenchRecord) -> BenchRecord:
    return dataclasses.replace(record, **dict.fromkeys(TIME_FIELDS, 0.0))


def test_adaptive_run() -> None:
    record = run_benchmark(ADAPTIVE_SPEC)

    assert record.converged
    assert record.error is None
    assert record.n == 100
    assert record.ell_final >= 4
    assert record.error_estimate is not None
    assert record.error_estimate <= 30 * 1e-3 or record.ell_final == 100
    assert record.matvec_count == record.iterations + 1
    assert record.residual is not None
    assert record.residual <= 1e-9
    assert record.relative_error is not None
    assert record.relative_error <= 1e-6
    assert record.wall_time >= record.solve_time >= 0.0


def test_determinism() -> None:
    first, second = run_benchmark(ADAPTIVE_SPEC), run_benchmark(ADAPTIVE_SPEC)

    assert _without_times(first) == _without_times(second)


@pytest.mark.parametrize('solver', list(SolverKind))
def test_solvers(solver: SolverKind) -> None:
    spec = ProblemSpec(
        SyntheticSource('exp:0.8', 60),
        mu=1e-2,
        solver=solver,
        rank=30,
        relative=True,
        tolerance=1e-8,
    )

    record = run_benchmark(spec)

    assert record.solver == solver.value
    assert record.status != 'failed'
    assert record.relative_error is not None
    if solver is SolverKind.SKETCH_AND_SOLVE:
        assert record.iterations == record.matvec_count == 0
    else:
        assert record.converged
    if solver is SolverKind.CG:
        assert record.ell_final == 0


def test_block_run() -> None:
    spec = ProblemSpec(
        KernelSource(rows=50, columns=2),
        mu=1e-3,
        solver=SolverKind.BLOCK_PCG,
        rank=20,
        rhs_count=3,
        relative=True,
        tolerance=1e-8,
    )

    record = run_benchmark(spec)

    assert record.converged
    assert record.shift == 50 * 1e-3
    assert record.d == 2


def test_iterations_limit() -> None:
    spec = ProblemSpec(
        SyntheticSource('poly:1', 80),
        mu=1e-4,
        solver=SolverKind.CG,
        tolerance=1e-14,
        max_iterations=2,
    )

    record = run_benchmark(spec)

    assert record.status == 'max-iterations'
    assert record.iterations == 2
    assert not record.converged


def test_failed_run(tmp_path: Path) -> None:
    path = tmp_path / 'matrix.mtx'
    path.touch()
    spec = ProblemSpec(FileSource(str(path)), mu=1e-2)

    record = run_benchmark(spec)

    assert record.status == 'failed'
    assert record.error is not None
    assert record.error.startswith('MatrixFormatError')
    assert record.residual is None


def test_asymmetric_file_fails(tmp_path: Path) -> None:
    path = tmp_path / 'matrix.csv'
    path.write_text('1,2\n0,1\n')
    spec = ProblemSpec(FileSource(str(path), MatrixFormat.CSV_DENSE), mu=1.0)

    assert run_benchmark(spec).status == 'failed'


def test_trials() -> None:
    spec = ProblemSpec(SyntheticSource('poly:2', 40), mu=1e-2, seed=7)

    records = run_trials(spec, 4, threads=2)

    assert [record.trial for record in records] == [0, 1, 2, 3]
    assert [record.seed for record in records] == [7, 8, 9, 10]
    assert _without_times(records[2]) == _without_times(
        run_benchmark(spec.with_seed(9), trial=2)
    )


def test_summary() -> None:
    records = run_trials(
        ProblemSpec(SyntheticSource('poly:2', 40), mu=1e-2), 3, threads=1
    )

    summary = summarize(records)

    assert summary.trials == summary.converged == 3
    assert summary.failed == 0
    assert summary.means['ell_final'] == 10.0
    assert summary.stds['ell_final'] == 0.0
    assert 'error_estimate' in summary.means
    assert json.loads(summary.to_json())['type'] == 'summary'


def test_summary_skips_failures(tmp_path: Path) -> None:
    path = tmp_path / 'matrix.mtx'
    path.touch()
    failed = run_benchmark(ProblemSpec(FileSource(str(path)), mu=1.0))

    summary = summarize([failed])

    assert summary.failed == 1
    assert summary.means == summary.stds == {}
    with pytest.raises(ValueError):
        summarize([])


def test_record_serialization() -> None:
    record = run_benchmark(ADAPTIVE_SPEC)

    line = record.to_json()

    assert json.loads(line)['type'] == 'trial'
    assert BenchRecord.from_json(line) == record
    with pytest.raises(ValueError):
        BenchRecord.from_json(json.dumps({'type': 'summary'}))


def test_threads(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv('NPCG_THREADS', '3')

    assert resolve_threads() == 3
    assert resolve_threads(5) == 5

    monkeypatch.setenv('NPCG_THREADS', 'many')

    with pytest.raises(ValueError):
        resolve_threads()

    monkeypatch.delenv('NPCG_THREADS')

    assert resolve_threads() >= 1
    with pytest.raises(ValueError):
        resolve_threads(0)
