"""
The batch pipelines behind the CLI subcommands.

A scenario is prepared once (expression, classification, boundary scheme,
settings) and the λ-grid is fanned out over worker threads. Rows come back
in completion order and are sorted by grid index before anything is written.
"""

from queue import Queue
from threading import Thread
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np

from dirac_weyl import logger
from dirac_weyl.boundary_algebra import BoundaryScheme
from dirac_weyl.defect_lab import count_l2, finite_interval_check, kernel_rank
from dirac_weyl.dirac_core import DiracExpression, SymmetryReport, classify, kappa
from dirac_weyl.report_io import (
    CLASSIFY_COLUMNS,
    DEFECT_COLUMNS,
    FINITE_COLUMNS,
    Table,
    matrix_columns,
    weyl_columns,
)
from dirac_weyl.scenario import ScenarioConfig
from dirac_weyl.settings import Settings
from dirac_weyl.utils import (
    CayleyError,
    DiracWeylError,
    ScenarioError,
    UnwarrantedRegimeError,
    pluralize,
)
from dirac_weyl.weyl_engine import (
    TruncationSchedule,
    WeylSample,
    cauchy_riemann_residual,
    cayley,
    comp_is_j_unitary,
    herglotz_residuals,
    regime_of,
    sign_check,
    verify_l2_characterization,
    weyl_solution,
)


class Prepared(NamedTuple):
    scenario: ScenarioConfig
    settings: Settings
    expr: DiracExpression
    report: SymmetryReport
    scheme: Optional[BoundaryScheme]
    sched: TruncationSchedule
    grid: np.ndarray

    @property
    def canonical(self) -> DiracExpression:
        return self.scheme.canonical_expression(self.expr)


class RunResult(NamedTuple):
    command: str
    prepared: Prepared
    tables: List[Table]
    failures: List[complex]  # λ-values without a converged result
    extra: Optional[dict] = None


def prepare(scenario: ScenarioConfig, base: Optional[Settings] = None,
            need_boundary: bool = False) -> Prepared:
    """Build everything a pipeline needs; problems in the scenario become ScenarioError."""
    try:
        settings = scenario.settings(base)
        expr = scenario.build_expression()
        report = classify(expr, settings=settings)
        scheme = None
        if need_boundary or expr.p is not None:
            try:
                scheme = scenario.boundary_scheme(settings)
            except DiracWeylError:
                if need_boundary:
                    raise
                logger.debug(f"No boundary scheme for {scenario.name}", exc_info=True)
        sched = scenario.truncation(settings)
    except ScenarioError:
        raise
    except DiracWeylError as e:
        raise ScenarioError(scenario.name, str(e)) from e
    return Prepared(scenario, settings, expr, report, scheme, sched, scenario.grid())


class LambdaWorker(Thread):
    """Takes (index, λ) off the task queue until it sees None."""

    def __init__(self, task: Callable, tasks: Queue, results: Queue, num: int):
        super().__init__(name=f"lambda-{num}", daemon=True)
        self.task = task
        self.tasks = tasks
        self.results = results

    def run(self):
        while True:
            item = self.tasks.get()
            if item is None:
                self.tasks.task_done()
                break
            idx, lam = item
            try:
                self.results.put((idx, self.task(lam), None))
            except Exception as e:  # handed back to the caller
                logger.debug(f"λ={lam} failed: {e}")
                self.results.put((idx, None, e))
            self.tasks.task_done()


def fan_out(task: Callable, grid: Sequence[complex], threads: int = 1) -> list:
    """task(λ) for every grid point, in grid order. The first error (in grid order) is re-raised."""
    grid = list(grid)
    if threads <= 1 or len(grid) == 1:
        return [task(lam) for lam in grid]
    tasks, results = Queue(), Queue()
    workers = [LambdaWorker(task, tasks, results, i) for i in range(min(threads, len(grid)))]
    for w in workers:
        w.start()
    for item in enumerate(grid):
        tasks.put(item)
    for _ in workers:
        tasks.put(None)
    for w in workers:
        w.join()
    collected = sorted((results.get() for _ in grid), key=lambda r: r[0])
    for _, _, err in collected:
        if err is not None:
            raise err
    return [value for _, value, _ in collected]


def run_classify(scenario: ScenarioConfig, settings: Optional[Settings] = None) -> RunResult:
    prep = prepare(scenario, settings)
    plus, minus = kappa(prep.expr.J, prep.settings)
    row = {**prep.report.to_record(), "kappa_plus": plus, "kappa_minus": minus}
    return RunResult("classify", prep, [Table("classify", CLASSIFY_COLUMNS, [row])], [])


def _refuse_strip(prep: Prepared, force: bool):
    """Strip-regime λ are refused before any work when not forced."""
    if force:
        return
    for lam in prep.grid:
        if regime_of(complex(lam), prep.report) == "strip":
            raise UnwarrantedRegimeError(complex(lam), prep.report.alpha, prep.report.beta)


def _half_line(prep: Prepared, command: str):
    if prep.expr.interval.kind != "half_line":
        raise ScenarioError(
            prep.scenario.name, f"{command} needs a half-line expression, got {prep.expr.interval.kind}")


def _weyl_row(sample: WeylSample, p: int, limit: float) -> dict:
    row = sample.to_record()
    if sample.converged and sample.M is not None:
        try:
            schur = cayley(sample.M, sample.lam, limit)
        except CayleyError as e:
            logger.warning(f"λ={sample.lam}: {e}")
        else:
            row.update(zip(matrix_columns("Ms", p), (v for z in schur.M_s.ravel() for v in (z.real, z.imag))))
            row["schur_norm"] = schur.operator_norm
    return row


def _weyl_samples(prep: Prepared, threads: int, force: bool) -> List[WeylSample]:
    _half_line(prep, "weyl")
    _refuse_strip(prep, force)
    canon = prep.canonical
    comp = prep.scheme.completion

    def task(lam):
        return weyl_solution(canon, comp, lam, prep.sched, prep.settings, force=force, report=prep.report)

    return fan_out(task, prep.grid, threads)


def run_weyl(scenario: ScenarioConfig, threads: int = 1, force: bool = False,
             settings: Optional[Settings] = None) -> RunResult:
    prep = prepare(scenario, settings, need_boundary=True)
    samples = _weyl_samples(prep, threads, force)
    p = prep.expr.p
    limit = prep.settings.weyl.singular_condition
    rows = [_weyl_row(s, p, limit) for s in samples]
    failures = [s.lam for s in samples if not s.converged]
    _log_failures(failures)
    return RunResult("weyl", prep, [Table("msamples", weyl_columns(p), rows)], failures)


def run_sweep(scenario: ScenarioConfig, threads: int = 1, force: bool = False,
              settings: Optional[Settings] = None) -> RunResult:
    """Weyl samples plus the sign law, the L² verdict, holomorphy and the
    two-point identity against the next grid point."""
    prep = prepare(scenario, settings, need_boundary=True)
    samples = _weyl_samples(prep, threads, force)
    canon = prep.canonical
    comp = prep.scheme.completion
    p = prep.expr.p
    limit = prep.settings.weyl.singular_condition
    unitary = comp_is_j_unitary(comp, canon, prep.settings)

    def diagnostics(idx):
        s = samples[idx]
        row = _weyl_row(s, p, limit)
        if not s.converged:
            return row
        check = sign_check(s, canon, prep.report, prep.settings)
        row["min_eig_imM"] = check.min_eig_imM
        row["sign_ok"] = {"upper": check.min_eig_imM > 0, "lower": check.min_eig_imM < 0}.get(check.side)
        verdict = verify_l2_characterization(canon, s.lam, s.M, comp, settings=prep.settings)
        row["l2_verdict"] = verdict.verdict
        row["l2_ratio"] = verdict.ratio
        row["cr_residual"] = cauchy_riemann_residual(
            canon, comp, s.lam, prep.sched, prep.settings, prep.report)
        nxt = samples[idx + 1] if idx + 1 < len(samples) else None
        if unitary and nxt is not None and nxt.converged:
            row["pair_identity_next"] = herglotz_residuals(canon, comp, s, nxt, prep.settings).pair_identity
        return row

    rows = fan_out(diagnostics, range(len(samples)), threads)
    failures = [s.lam for s in samples if not s.converged]
    _log_failures(failures)
    return RunResult("sweep", prep, [Table("msamples", weyl_columns(p, sweep=True), rows)], failures)


def run_defect(scenario: ScenarioConfig, threads: int = 1,
               settings: Optional[Settings] = None) -> RunResult:
    prep = prepare(scenario, settings)
    kind = prep.expr.interval.kind
    if kind == "finite":
        theta = prep.scheme.theta if prep.scheme is not None else None
        check = finite_interval_check(prep.expr, theta, prep.settings)
        ranks = kernel_rank(prep.expr, prep.settings)
        extra = {"kernel_singular_values": ranks.singular_values, "kernel_rank_ambiguous": ranks.ambiguous}
        return RunResult("defect", prep, [Table("defects", FINITE_COLUMNS, [check.to_record()])], [], extra)
    if kind != "half_line":
        raise ScenarioError(scenario.name, f"defect needs a finite or half-line interval, got {kind}")

    def task(lam):
        return count_l2(prep.expr, lam, prep.settings, prep.report)

    reports = fan_out(task, prep.grid, threads)
    rows = [r.to_record() for r in reports]
    for r in reports:
        logger.info(f"λ={r.lam}: {r.count} L² {pluralize(r.count or 0, 'solution')} ({r.status})")
    return RunResult("defect", prep, [Table("defects", DEFECT_COLUMNS, rows)], [])


def _log_failures(failures: Sequence[complex]):
    if failures:
        logger.warning(f"{len(failures)} {pluralize(failures, 'λ-value')} did not converge: "
                       + ", ".join(str(lam) for lam in failures))


PIPELINES = {
    "classify": run_classify,
    "weyl": run_weyl,
    "defect": run_defect,
    "sweep": run_sweep,
}
