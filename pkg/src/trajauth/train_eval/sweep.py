"""Grid sweep over (variant, w, w_in, user) cells.

Every cell is an independent job that owns its models; results are merged
back in job order, so the report does not depend on worker scheduling.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..config import expand_variant, parse_variant
from ..errors import NumericalError, TrajAuthError
from ..ingest import Corpus
from ..windows import session_split, user_seed
from .training import ExperimentSpec, EvalRow, eval_user, train_user, windows_code

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Job:
    variant: str
    w: int
    w_in: int
    user: str
    spec: ExperimentSpec  # seed already specialised for this cell


@dataclass
class CellResult:
    variant: str
    w: int
    w_in: int
    user: str
    forecast_mse: float = float("nan")
    eer: float = float("nan")
    threshold: float = float("nan")
    genuine_scores: np.ndarray = field(default_factory=lambda: np.zeros(0))
    impostor_scores: np.ndarray = field(default_factory=lambda: np.zeros(0))
    notes: list[str] = field(default_factory=list)
    error: str = ""
    numerical: bool = False

    @property
    def ok(self) -> bool:
        return not self.error

    @property
    def key(self) -> tuple[str, int, int]:
        return self.variant, self.w, self.w_in


@dataclass
class SweepResult:
    cells: list[CellResult]
    grid: tuple[tuple[int, int], ...]
    variants: tuple[str, ...]
    users: tuple[str, ...]
    base: ExperimentSpec

    @property
    def failed(self) -> list[CellResult]:
        return [c for c in self.cells if not c.ok]


def make_jobs(users, grid, variants, base: ExperimentSpec) -> list[Job]:
    jobs = []
    for variant in variants:
        variant = expand_variant(variant)
        for w, w_in in grid:
            for user in users:
                seed = user_seed(base.seed, f"{variant}/{w}/{w_in}/{user}") % 2**32
                spec = replace(base, variant=variant, w=w, w_in=w_in, seed=seed)
                jobs.append(Job(variant, w, w_in, user, spec))
    return jobs


def run_cell(corpus: Corpus, job: Job, window_seed: int = 0) -> CellResult:
    """Train on session 1, evaluate on session 2; failures become error rows."""
    cell = CellResult(job.variant, job.w, job.w_in, job.user)
    try:
        spec = job.spec.resolved()
        train, test = session_split(
            corpus, job.user, job.w, job.w_in, spec.stride, window_seed, windows_code(job.variant)
        )
        result = train_user(spec, train)
        row: EvalRow = eval_user(result.traj, result.auth, test, job.variant)
    except NumericalError as exc:
        cell.error, cell.numerical = f"numerical: {exc}", True
        return cell
    except (TrajAuthError, ValueError) as exc:
        cell.error = f"{type(exc).__name__}: {exc}"
        return cell
    cell.forecast_mse, cell.eer, cell.threshold = row.forecast_mse, row.eer, row.threshold
    cell.genuine_scores, cell.impostor_scores = row.genuine_scores, row.impostor_scores
    cell.notes = row.notes
    return cell


def run_li_baseline(corpus: Corpus, user: str, w: int, w_in: int, **spec_kwargs) -> CellResult:
    """The 3D-from-3D baseline for one user and window pair."""
    base = ExperimentSpec("li", w, w_in, **spec_kwargs)
    return run_cell(corpus, Job(base.variant, w, w_in, user, base))


# worker processes receive the corpus once, through the pool initializer
_WORKER_CORPUS: Corpus | None = None


def _init_worker(corpus: Corpus) -> None:
    global _WORKER_CORPUS
    _WORKER_CORPUS = corpus


def _run_in_worker(args) -> CellResult:
    job, window_seed = args
    return run_cell(_WORKER_CORPUS, job, window_seed)


def sweep(
    corpus: Corpus,
    grid,
    variants,
    base: ExperimentSpec | None = None,
    users=None,
    workers: int = 1,
) -> SweepResult:
    base = base or ExperimentSpec()
    users = tuple(users or corpus.users)
    variants = tuple(expand_variant(v) for v in variants)
    for v in variants:
        parse_variant(v)
    grid = tuple(tuple(g) for g in grid)
    jobs = make_jobs(users, grid, variants, base)
    log.info("sweep: %d cells on %d worker(s)", len(jobs), workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(corpus,)) as pool:
            cells = list(pool.map(_run_in_worker, [(j, base.seed) for j in jobs]))
    else:
        cells = []
        for j in jobs:
            cells.append(run_cell(corpus, j, base.seed))
            c = cells[-1]
            log.info("%s w=%d w_in=%d %s: eer=%.4f %s", c.variant, c.w, c.w_in, c.user, c.eer, c.error)
    return SweepResult(cells, grid, variants, users, base)
