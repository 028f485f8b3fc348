"""Training, evaluation, grid sweeps and report rendering."""
from .metrics import EERResult, compute_eer, forecast_mse
from .sweep import CellResult, SweepResult, make_jobs, run_cell, run_li_baseline, sweep
from .training import (
    ExperimentSpec,
    EvalRow,
    TrainResult,
    eval_user,
    load_bundle,
    loss_total,
    save_bundle,
    train_user,
    variant_arrays,
)

__all__ = [
    "CellResult",
    "EERResult",
    "EvalRow",
    "ExperimentSpec",
    "SweepResult",
    "TrainResult",
    "compute_eer",
    "eval_user",
    "forecast_mse",
    "load_bundle",
    "loss_total",
    "make_jobs",
    "run_cell",
    "run_li_baseline",
    "save_bundle",
    "sweep",
    "train_user",
    "variant_arrays",
]
