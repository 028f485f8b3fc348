"""Equal error rate and forecast error."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import kernels


@dataclass(frozen=True)
class EERResult:
    eer: float
    threshold: float
    curve: list[tuple[float, float, float]]  # (threshold, FAR, FRR), ascending threshold


def compute_eer(genuine_scores, impostor_scores) -> EERResult:
    """EER over the discrete threshold sweep.

    Thresholds are the sorted union of all scores. FAR(θ) is the share of
    impostor scores ``>= θ``, FRR(θ) the share of genuine scores ``< θ``.
    The EER is ``(FAR + FRR) / 2`` at the threshold minimising ``|FAR - FRR|``;
    ties go to the lowest threshold.
    """
    g = np.sort(np.asarray(genuine_scores, dtype=np.float64).ravel())
    i = np.sort(np.asarray(impostor_scores, dtype=np.float64).ravel())
    if g.size == 0 or i.size == 0:
        raise ValueError("compute_eer needs non-empty genuine and impostor score lists")
    thresholds = np.unique(np.concatenate([g, i]))
    imp_ge, _ = kernels.count_at_thresholds(i, thresholds)
    _, gen_lt = kernels.count_at_thresholds(g, thresholds)
    far = imp_ge / i.size
    frr = gen_lt / g.size
    k = int(np.argmin(np.abs(far - frr)))
    curve = list(zip(thresholds.tolist(), far.tolist(), frr.tolist()))
    return EERResult(float((far[k] + frr[k]) / 2), float(thresholds[k]), curve)


def forecast_mse(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean over windows of the per-window mean squared error."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    per_window = ((pred - target) ** 2).reshape(len(pred), -1).mean(axis=1)
    return float(per_window.mean())
