"""Hot inner loops with a numba path and a pure-numpy path.

The numba path is used unless ``TRAJAUTH_DISABLE_NUMBA`` is set to a truthy
value (or numba cannot be imported). Both paths are always importable so the
benchmark and the tests can compare them directly.

Conv kernels operate on an already padded input ``xpad`` of shape
``(N, C_in, L + k - 1)`` and weights ``(C_out, C_in, k)``.
"""
from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

_FLAG = os.environ.get("TRAJAUTH_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no", "off")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


# ---------------------------------------------------------------------------
# numpy reference path


def conv1d_forward_numpy(xpad: np.ndarray, w: np.ndarray) -> np.ndarray:
    k = w.shape[2]
    cols = sliding_window_view(xpad, k, axis=2)  # (N, C, L, k)
    return np.einsum("nclk,ock->nol", cols, w, optimize=True)


def conv1d_backward_numpy(xpad: np.ndarray, w: np.ndarray, gy: np.ndarray):
    k = w.shape[2]
    L = gy.shape[2]
    cols = sliding_window_view(xpad, k, axis=2)
    dw = np.einsum("nol,nclk->ock", gy, cols, optimize=True)
    dcols = np.einsum("nol,ock->nclk", gy, w, optimize=True)
    dxpad = np.zeros_like(xpad)
    for j in range(k):
        dxpad[:, :, j : j + L] += dcols[..., j]
    return dxpad, dw


def count_at_thresholds_numpy(sorted_scores: np.ndarray, thresholds: np.ndarray):
    """Return (#scores >= t, #scores < t) for every threshold ``t``."""
    below = np.searchsorted(sorted_scores, thresholds, side="left")
    return sorted_scores.size - below, below


# ---------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @njit(cache=True)
    def _im2col_nb(xpad, k):
        N, C, Lp = xpad.shape
        L = Lp - k + 1
        cols = np.empty((N * L, C * k), dtype=xpad.dtype)
        for n in range(N):
            for t in range(L):
                row = n * L + t
                for c in range(C):
                    for j in range(k):
                        cols[row, c * k + j] = xpad[n, c, t + j]
        return cols

    @njit(cache=True)
    def _col2im_nb(dcols, N, C, Lp, k):
        L = Lp - k + 1
        dx = np.zeros((N, C, Lp), dtype=dcols.dtype)
        for n in range(N):
            for t in range(L):
                row = n * L + t
                for c in range(C):
                    for j in range(k):
                        dx[n, c, t + j] += dcols[row, c * k + j]
        return dx

    @njit(cache=True)
    def _count_at_thresholds_nb(sorted_scores, thresholds):
        # thresholds are ascending; single merge pass
        n = sorted_scores.size
        m = thresholds.size
        ge = np.empty(m, dtype=np.int64)
        lt = np.empty(m, dtype=np.int64)
        i = 0
        for j in range(m):
            t = thresholds[j]
            while i < n and sorted_scores[i] < t:
                i += 1
            lt[j] = i
            ge[j] = n - i
        return ge, lt

    def conv1d_forward_numba(xpad, w):
        # numba gathers the patches; the contraction itself goes to BLAS
        N, _, Lp = xpad.shape
        O, C, k = w.shape
        L = Lp - k + 1
        cols = _im2col_nb(np.ascontiguousarray(xpad), k)
        y = cols @ w.reshape(O, C * k).T
        return np.ascontiguousarray(y.reshape(N, L, O).transpose(0, 2, 1))

    def conv1d_backward_numba(xpad, w, gy):
        N, _, Lp = xpad.shape
        O, C, k = w.shape
        L = gy.shape[2]
        cols = _im2col_nb(np.ascontiguousarray(xpad), k)
        g2 = np.ascontiguousarray(gy.transpose(0, 2, 1)).reshape(N * L, O)
        dw = (g2.T @ cols).reshape(O, C, k)
        dcols = g2 @ np.ascontiguousarray(w).reshape(O, C * k)
        return _col2im_nb(dcols, N, C, Lp, k), dw

    def count_at_thresholds_numba(sorted_scores, thresholds):
        return _count_at_thresholds_nb(
            np.ascontiguousarray(sorted_scores, dtype=np.float64),
            np.ascontiguousarray(thresholds, dtype=np.float64),
        )

else:  # pragma: no cover
    conv1d_forward_numba = conv1d_forward_numpy
    conv1d_backward_numba = conv1d_backward_numpy
    count_at_thresholds_numba = count_at_thresholds_numpy


if USE_NUMBA:
    conv1d_forward = conv1d_forward_numba
    conv1d_backward = conv1d_backward_numba
    count_at_thresholds = count_at_thresholds_numba
else:
    conv1d_forward = conv1d_forward_numpy
    conv1d_backward = conv1d_backward_numpy
    count_at_thresholds = count_at_thresholds_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
