"""Closed-form perceptron fit and coefficient of determination (COD).

Inputs are laid out genes x samples: ``X`` is k x n, ``Y`` has length n.
A constant-1 bias row is appended to ``X`` before forming the normal
equations, so weight vectors have length k + 1 with the bias last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantTarget, DimensionMismatch

__all__ = [
    "PINV_RTOL",
    "PREDICT_CUTOFF",
    "CodResult",
    "pinv",
    "solve_perceptron",
    "solve_perceptron_batch",
    "predict",
    "predict_many",
    "compute_cod",
    "cod_batch",
]

PINV_RTOL = 1e-10
PREDICT_CUTOFF = 0.5
# Slack on the cutoff so that outputs equal to 0.5 up to rounding map to 1.
_CUTOFF_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class CodResult:
    theta: float
    weights: np.ndarray
    resubstitution_error: float
    baseline_error: float


def pinv(a: np.ndarray, rtol: float = PINV_RTOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse by SVD, over the last two axes.

    Singular values below ``rtol * sigma_max`` are treated as zero.
    """
    a = np.asarray(a, dtype=float)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    cutoff = rtol * s.max(axis=-1, keepdims=True)
    keep = (s >= cutoff) & (s > 0)
    inv_s = np.divide(1.0, s, out=np.zeros_like(s), where=keep)
    return np.matmul(np.swapaxes(vt, -1, -2) * inv_s[..., None, :], np.swapaxes(u, -1, -2))


def _augment(X: np.ndarray) -> np.ndarray:
    ones = np.ones(X.shape[:-2] + (1, X.shape[-1]))
    return np.concatenate([X, ones], axis=-2)


def solve_perceptron_batch(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Least-squares weights for a stack of input matrices.

    ``X`` has shape (..., k, n) and ``Y`` shape (n,) or (..., n). Returns
    weights of shape (..., k + 1).
    """
    Xa = _augment(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float)
    R = Xa @ np.swapaxes(Xa, -1, -2)
    C = Xa @ Y[..., None]
    return (pinv(R) @ C)[..., 0]


def solve_perceptron(X, Y) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 1 or X.shape[1] != Y.size or Y.size < 1:
        raise DimensionMismatch(f"X is {X.shape}, Y has shape {Y.shape}")
    return solve_perceptron_batch(X, Y)


def predict_many(w: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Thresholded outputs for every sample column of ``X`` (..., k, n)."""
    w = np.asarray(w, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.shape[-2] + 1 != w.shape[-1]:
        raise DimensionMismatch(f"{w.shape[-1] - 1} input weights but {X.shape[-2]} input rows")
    y = np.einsum("...k,...kn->...n", w[..., :-1], X) + w[..., -1:]
    return (y >= PREDICT_CUTOFF - _CUTOFF_SLACK).astype(np.uint8)


def predict(w, x) -> int:
    """1 iff ``w . (x, 1) >= 0.5``."""
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size + 1 != w.size:
        raise DimensionMismatch(f"{w.size - 1} input weights but input of length {x.size}")
    return int(predict_many(w, x[:, None])[0])


def _error_counts(pred: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.count_nonzero(pred != Y, axis=-1)


def cod_batch(X: np.ndarray, Y: np.ndarray, Xpinv: np.ndarray | None = None):
    """Score a stack of candidate inputs ``X`` (c, k, n) against one target.

    ``Xpinv`` may carry precomputed pseudoinverses of the augmented normal
    matrices (they do not depend on the target). Returns
    ``(theta, weights, error_counts, baseline_count)``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y)
    n = Y.size
    ones = int(np.count_nonzero(Y))
    baseline = min(ones, n - ones)
    if baseline == 0:
        raise ConstantTarget("target is constant; its baseline error is zero")
    Xa = _augment(X)
    if Xpinv is None:
        Xpinv = pinv(Xa @ np.swapaxes(Xa, -1, -2))
    w = (Xpinv @ (Xa @ Y.astype(float))[..., None])[..., 0]
    errors = _error_counts(predict_many(w, X), Y)
    theta = (baseline - errors) / baseline
    return theta, w, errors, baseline


def compute_cod(X, Y) -> CodResult:
    """COD of a perceptron on inputs ``X`` (k x n) for binary target ``Y``.

    ``e`` is the resubstitution misclassification rate of the fitted
    perceptron; the baseline is the best constant predictor,
    ``min(p1, 1 - p1)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y).astype(np.uint8)
    if Y.ndim != 1 or X.shape[1] != Y.size:
        raise DimensionMismatch(f"X is {X.shape}, Y has shape {Y.shape}")
    theta, w, errors, baseline = cod_batch(X[None], Y)
    n = Y.size
    return CodResult(
        theta=float(theta[0]),
        weights=w[0],
        resubstitution_error=int(errors[0]) / n,
        baseline_error=baseline / n,
    )
