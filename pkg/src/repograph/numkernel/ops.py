"""Differentiable primitives: matmul, masked row softmax, BCE, Adam."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .. import _kernels
from ..errors import AllMaskedRow, ShapeMismatch
from .matrix import MASK_SENTINEL, Matrix, ParamStore, as_array


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product with exact shape checking."""
    aa, ba = as_array(a), as_array(b)
    if aa.shape[1] != ba.shape[0]:
        raise ShapeMismatch(f"matmul: {aa.shape} x {ba.shape}")
    return Matrix(aa @ ba)


def row_softmax_arr(m: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Numerically stable per-row softmax; masked entries are exactly 0.

    ``mask`` is boolean with True = valid. A row with no valid entries
    raises AllMaskedRow.
    """
    m = np.asarray(m, dtype=np.float64)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != m.shape:
            raise ShapeMismatch(f"mask shape {mask.shape} != {m.shape}")
        if not mask.any(axis=1).all():
            bad = int(np.flatnonzero(~mask.any(axis=1))[0])
            raise AllMaskedRow(f"row {bad} has no unmasked entries")
        work = np.where(mask, m, -np.inf)
    else:
        work = m
    peak = work.max(axis=1, keepdims=True)
    ex = np.exp(work - peak)
    if mask is not None:
        ex = np.where(mask, ex, 0.0)
    return ex / ex.sum(axis=1, keepdims=True)


def row_softmax(m: Matrix, mask: Matrix | None = None) -> Matrix:
    mask_arr = None
    if mask is not None:
        mask_arr = as_array(mask) != 0.0
    return Matrix(row_softmax_arr(as_array(m), mask_arr))


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Elementwise logistic function, stable for large |z|."""
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_loss_arr(scores: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape:
        raise ShapeMismatch(f"bce_loss: {scores.shape} vs {labels.shape}")
    # log(1 + exp(-|s|)) form avoids overflow for any score magnitude
    per_elem = np.maximum(scores, 0.0) - scores * labels + np.log1p(np.exp(-np.abs(scores)))
    n = scores.size
    grad = (sigmoid(scores) - labels) / n
    return float(per_elem.mean()), grad


def bce_loss(scores: Matrix, labels: Matrix) -> tuple[float, Matrix]:
    """Mean binary cross-entropy of sigmoid(scores) against {0,1} labels.

    Returns (loss, gradient wrt scores).
    """
    loss, grad = bce_loss_arr(as_array(scores), as_array(labels))
    return loss, Matrix(grad)


def adam_step(store: ParamStore, grads: Mapping[str, np.ndarray],
              lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> None:
    """Bias-corrected Adam update over all parameters named in ``grads``.

    The store's shared step counter advances once per call; parameters
    without a gradient entry are left untouched.
    """
    store.check_grads(grads)
    store.step += 1
    for name in sorted(grads):
        g = np.ascontiguousarray(as_array(grads[name]) if np.asarray(grads[name]).ndim == 2
                                 else np.asarray(grads[name], dtype=np.float64))
        p = store[name]
        m, v = store.moments(name)
        _kernels.adam_update(p, m, v, g, lr, beta1, beta2, eps, store.step)


__all__ = [
    "MASK_SENTINEL", "matmul", "row_softmax", "row_softmax_arr", "sigmoid",
    "bce_loss", "bce_loss_arr", "adam_step",
]
