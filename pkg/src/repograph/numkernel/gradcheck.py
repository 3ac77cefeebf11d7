"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from .matrix import ParamStore

LossAndGrads = tuple[float, Mapping[str, np.ndarray]]


def gradient_check(f: Callable[[ParamStore], LossAndGrads], store: ParamStore,
                   epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``f`` must be a pure function of the store's parameters returning
    ``(loss, grads)``. Every coordinate of every parameter is perturbed, so
    call this on small models only. The error for one coordinate is
    ``|g_a - g_fd| / max(1e-8, |g_a| + |g_fd|)``.
    """
    _, grads = f(store)
    worst = 0.0
    for name in store.names():
        p = store[name]
        g = np.asarray(grads[name], dtype=np.float64)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up, _ = f(store)
            flat[i] = orig - epsilon
            down, _ = f(store)
            flat[i] = orig
            fd = (up - down) / (2.0 * epsilon)
            ga = gflat[i]
            rel = abs(ga - fd) / max(1e-8, abs(ga) + abs(fd))
            worst = max(worst, rel)
    return worst
