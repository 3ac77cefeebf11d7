"""NumPy fallback implementations of the hot kernels.

Mirrors ``_ckernels.pyx`` operation for operation, including the xorshift64*
RNG stream, so the two backends are interchangeable.
"""

import math

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_XORSHIFT_MULT = 2685821657736338717


def _xorshift_next(state: int) -> tuple[int, int]:
    state ^= (state >> 12)
    state ^= (state << 25) & _MASK64
    state ^= (state >> 27)
    return state, (state * _XORSHIFT_MULT) & _MASK64


def _rand_below(state: int, n: int) -> tuple[int, int]:
    state, value = _xorshift_next(state)
    return state, (value >> 32) % n


def seg_mean_rows(x, indices, offsets, out) -> None:
    for i in range(len(offsets) - 1):
        lo, hi = offsets[i], offsets[i + 1]
        if hi > lo:
            out[i] = x[indices[lo:hi]].sum(axis=0) / (hi - lo)


def seg_sum_rows(x, indices, offsets, out) -> None:
    for i in range(len(offsets) - 1):
        lo, hi = offsets[i], offsets[i + 1]
        if hi > lo:
            out[i] = x[indices[lo:hi]].sum(axis=0)


def scatter_add_rows(out, idx, rows) -> None:
    np.add.at(out, idx, rows)


def spmm_edges(src, dst, coef, x, out) -> None:
    np.add.at(out, dst, x[src] * coef[:, None])


def adam_update(p, m, v, g, lr, beta1, beta2, eps, t) -> None:
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * g * g
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def sgns_epoch(centers, contexts, w_in, w_out, noise, k, lr, seed) -> float:
    state = seed | 1
    n_noise = len(noise)
    total = 0.0
    n_pairs = len(centers)
    grad_in = np.zeros(w_in.shape[1])
    for i in range(n_pairs):
        c = centers[i]
        pos = contexts[i]
        grad_in[:] = 0.0
        vin = w_in[c]
        for j in range(k + 1):
            if j == 0:
                target, label = pos, 1.0
            else:
                state, r = _rand_below(state, n_noise)
                target = noise[r]
                if target == pos:
                    continue
                label = 0.0
            vout = w_out[target]
            p = _sigmoid(float(vin @ vout))
            total += -math.log(max(p if label else 1.0 - p, 1e-12))
            g = lr * (label - p)
            grad_in += g * vout
            vout += g * vin
        vin += grad_in
    return total / n_pairs if n_pairs else 0.0


def random_walks(indices, offsets, starts, out, seed) -> None:
    state = seed | 1
    walk_length = out.shape[1]
    for s in range(len(starts)):
        node = starts[s]
        out[s, 0] = node
        for step in range(1, walk_length):
            lo, hi = offsets[node], offsets[node + 1]
            deg = hi - lo
            if deg == 0:
                break
            state, r = _rand_below(state, deg)
            node = indices[lo + r]
            out[s, step] = node
