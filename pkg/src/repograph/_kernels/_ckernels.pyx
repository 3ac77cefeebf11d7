# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core. Mirrors ``_pykernels`` including the RNG stream."""

from libc.math cimport exp, log, sqrt

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef unsigned long long u64

cdef u64 _XORSHIFT_MULT = 2685821657736338717ULL


cdef inline u64 _xorshift_next(u64* state) nogil:
    cdef u64 s = state[0]
    s ^= s >> 12
    s ^= s << 25
    s ^= s >> 27
    state[0] = s
    return s * _XORSHIFT_MULT


cdef inline long _rand_below(u64* state, long n) nogil:
    return <long>((_xorshift_next(state) >> 32) % <u64>n)


def seg_mean_rows(double[:, ::1] x, long[::1] indices, long[::1] offsets,
                  double[:, ::1] out):
    cdef Py_ssize_t i, j, d, lo, hi
    cdef Py_ssize_t n_seg = offsets.shape[0] - 1
    cdef Py_ssize_t dim = x.shape[1]
    cdef double inv
    with nogil:
        for i in range(n_seg):
            lo = offsets[i]
            hi = offsets[i + 1]
            if hi <= lo:
                continue
            for j in range(lo, hi):
                for d in range(dim):
                    out[i, d] += x[indices[j], d]
            inv = 1.0 / (hi - lo)
            for d in range(dim):
                out[i, d] *= inv


def seg_sum_rows(double[:, ::1] x, long[::1] indices, long[::1] offsets,
                 double[:, ::1] out):
    cdef Py_ssize_t i, j, d, lo, hi
    cdef Py_ssize_t n_seg = offsets.shape[0] - 1
    cdef Py_ssize_t dim = x.shape[1]
    with nogil:
        for i in range(n_seg):
            lo = offsets[i]
            hi = offsets[i + 1]
            for j in range(lo, hi):
                for d in range(dim):
                    out[i, d] += x[indices[j], d]


def scatter_add_rows(double[:, ::1] out, long[::1] idx, double[:, ::1] rows):
    cdef Py_ssize_t e, d
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t dim = rows.shape[1]
    with nogil:
        for e in range(n):
            for d in range(dim):
                out[idx[e], d] += rows[e, d]


def spmm_edges(long[::1] src, long[::1] dst, double[::1] coef,
               double[:, ::1] x, double[:, ::1] out):
    cdef Py_ssize_t e, d
    cdef Py_ssize_t n = src.shape[0]
    cdef Py_ssize_t dim = x.shape[1]
    cdef double c
    with nogil:
        for e in range(n):
            c = coef[e]
            for d in range(dim):
                out[dst[e], d] += c * x[src[e], d]


def adam_update(double[::1] p, double[::1] m, double[::1] v, double[::1] g,
                double lr, double beta1, double beta2, double eps, long t):
    cdef Py_ssize_t i
    cdef Py_ssize_t n = p.shape[0]
    cdef double bc1 = 1.0 - beta1 ** t
    cdef double bc2 = 1.0 - beta2 ** t
    with nogil:
        for i in range(n):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]
            p[i] -= lr * (m[i] / bc1) / (sqrt(v[i] / bc2) + eps)


cdef inline double _sigmoid(double z) nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def sgns_epoch(long[::1] centers, long[::1] contexts,
               double[:, ::1] w_in, double[:, ::1] w_out,
               long[::1] noise, long k, double lr, u64 seed):
    cdef u64 state = seed | 1
    cdef Py_ssize_t n_pairs = centers.shape[0]
    cdef Py_ssize_t dim = w_in.shape[1]
    cdef long n_noise = <long>noise.shape[0]
    cdef Py_ssize_t i, d
    cdef long j, c, pos, target
    cdef double label, z, pr, g, total = 0.0
    cdef cnp.ndarray[double, ndim=1] buf = np.zeros(dim)
    cdef double[::1] grad_in = buf
    with nogil:
        for i in range(n_pairs):
            c = centers[i]
            pos = contexts[i]
            for d in range(dim):
                grad_in[d] = 0.0
            for j in range(k + 1):
                if j == 0:
                    target = pos
                    label = 1.0
                else:
                    target = noise[_rand_below(&state, n_noise)]
                    if target == pos:
                        continue
                    label = 0.0
                z = 0.0
                for d in range(dim):
                    z += w_in[c, d] * w_out[target, d]
                pr = _sigmoid(z)
                if label == 1.0:
                    total += -log(pr if pr > 1e-12 else 1e-12)
                else:
                    total += -log((1.0 - pr) if (1.0 - pr) > 1e-12 else 1e-12)
                g = lr * (label - pr)
                for d in range(dim):
                    grad_in[d] += g * w_out[target, d]
                    w_out[target, d] += g * w_in[c, d]
            for d in range(dim):
                w_in[c, d] += grad_in[d]
    return total / n_pairs if n_pairs else 0.0


def random_walks(long[::1] indices, long[::1] offsets, long[::1] starts,
                 long[:, ::1] out, u64 seed):
    cdef u64 state = seed | 1
    cdef Py_ssize_t s, step
    cdef Py_ssize_t n_starts = starts.shape[0]
    cdef Py_ssize_t walk_length = out.shape[1]
    cdef long node, lo, deg
    with nogil:
        for s in range(n_starts):
            node = starts[s]
            out[s, 0] = node
            for step in range(1, walk_length):
                lo = offsets[node]
                deg = offsets[node + 1] - lo
                if deg == 0:
                    break
                node = indices[lo + _rand_below(&state, deg)]
                out[s, step] = node
