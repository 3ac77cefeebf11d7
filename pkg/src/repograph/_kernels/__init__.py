"""Hot numeric kernels with a compiled core and a pure-Python fallback.

The compiled Cython extension (``_ckernels``) is preferred; when it is not
importable (no compiler at install time) or ``REPOGRAPH_PURE_PYTHON=1`` is
set, the NumPy fallback (``_pykernels``) is used. Both backends implement
the same contracts and the same deterministic RNG (xorshift64*), so results
agree to floating-point round-off; ``benchmarks/bench_kernels.py`` compares
their throughput.
"""

import os

import numpy as np

from . import _pykernels

_impl = _pykernels
BACKEND = "python"

if os.environ.get("REPOGRAPH_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        pass


def backend() -> str:
    """Name of the active kernel backend ('compiled' or 'python')."""
    return BACKEND


def _f64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def _i64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int64)


def seg_mean_rows(x, indices, offsets) -> np.ndarray:
    """Per-segment mean of rows: out[i] = mean(x[indices[offsets[i]:offsets[i+1]]]).

    Empty segments produce zero rows.
    """
    x, indices, offsets = _f64(x), _i64(indices), _i64(offsets)
    out = np.zeros((len(offsets) - 1, x.shape[1]))
    _impl.seg_mean_rows(x, indices, offsets, out)
    return out


def seg_sum_rows(x, indices, offsets) -> np.ndarray:
    """Per-segment sum of rows (zero rows for empty segments)."""
    x, indices, offsets = _f64(x), _i64(indices), _i64(offsets)
    out = np.zeros((len(offsets) - 1, x.shape[1]))
    _impl.seg_sum_rows(x, indices, offsets, out)
    return out


def scatter_add_rows(out, idx, rows) -> None:
    """out[idx[e]] += rows[e], applied in order. ``out`` is modified in place."""
    idx = _i64(idx)
    rows = _f64(rows)
    if not (out.flags.c_contiguous and out.dtype == np.float64):
        raise ValueError("scatter_add_rows requires a C-contiguous float64 output")
    _impl.scatter_add_rows(out, idx, rows)


def spmm_edges(src, dst, coef, x, n_out: int) -> np.ndarray:
    """Edge-list sparse-dense product: out[dst[e]] += coef[e] * x[src[e]]."""
    src, dst, coef, x = _i64(src), _i64(dst), _f64(coef), _f64(x)
    out = np.zeros((n_out, x.shape[1]))
    _impl.spmm_edges(src, dst, coef, x, out)
    return out


def adam_update(p, m, v, g, lr, beta1, beta2, eps, t) -> None:
    """Fused bias-corrected Adam step, in place on ``p``/``m``/``v``."""
    g = _f64(g)
    for a in (p, m, v):
        if not (a.flags.c_contiguous and a.dtype == np.float64):
            raise ValueError("adam_update requires C-contiguous float64 arrays")
    _impl.adam_update(p.ravel(), m.ravel(), v.ravel(), g.ravel(),
                      float(lr), float(beta1), float(beta2), float(eps), int(t))


def sgns_epoch(centers, contexts, w_in, w_out, noise, k: int, lr: float,
               seed: int) -> float:
    """One skip-gram/negative-sampling pass over (center, context) pairs.

    Updates ``w_in``/``w_out`` in place and returns the mean pair loss.
    Negatives are drawn from ``noise`` (an index table) by xorshift64*.
    """
    centers, contexts, noise = _i64(centers), _i64(contexts), _i64(noise)
    for a in (w_in, w_out):
        if not (a.flags.c_contiguous and a.dtype == np.float64):
            raise ValueError("sgns_epoch requires C-contiguous float64 weights")
    return _impl.sgns_epoch(centers, contexts, w_in, w_out, noise,
                            int(k), float(lr), int(seed) & 0xFFFFFFFFFFFFFFFF)


def random_walks(indices, offsets, starts, walk_length: int, seed: int) -> np.ndarray:
    """Uniform random walks over an adjacency structure.

    Returns an (S, walk_length) int64 array padded with -1 after a walk dies
    at a node with no neighbors.
    """
    indices, offsets, starts = _i64(indices), _i64(offsets), _i64(starts)
    out = np.full((len(starts), walk_length), -1, dtype=np.int64)
    _impl.random_walks(indices, offsets, starts, out,
                       int(seed) & 0xFFFFFFFFFFFFFFFF)
    return out
