"""Dense row-major float64 matrix and the named parameter store."""

from __future__ import annotations

import json
from typing import Iterator, Mapping

import numpy as np

from ..errors import ShapeMismatch

MASK_SENTINEL = -1e30


class Matrix:
    """2-D C-contiguous float64 matrix.

    Thin wrapper over an ndarray (exposed as ``.a``) that pins the layout
    invariants: positive shape, row-major 64-bit storage.
    """

    __slots__ = ("a",)

    def __init__(self, data, copy: bool = False):
        a = np.array(data, dtype=np.float64, copy=copy, order="C")
        if a.ndim != 2:
            raise ShapeMismatch(f"Matrix requires 2-D data, got ndim={a.ndim}")
        # zero rows are allowed (empty graphs featurize to 0x800)
        if a.shape[1] < 1:
            raise ShapeMismatch(f"Matrix requires at least one column, got {a.shape}")
        self.a = np.ascontiguousarray(a)

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def data(self) -> np.ndarray:
        """Row-major flat view of the entries."""
        return self.a.reshape(-1)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(np.zeros((rows, cols)))

    @classmethod
    def full(cls, rows: int, cols: int, value: float) -> "Matrix":
        return cls(np.full((rows, cols), float(value)))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(np.eye(n))

    @classmethod
    def from_rows(cls, rows) -> "Matrix":
        return cls(np.array(rows, dtype=np.float64))

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator,
               scale: float = 0.1) -> "Matrix":
        return cls(rng.standard_normal((rows, cols)) * scale)

    def copy(self) -> "Matrix":
        return Matrix(self.a, copy=True)

    def tolist(self) -> list[list[float]]:
        return self.a.tolist()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.a.shape == other.a.shape and bool(np.array_equal(self.a, other.a))

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols})"


def as_array(x) -> np.ndarray:
    """Accept a Matrix or ndarray and return the underlying 2-D float64 array."""
    if isinstance(x, Matrix):
        return x.a
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeMismatch(f"expected 2-D array, got ndim={a.ndim}")
    return a


_MAGIC = b"RGCK1\n"


class ParamStore:
    """Named float64 parameters with Adam moment accumulators.

    The step counter is shared across parameters and advances once per
    optimizer call. Checkpoints are byte-stable: a sorted JSON header
    followed by little-endian float64 blobs in name order.
    """

    def __init__(self, rng_seed: int = 0):
        self.rng_seed = int(rng_seed)
        self.step = 0
        self.extra: dict = {}
        self._params: dict[str, np.ndarray] = {}
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def add(self, name: str, value) -> np.ndarray:
        a = np.ascontiguousarray(as_array(value), dtype=np.float64)
        self._params[name] = a
        self._m[name] = np.zeros_like(a)
        self._v[name] = np.zeros_like(a)
        return a

    def names(self) -> list[str]:
        return sorted(self._params)

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __getitem__(self, name: str) -> np.ndarray:
        return self._params[name]

    def moments(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return self._m[name], self._v[name]

    def matrix(self, name: str) -> Matrix:
        return Matrix(self._params[name])

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        for name in self.names():
            yield name, self._params[name]

    def check_grads(self, grads: Mapping[str, np.ndarray]) -> None:
        for name, g in grads.items():
            if name not in self._params:
                raise ShapeMismatch(f"gradient for unknown parameter '{name}'")
            if np.asarray(g).shape != self._params[name].shape:
                raise ShapeMismatch(
                    f"gradient shape {np.asarray(g).shape} != parameter shape "
                    f"{self._params[name].shape} for '{name}'")

    def copy(self) -> "ParamStore":
        dup = ParamStore(self.rng_seed)
        dup.step = self.step
        dup.extra = json.loads(json.dumps(self.extra))
        for name, a in self._params.items():
            dup._params[name] = a.copy()
            dup._m[name] = self._m[name].copy()
            dup._v[name] = self._v[name].copy()
        return dup

    # -- persistence ----------------------------------------------------

    def save(self, path) -> None:
        header = {
            "extra": self.extra,
            "params": {n: list(self._params[n].shape) for n in self.names()},
            "rng_seed": self.rng_seed,
            "step": self.step,
        }
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8"))
            fh.write(b"\n")
            for name in self.names():
                fh.write(self._params[name].astype("<f8").tobytes())
                fh.write(self._m[name].astype("<f8").tobytes())
                fh.write(self._v[name].astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "ParamStore":
        with open(path, "rb") as fh:
            magic = fh.read(len(_MAGIC))
            if magic != _MAGIC:
                raise ValueError(f"{path}: not a parameter checkpoint")
            header = json.loads(fh.readline().decode("utf-8"))
            store = cls(header["rng_seed"])
            store.step = header["step"]
            store.extra = header.get("extra", {})
            for name, shape in sorted(header["params"].items()):
                count = int(np.prod(shape))
                for slot in (store._params, store._m, store._v):
                    buf = fh.read(count * 8)
                    slot[name] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
        return store
