"""Text encoders: a deterministic hashed-subword default plus a remote client.

The default encoder keeps the whole pipeline hermetic: lowercase, split on
non-alphanumerics, boundary-marked character 3-grams, each gram hashed into
one of 768 signed buckets, bucket sums averaged over the token count and
L2-normalized. A transformer encoder can be swapped in through the HTTP
contract (POST /encode {texts: [...]} -> {vectors: [[...]]}), with callers
falling back to the default when the endpoint is unreachable.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

from ..errors import EncoderUnavailable

TEXT_DIM = 768

_TOKEN_RE = re.compile(r"[0-9a-z]+")


def _hash64(data: bytes, salt: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8, key=salt).digest(),
                          "little")


class HashedSubwordEncoder:
    """Deterministic 768-d bag-of-subwords embedding."""

    encoder_id = "hashed-subword-768"
    dim = TEXT_DIM

    def __init__(self, dim: int = TEXT_DIM):
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def encode(self, text: str) -> np.ndarray:
        cached = self._cache.get(text)
        if cached is not None:
            return cached.copy()
        vec = np.zeros(self.dim)
        tokens = _TOKEN_RE.findall(text.lower())
        for token in tokens:
            marked = f"<{token}>"
            for i in range(len(marked) - 2):
                gram = marked[i:i + 3].encode("utf-8")
                bucket = _hash64(gram, b"bucket") % self.dim
                sign = 1.0 if _hash64(gram, b"sign") & 1 == 0 else -1.0
                vec[bucket] += sign
        if tokens:
            vec /= len(tokens)
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec /= norm
        if len(self._cache) < 65536:
            self._cache[text] = vec.copy()
        return vec


class RemoteEncoder:
    """Client for an external embedding endpoint (dimension fixed at /info)."""

    def __init__(self, base_url: str, session=None, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        if session is None:
            import requests
            session = requests.Session()
        self._session = session
        try:
            info = self._session.get(f"{self.base_url}/info",
                                     timeout=self.timeout).json()
            self.dim = int(info["dim"])
            self.encoder_id = str(info.get("encoder_id", f"remote:{base_url}"))
        except Exception as exc:  # noqa: BLE001 - any transport/shape failure
            raise EncoderUnavailable(f"{base_url}: {exc}") from exc

    def encode(self, text: str) -> np.ndarray:
        return self.encode_batch([text])[0]

    def encode_batch(self, texts: list[str]) -> np.ndarray:
        try:
            resp = self._session.post(f"{self.base_url}/encode",
                                      json={"texts": texts}, timeout=self.timeout)
            resp.raise_for_status()
            vectors = np.asarray(resp.json()["vectors"], dtype=np.float64)
        except Exception as exc:  # noqa: BLE001
            raise EncoderUnavailable(f"{self.base_url}: {exc}") from exc
        if vectors.shape != (len(texts), self.dim):
            raise EncoderUnavailable(
                f"{self.base_url}: bad vector shape {vectors.shape}")
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        return np.divide(vectors, np.maximum(norms, 1.0),
                         out=np.zeros_like(vectors), where=norms > 0)


def encode_text(encoder, text: str) -> np.ndarray:
    """Encode with the given encoder; callers own the fallback policy."""
    return encoder.encode(text)


def get_encoder(endpoint: str | None = None, session=None):
    """Remote encoder when configured and reachable, else the default."""
    if endpoint:
        try:
            return RemoteEncoder(endpoint, session=session)
        except EncoderUnavailable:
            pass
    return HashedSubwordEncoder()
