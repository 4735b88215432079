"""Embedding providers: a deterministic character-trigram reference provider,
a precomputed-vectors file provider, and a remote HTTP provider.

A provider maps texts to fixed-dimension vectors; node similarity is the
cosine between mean member vectors.  Zero vectors have cosine 0 with
everything, so degenerate inputs never merge.
"""

from __future__ import annotations

import time
import zlib
from pathlib import Path
from typing import Protocol

import httpx
import numpy as np

from .errors import ParseError, ProviderError, ResourceError


class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, texts: list[str]) -> list[np.ndarray]: ...


def unit(vector: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        return vector
    return vector / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


class TrigramProvider:
    """Boundary-padded character-trigram counts, feature-hashed and normalized."""

    def __init__(self, dimension: int = 4096):
        self.dimension = dimension
        self._cache: dict[str, np.ndarray] = {}

    def _vector(self, text: str) -> np.ndarray:
        cached = self._cache.get(text)
        if cached is not None:
            return cached
        padded = "^" + text.lower() + "$"
        vec = np.zeros(self.dimension, dtype=np.float64)
        for i in range(len(padded) - 2):
            trigram = padded[i : i + 3]
            vec[zlib.crc32(trigram.encode("utf-8")) % self.dimension] += 1.0
        vec = unit(vec)
        self._cache[text] = vec
        return vec

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        return [self._vector(t) for t in texts]


class VectorsFileProvider:
    """Vectors from a TSV file: text TAB space-separated decimals."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.vectors: dict[str, np.ndarray] = {}
        self.dimension = 0
        self._load()

    def _load(self) -> None:
        try:
            raw = self.path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ResourceError(f"cannot read vectors file {self.path}: {exc}") from exc
        for lineno, line in enumerate(raw.splitlines(), start=1):
            if not line.strip():
                continue
            text, sep, rest = line.partition("\t")
            if not sep or not text:
                raise ParseError("expected 'text<TAB>values'", line=lineno, path=str(self.path))
            try:
                values = np.array([float(v) for v in rest.split()], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"bad vector value: {exc}", line=lineno, path=str(self.path))
            if values.size == 0:
                raise ParseError("empty vector", line=lineno, path=str(self.path))
            if self.dimension == 0:
                self.dimension = int(values.size)
            elif values.size != self.dimension:
                raise ParseError(
                    f"dimension {values.size} != {self.dimension}",
                    line=lineno,
                    path=str(self.path),
                )
            self.vectors[text] = values

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        out = []
        for t in texts:
            vec = self.vectors.get(t)
            if vec is None:
                vec = self.vectors.get(t.lower())
            if vec is None:
                raise ProviderError(f"no precomputed vector for text: {t!r}")
            out.append(vec)
        return out


class RemoteProvider:
    """Remote embedding service: POST {"texts": [...]} -> {"vectors": [[...]]}."""

    def __init__(self, url: str, timeout: float = 30.0, retries: int = 2, backoff: float = 0.5):
        self.url = url
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.dimension = 0
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        missing = [t for t in texts if t not in self._cache]
        if missing:
            for vec, text in zip(self._request(missing), missing):
                self._cache[text] = vec
        return [self._cache[t] for t in texts]

    def _request(self, texts: list[str]) -> list[np.ndarray]:
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = httpx.post(self.url, json={"texts": texts}, timeout=self.timeout)
                response.raise_for_status()
                payload = response.json()
                vectors = payload["vectors"]
                if len(vectors) != len(texts):
                    raise ProviderError(
                        f"provider returned {len(vectors)} vectors for {len(texts)} texts"
                    )
                out = [np.asarray(v, dtype=np.float64) for v in vectors]
                for vec in out:
                    if self.dimension == 0:
                        self.dimension = int(vec.size)
                    elif vec.size != self.dimension:
                        raise ProviderError("provider returned inconsistent dimensions")
                return out
            except ProviderError:
                raise
            except Exception as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(self.backoff * (2**attempt))
        raise ProviderError(f"embedding service failed after retries: {last_error}")
