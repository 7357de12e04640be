"""Support functions deciding whether one answer backs up another.

Names are compared by exact match after normalization (case folding to
lowercase, punctuation removal, whitespace collapsing).  Descriptions are
compared by cosine similarity of their embeddings against a strict
threshold.
"""

from __future__ import annotations

import enum
import hashlib
import os
import threading
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError, MatcherError


class MatchMode(str, enum.Enum):
    NAME = "name"
    DESCRIPTION = "description"


@lru_cache(maxsize=1 << 16)
def normalize_name(s: str) -> str:
    lowered = s.lower()
    stripped = "".join(ch for ch in lowered if unicodedata.category(ch)[0] != "P")
    return " ".join(stripped.split())


def phi_name(a: str, b: str) -> bool:
    na = normalize_name(a)
    return bool(na) and na == normalize_name(b)


# -- embeddings --------------------------------------------------------------

def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return (
        0x3040 <= cp <= 0x30FF  # hiragana, katakana
        or 0x3400 <= cp <= 0x4DBF
        or 0x4E00 <= cp <= 0x9FFF
        or 0xAC00 <= cp <= 0xD7AF  # hangul syllables
        or 0x1100 <= cp <= 0x11FF
        or 0xF900 <= cp <= 0xFAFF
        or 0x20000 <= cp <= 0x2FA1F
    )


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens; CJK characters become one token each."""
    cleaned = "".join(
        " " if unicodedata.category(ch)[0] == "P" else ch for ch in text.lower()
    )
    tokens = []
    for word in cleaned.split():
        run = []
        for ch in word:
            if _is_cjk(ch):
                if run:
                    tokens.append("".join(run))
                    run = []
                tokens.append(ch)
            else:
                run.append(ch)
        if run:
            tokens.append("".join(run))
    return tokens


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def fallback_embed(text: str, dim: int = 256) -> np.ndarray:
    """Hashed bag-of-tokens vector, L2-normalized (zero vector for no tokens)."""
    if dim <= 0:
        raise ValueError("dim must be positive")
    vec = np.zeros(dim, dtype=np.float64)
    for tok in tokenize(text):
        vec[_bucket(tok, dim)] += 1.0
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    if denom == 0:
        return 0.0
    return float(np.dot(a, b) / denom)


class HashingEmbedder:
    """Deterministic, dependency-free embedding provider."""

    def __init__(self, dim=256):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.name = f"hashing-{dim}"
        self.dim = dim

    def embed(self, text):
        return fallback_embed(text, self.dim)


class HttpEmbedder:
    """Client for ``POST /embed {"text": ...} -> {"vector": [...]}``."""

    def __init__(self, endpoint, dim=None, timeout=30.0, transport=None, name="http"):
        import httpx

        self.name = name
        self.dim = dim
        self._client = httpx.Client(base_url=endpoint, timeout=timeout, transport=transport)

    @classmethod
    def from_env(cls, **kwargs):
        endpoint = os.environ.get("KGE_EMBED_ENDPOINT")
        if not endpoint:
            raise ConfigError("KGE_EMBED_ENDPOINT is not set")
        return cls(endpoint, **kwargs)

    def embed(self, text):
        import httpx

        try:
            resp = self._client.post("/embed", json={"text": text})
            resp.raise_for_status()
            vector = np.asarray(resp.json()["vector"], dtype=np.float64)
        except (httpx.HTTPError, KeyError, TypeError, ValueError) as exc:
            raise MatcherError(f"embedding request failed: {exc}") from exc
        if vector.ndim != 1 or not np.all(np.isfinite(vector)):
            raise MatcherError("embedding provider returned a malformed vector")
        if self.dim is not None and vector.shape[0] != self.dim:
            raise MatcherError(f"expected dim {self.dim}, got {vector.shape[0]}")
        return vector


class CachedEmbedder:
    """Thread-safe exact-text memo in front of another provider."""

    def __init__(self, provider):
        self.provider = provider
        self.name = provider.name
        self.dim = provider.dim
        self._cache = {}
        self._lock = threading.Lock()

    def embed(self, text):
        with self._lock:
            hit = self._cache.get(text)
        if hit is not None:
            return hit
        vec = self.provider.embed(text)
        with self._lock:
            return self._cache.setdefault(text, vec)

    def __len__(self):
        return len(self._cache)


@dataclass
class MatcherConfig:
    mode: MatchMode = MatchMode.NAME
    similarity_threshold: float = 0.5
    embedding_provider: object = None
    errors: int = field(default=0, compare=False)

    def __post_init__(self):
        self.mode = MatchMode(self.mode)
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must lie in (0, 1]")
        if self.mode is MatchMode.DESCRIPTION and self.embedding_provider is None:
            self.embedding_provider = CachedEmbedder(HashingEmbedder())
        self._lock = threading.Lock()

    def count_error(self):
        with self._lock:
            self.errors += 1


def phi_desc(a: str, b: str, cfg: MatcherConfig) -> bool:
    if cfg.mode is not MatchMode.DESCRIPTION:
        raise ValueError("phi_desc requires a description-mode matcher")
    va = cfg.embedding_provider.embed(a)
    vb = cfg.embedding_provider.embed(b)
    return cosine(va, vb) > cfg.similarity_threshold


def supports(a: str, b: str, cfg: MatcherConfig) -> bool:
    """Mode-dispatching support test; provider failures count as no support."""
    if cfg.mode is MatchMode.NAME:
        return phi_name(a, b)
    try:
        return phi_desc(a, b, cfg)
    except MatcherError:
        cfg.count_error()
        return False

