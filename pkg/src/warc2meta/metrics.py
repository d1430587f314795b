"""String and embedding similarity metrics.

Levenshtein compares NFC-normalized strings case-sensitively over
Unicode scalar values. The embedding-based score uses greedy matching
over a token-pair cosine matrix with no IDF weighting and no baseline
rescaling, so results are directly comparable across providers.
"""

import hashlib
import unicodedata
from typing import List, Protocol, Tuple

import numpy as np
import requests

from ._accel import levenshtein_codes
from .errors import EmptyText


def levenshtein(a: str, b: str) -> int:
    """Minimum single-character edit count between a and b."""
    a = unicodedata.normalize("NFC", a)
    b = unicodedata.normalize("NFC", b)
    if a == b:
        return 0
    arr_a = np.array([ord(c) for c in a], dtype=np.int32)
    arr_b = np.array([ord(c) for c in b], dtype=np.int32)
    return levenshtein_codes(arr_a, arr_b)


class EmbeddingProvider(Protocol):
    def embed(self, text: str) -> List[Tuple[str, np.ndarray]]:
        """Per-token unit-norm vectors for text, deterministic per provider."""
        ...


class MockEmbeddingProvider:
    """Deterministic hash-seeded embeddings for offline tests.

    Each distinct token maps to a fixed unit vector; identical texts
    always embed identically across processes.
    """

    def __init__(self, dim: int = 16):
        self.dim = dim
        self._cache = {}

    def _vector(self, token: str) -> np.ndarray:
        if token not in self._cache:
            seed = int.from_bytes(
                hashlib.sha256(token.encode("utf-8")).digest()[:8], "big"
            )
            rng = np.random.default_rng(seed)
            v = rng.standard_normal(self.dim)
            self._cache[token] = v / np.linalg.norm(v)
        return self._cache[token]

    def embed(self, text: str) -> List[Tuple[str, np.ndarray]]:
        tokens = text.split()
        return [(t, self._vector(t)) for t in tokens]


class HttpEmbeddingProvider:
    """Client for an embeddings endpoint that returns per-token vectors.

    Wire format: POST {base_url}/embeddings with {"model": ..., "input":
    [text]}; the response carries data[i].tokens and data[i].embeddings.
    """

    def __init__(self, base_url: str, model: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.timeout = timeout
        self.session = requests.Session()

    def embed(self, text: str) -> List[Tuple[str, np.ndarray]]:
        resp = self.session.post(
            f"{self.base_url}/embeddings",
            json={"model": self.model, "input": [text]},
            timeout=self.timeout,
        )
        resp.raise_for_status()
        entry = resp.json()["data"][0]
        out = []
        for token, vec in zip(entry["tokens"], entry["embeddings"]):
            v = np.asarray(vec, dtype=np.float64)
            norm = np.linalg.norm(v)
            out.append((token, v / norm if norm > 0 else v))
        return out


def bertscore(
    candidate: str, reference: str, provider: EmbeddingProvider
) -> Tuple[float, float, float]:
    """Greedy-matched (precision, recall, f1) over token cosine similarities."""
    cand = provider.embed(candidate)
    ref = provider.embed(reference)
    if not cand or not ref:
        raise EmptyText("both texts must produce at least one token")
    c = np.stack([v for _, v in cand])
    r = np.stack([v for _, v in ref])
    sim = c @ r.T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    denom = precision + recall
    f1 = 2 * precision * recall / denom if denom != 0 else 0.0
    return precision, recall, f1
