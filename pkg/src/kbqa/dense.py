"""Dense retrieval: exact top-k dot-product search over passage embeddings.

Embeddings come from a pluggable provider. Two built-ins: a deterministic
hash-projection provider (tests, offline runs) and a remote provider speaking
the HTTP embedding protocol (POST /embed).
"""

from __future__ import annotations

import hashlib
import json
import struct
from typing import Iterable, Protocol

import numpy as np
import requests

from .errors import DataError, ProtocolError, TransportError
from .linearize import Passage
from .sparse import RetrievedPassage, tokenize

INDEX_FORMAT_VERSION = 1


class EmbeddingProvider(Protocol):
    dim: int

    def fingerprint(self) -> str: ...
    def embed_passage(self, text: str) -> np.ndarray: ...
    def embed_question(self, text: str) -> np.ndarray: ...


class HashEmbeddingProvider:
    """Deterministic bag-of-tokens embedding: each token maps to a fixed random
    unit direction seeded from its hash, texts sum their token vectors.

    Shared token vectors between passage and question mode, so lexical overlap
    shows up as dot-product similarity.
    """

    def __init__(self, dim: int = 64, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def fingerprint(self) -> str:
        return f"hash-bow:dim={self.dim}:seed={self.seed}"

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little") ^ self.seed)
            vec = rng.standard_normal(self.dim).astype(np.float32)
            vec /= np.linalg.norm(vec)
            self._cache[token] = vec
        return vec

    def _embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        if not tokens:
            return np.zeros(self.dim, dtype=np.float32)
        out = np.zeros(self.dim, dtype=np.float64)
        for tok in tokens:
            out += self._token_vector(tok)
        return (out / np.sqrt(len(tokens))).astype(np.float32)

    def embed_passage(self, text: str) -> np.ndarray:
        return self._embed(text)

    def embed_question(self, text: str) -> np.ndarray:
        return self._embed(text)


class RemoteEmbeddingProvider:
    """Client for the HTTP embedding protocol:

    POST {url}/embed  {"mode": "passage"|"question", "texts": [...]}
                   -> {"dim": int, "vectors": [[float, ...], ...]}
    """

    def __init__(self, base_url: str, timeout: float = 30.0, batch_size: int = 32):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_size = batch_size
        self.dim = self._probe_dim()

    def fingerprint(self) -> str:
        return f"remote:{self.base_url}:dim={self.dim}"

    def _probe_dim(self) -> int:
        return int(self._request("passage", [""])["dim"])

    def _request(self, mode: str, texts: list) -> dict:
        try:
            resp = requests.post(f"{self.base_url}/embed",
                                 json={"mode": mode, "texts": texts},
                                 timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        if resp.status_code >= 500:
            raise TransportError(f"embedding service returned {resp.status_code}")
        try:
            payload = resp.json()
            assert isinstance(payload["dim"], int)
            assert isinstance(payload["vectors"], list)
        except (ValueError, KeyError, AssertionError) as exc:
            raise ProtocolError(f"bad embedding response: {exc}") from exc
        return payload

    def _embed_batch(self, mode: str, texts: list) -> np.ndarray:
        rows = []
        for i in range(0, len(texts), self.batch_size):
            payload = self._request(mode, texts[i:i + self.batch_size])
            if payload["dim"] != self.dim:
                raise ProtocolError(f"dim changed: {payload['dim']} != {self.dim}")
            rows.extend(payload["vectors"])
        return np.asarray(rows, dtype=np.float32)

    def embed_passage(self, text: str) -> np.ndarray:
        return self._embed_batch("passage", [text])[0]

    def embed_question(self, text: str) -> np.ndarray:
        return self._embed_batch("question", [text])[0]


class DenseIndex:
    def __init__(self, dim: int, fingerprint: str):
        self.dim = dim
        self.provider_fingerprint = fingerprint
        self.passage_ids: list[str] = []
        self.matrix = np.zeros((0, dim), dtype=np.float32)

    def save(self, path):
        header = json.dumps({
            "format": "kbqa-dense-index",
            "version": INDEX_FORMAT_VERSION,
            "dim": self.dim,
            "fingerprint": self.provider_fingerprint,
            "passage_ids": self.passage_ids,
        }).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(struct.pack("<Q", len(header)))
            fh.write(header)
            fh.write(np.ascontiguousarray(self.matrix, dtype=np.float32).tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            (hlen,) = struct.unpack("<Q", fh.read(8))
            header = json.loads(fh.read(hlen))
            if header.get("format") != "kbqa-dense-index":
                raise DataError(f"not a dense index file: {path}")
            if header.get("version") != INDEX_FORMAT_VERSION:
                raise DataError(f"unsupported dense index version: {header.get('version')}")
            index = cls(header["dim"], header["fingerprint"])
            index.passage_ids = header["passage_ids"]
            block = fh.read()
        index.matrix = np.frombuffer(block, dtype=np.float32).reshape(
            len(index.passage_ids), index.dim).copy()
        return index


def build_dense(passages: Iterable[Passage], provider: EmbeddingProvider) -> DenseIndex:
    """Embed every passage once; rows ordered by passage id for determinism."""
    entries = []
    seen = set()
    for passage in passages:
        if passage.passage_id in seen:
            raise DataError(f"duplicate passage id: {passage.passage_id}")
        seen.add(passage.passage_id)
        vec = np.asarray(provider.embed_passage(passage.body), dtype=np.float32)
        if vec.shape != (provider.dim,):
            raise DataError(
                f"provider returned shape {vec.shape} for dim {provider.dim} "
                f"(passage {passage.passage_id})")
        entries.append((passage.passage_id, vec))
    entries.sort(key=lambda e: e[0])
    index = DenseIndex(provider.dim, provider.fingerprint())
    index.passage_ids = [pid for pid, _ in entries]
    index.matrix = (np.stack([v for _, v in entries])
                    if entries else np.zeros((0, provider.dim), dtype=np.float32))
    return index


def search_dense(index: DenseIndex, question: str, provider: EmbeddingProvider,
                 k: int) -> list:
    """Exact top-k by dot product; ties broken by ascending passage id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if provider.fingerprint() != index.provider_fingerprint:
        raise DataError(
            f"provider fingerprint {provider.fingerprint()!r} does not match "
            f"index fingerprint {index.provider_fingerprint!r}")
    if not index.passage_ids:
        return []
    qvec = np.asarray(provider.embed_question(question), dtype=np.float32)
    scores = index.matrix @ qvec
    order = sorted(range(len(index.passage_ids)),
                   key=lambda i: (-float(scores[i]), index.passage_ids[i]))[:k]
    return [RetrievedPassage(index.passage_ids[i], float(scores[i]), rank)
            for rank, i in enumerate(order, start=1)]
