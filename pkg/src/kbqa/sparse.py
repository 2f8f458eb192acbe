"""BM25 inverted-index retrieval over linearized passages.

Lucene-flavored scoring: IDF(t) = ln(1 + (N - df + 0.5) / (df + 0.5)),
tf term = tf / (tf + k1 * (1 - b + b * len / avglen)), defaults k1=0.9, b=0.4.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Iterable

from .errors import DataError
from .linearize import Passage

INDEX_FORMAT_VERSION = 1

_TOKEN_RE = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list:
    """Lowercase, split on non-alphanumeric runs, drop empties."""
    return [t for t in _TOKEN_RE.split(text.lower()) if t]


@dataclass(frozen=True)
class RetrievedPassage:
    passage_id: str
    score: float
    rank: int


class SparseIndex:
    def __init__(self, k1: float = 0.9, b: float = 0.4):
        self.k1 = k1
        self.b = b
        self.postings: dict[str, list] = {}  # term -> [(passage_id, tf), ...] sorted by id
        self.doc_lengths: dict[str, int] = {}
        self.avg_doc_length = 0.0

    @property
    def n_docs(self) -> int:
        return len(self.doc_lengths)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))

    # -- persistence --------------------------------------------------------

    def save(self, path):
        payload = {
            "format": "kbqa-sparse-index",
            "version": INDEX_FORMAT_VERSION,
            "k1": self.k1,
            "b": self.b,
            "doc_lengths": self.doc_lengths,
            "postings": self.postings,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != "kbqa-sparse-index":
            raise DataError(f"not a sparse index file: {path}")
        if payload.get("version") != INDEX_FORMAT_VERSION:
            raise DataError(f"unsupported sparse index version: {payload.get('version')}")
        index = cls(payload["k1"], payload["b"])
        index.doc_lengths = payload["doc_lengths"]
        index.postings = {t: [(pid, tf) for pid, tf in plist]
                          for t, plist in payload["postings"].items()}
        index.avg_doc_length = (
            sum(index.doc_lengths.values()) / len(index.doc_lengths)
            if index.doc_lengths else 0.0
        )
        return index


def build_sparse(passages: Iterable[Passage], k1: float = 0.9, b: float = 0.4) -> SparseIndex:
    index = SparseIndex(k1, b)
    for passage in passages:
        if passage.passage_id in index.doc_lengths:
            raise DataError(f"duplicate passage id: {passage.passage_id}")
        tokens = tokenize(passage.body)
        index.doc_lengths[passage.passage_id] = len(tokens)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for tok, tf in counts.items():
            index.postings.setdefault(tok, []).append((passage.passage_id, tf))
    for plist in index.postings.values():
        plist.sort(key=lambda e: e[0])
    if index.doc_lengths:
        index.avg_doc_length = sum(index.doc_lengths.values()) / len(index.doc_lengths)
    return index


def search_sparse(index: SparseIndex, query: str, k: int) -> list:
    """Top-k passages by BM25; only positive scores, ties by ascending passage id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scores: dict[str, float] = {}
    avglen = index.avg_doc_length or 1.0
    for term in tokenize(query):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for pid, tf in plist:
            norm = index.k1 * (1.0 - index.b + index.b * index.doc_lengths[pid] / avglen)
            scores[pid] = scores.get(pid, 0.0) + idf * tf / (tf + norm)
    ranked = sorted(((pid, s) for pid, s in scores.items() if s > 0.0),
                    key=lambda e: (-e[1], e[0]))[:k]
    return [RetrievedPassage(pid, score, rank)
            for rank, (pid, score) in enumerate(ranked, start=1)]
