"""Reader gateway: prefixed input assembly and beam-candidate retrieval.

The reader itself lives behind a wire protocol (POST /generate) or a
deterministic mock driven by a JSON fixture, so the pipeline is testable
without any model.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import requests

from .errors import DataError, ProtocolError, TransportError

ANSWER_PREFIX = "Question Answering:"
LF_PREFIX = "Semantic Parsing:"

# per-passage encoder text layout; the prefix+question repeats for every passage
PASSAGE_TEMPLATE = "{prefix} {question} title: {title} context: {body}"


@dataclass(frozen=True)
class ReaderInput:
    prefix: str  # ANSWER_PREFIX or LF_PREFIX
    question: str
    passages: tuple  # ((title, body), ...) in retrieval rank order

    def encoder_texts(self) -> list:
        if not self.passages:
            return [f"{self.prefix} {self.question}"]
        return [
            PASSAGE_TEMPLATE.format(prefix=self.prefix, question=self.question,
                                    title=title, body=body)
            for title, body in self.passages
        ]


@dataclass
class CandidateBeam:
    kind: str  # "answer" | "logical_form"
    candidates: list  # rank-ordered strings, deduplicated


def build_reader_input(question: str, retrieved: list, passage_lookup: dict,
                       kind: str) -> ReaderInput:
    """Assemble the prefixed reader input; passages follow retrieval rank order."""
    if kind == "answer":
        prefix = ANSWER_PREFIX
    elif kind == "logical_form":
        prefix = LF_PREFIX
    else:
        raise ValueError(f"bad reader input kind: {kind!r}")
    passages = []
    for rp in sorted(retrieved, key=lambda r: r.rank):
        passage = passage_lookup.get(rp.passage_id)
        if passage is None:
            raise DataError(f"retrieved unknown passage id: {rp.passage_id}")
        passages.append((passage.title, passage.body))
    return ReaderInput(prefix, question, tuple(passages))


def _normalize_candidate(text: str) -> str:
    return " ".join(text.split())


def _dedupe(candidates: list, beam_size: int) -> list:
    """Collapse duplicates after whitespace normalization, keeping best rank."""
    seen = set()
    out = []
    for text in candidates:
        norm = _normalize_candidate(text)
        if not norm or norm in seen:
            continue
        seen.add(norm)
        out.append(norm)
        if len(out) >= beam_size:
            break
    return out


class MockReader:
    """Fixture-driven reader: maps (prefix, question) to a fixed candidate list.

    Fixture file format: {"<prefix>||<question>": ["cand1", "cand2", ...], ...}
    """

    def __init__(self, fixture: dict):
        self.fixture = fixture

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def generate(self, reader_input: ReaderInput, beam_size: int) -> list:
        key = f"{reader_input.prefix}||{reader_input.question}"
        return list(self.fixture.get(key, []))[:beam_size]


class RemoteReader:
    """Client for the reader wire protocol:

    POST {url}/generate
      {"prefix": str, "question": str,
       "passages": [{"title": str, "text": str}, ...], "beam_size": int}
    ->  {"candidates": [{"text": str, "rank": int}, ...]}  (ranks contiguous from 1)
    """

    def __init__(self, base_url: str, timeout: float = 120.0, retries: int = 2,
                 backoff: float = 0.5):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def generate(self, reader_input: ReaderInput, beam_size: int) -> list:
        payload = {
            "prefix": reader_input.prefix,
            "question": reader_input.question,
            "passages": [{"title": t, "text": b} for t, b in reader_input.passages],
            "beam_size": beam_size,
        }
        last_exc = None
        for attempt in range(self.retries + 1):
            try:
                resp = requests.post(f"{self.base_url}/generate", json=payload,
                                     timeout=self.timeout)
                if resp.status_code >= 500:
                    raise TransportError(f"reader returned {resp.status_code}")
                resp.raise_for_status()
                return self._parse_response(resp.json())
            except (requests.RequestException, TransportError) as exc:
                last_exc = exc
                if attempt < self.retries:
                    time.sleep(self.backoff * (attempt + 1))
        raise TransportError(f"reader unreachable after {self.retries + 1} attempts: {last_exc}")

    @staticmethod
    def _parse_response(payload) -> list:
        try:
            candidates = payload["candidates"]
            ranked = sorted(candidates, key=lambda c: c["rank"])
            if [c["rank"] for c in ranked] != list(range(1, len(ranked) + 1)):
                raise ProtocolError("candidate ranks not contiguous from 1")
            return [c["text"] for c in ranked]
        except (TypeError, KeyError) as exc:
            raise ProtocolError(f"malformed reader response: {exc}") from exc


def call_reader(reader_input: ReaderInput, beam_size: int, backend) -> CandidateBeam:
    """Query a backend (Mock/RemoteReader) and normalize the resulting beam."""
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    raw = backend.generate(reader_input, beam_size)
    kind = "answer" if reader_input.prefix == ANSWER_PREFIX else "logical_form"
    return CandidateBeam(kind, _dedupe(raw, beam_size))


def split_multi_answer(candidate: str) -> tuple:
    """Split a "A | B | C" candidate into an ordered answer set."""
    parts = [p.strip() for p in candidate.split("|")]
    return tuple(dict.fromkeys(p for p in parts if p))
