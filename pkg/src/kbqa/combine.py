"""Weighted rank-score combination of executed and generated answer sets.

Every distinct answer set scores lf_weight * S(i) + (1 - lf_weight) * S(j),
where i / j are its best ranks in the executed and generated lists and S is
either 1/k (reciprocal) or B - k + 1 (linear). With no executable candidate
the top generated answer wins outright.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DataError

SCORE_RECIPROCAL = "reciprocal"
SCORE_LINEAR = "linear"


@dataclass(frozen=True)
class CombinationConfig:
    lf_weight: float = 1.0  # the combination weight in [0, 1]; 1.0 trusts execution
    score_fn: str = SCORE_RECIPROCAL
    beam_size: int = 10

    def __post_init__(self):
        if not 0.0 <= self.lf_weight <= 1.0:
            raise DataError(f"lf_weight must be in [0, 1], got {self.lf_weight}")
        if self.score_fn not in (SCORE_RECIPROCAL, SCORE_LINEAR):
            raise DataError(f"unknown score_fn: {self.score_fn!r}")
        if self.beam_size < 1:
            raise DataError("beam_size must be >= 1")

    def rank_score(self, k: int) -> float:
        if self.score_fn == SCORE_RECIPROCAL:
            return 1.0 / k
        return float(self.beam_size - k + 1)


@dataclass(frozen=True)
class CombinedAnswer:
    answers: tuple  # ordered answer strings; answers[0] is the top answer
    score: float
    lf_rank: Optional[int]
    gen_rank: Optional[int]

    @property
    def source(self) -> str:
        return "lf" if self.lf_rank is not None else "gen"


def _norm(answers) -> tuple:
    return tuple(dict.fromkeys(" ".join(a.split()) for a in answers if a.strip()))


def _set_key(answers) -> frozenset:
    return frozenset(answers)


def _dedupe_ranked(answer_sets) -> list:
    """(rank, answers) pairs with duplicate sets dropped, best rank kept."""
    seen = set()
    out = []
    for rank, answers in enumerate(answer_sets, start=1):
        norm = _norm(answers)
        if not norm:
            continue
        key = _set_key(norm)
        if key in seen:
            continue
        seen.add(key)
        out.append((rank, norm))
    return out


def combine(lf_answers: list, gen_answers: list, cfg: CombinationConfig) -> CombinedAnswer:
    """Pick the final answer set from executed (lf) and generated beams.

    lf_answers / gen_answers are rank-ordered lists of answer-string tuples.
    gen_answers must be non-empty; lf_answers may be empty.
    """
    gen = _dedupe_ranked(gen_answers)
    if not gen:
        raise DataError("generated answer list must be non-empty")
    lf = _dedupe_ranked(lf_answers)

    if not lf:
        rank, answers = gen[0]
        return CombinedAnswer(answers, cfg.rank_score(rank) * (1.0 - cfg.lf_weight),
                              None, rank)

    entries: dict[frozenset, dict] = {}
    for rank, answers in lf:
        entries[_set_key(answers)] = {"answers": answers, "lf_rank": rank, "gen_rank": None}
    for rank, answers in gen:
        entry = entries.setdefault(_set_key(answers),
                                   {"answers": answers, "lf_rank": None, "gen_rank": None})
        entry["gen_rank"] = rank

    def score(entry) -> float:
        total = 0.0
        if entry["lf_rank"] is not None:
            total += cfg.lf_weight * cfg.rank_score(entry["lf_rank"])
        if entry["gen_rank"] is not None:
            total += (1.0 - cfg.lf_weight) * cfg.rank_score(entry["gen_rank"])
        return total

    def sort_key(entry):
        return (
            -score(entry),
            entry["lf_rank"] if entry["lf_rank"] is not None else math.inf,
            entry["gen_rank"] if entry["gen_rank"] is not None else math.inf,
            sorted(entry["answers"]),
        )

    best = min(entries.values(), key=sort_key)
    return CombinedAnswer(best["answers"], score(best), best["lf_rank"], best["gen_rank"])
