"""Training data assembly: one question yields two (input, target) pairs,
one per task prefix."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

ANSWER_PREFIX = "Question Answering:"
LF_PREFIX = "Semantic Parsing:"
BLOCK_TEMPLATE = "{prefix} {question} title: {title} context: {body}"


class DatasetError(ValueError):
    pass


@dataclass
class TrainPair:
    blocks: list  # encoder texts, one per (prefix+question, passage) block
    target: str


def build_blocks(prefix: str, question: str, passages: list) -> list:
    """Encoder texts exactly as the wire protocol presents them."""
    if not passages:
        return [f"{prefix} {question}"]
    return [BLOCK_TEMPLATE.format(prefix=prefix, question=question,
                                  title=p["title"], body=p["text"])
            for p in passages]


def load_dataset(path) -> list:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            for key in ("qid", "question", "answers"):
                if key not in rec:
                    raise DatasetError(f"line {line_no}: missing field {key!r}")
            if not rec["answers"]:
                raise DatasetError(f"line {line_no}: empty answers")
            examples.append(rec)
    if not examples:
        raise DatasetError(f"dataset is empty: {path}")
    return examples


def load_passages(path) -> list:
    passages = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                passages.append({"title": rec["title"], "text": rec["text"]})
    return passages


def make_pairs(examples: list, passages: list | None = None,
               n_context: int = 2, seed: int = 0, n_variants: int = 1) -> list:
    """Two pairs per example and context variant. When a passage pool is given,
    each variant attaches freshly sampled context blocks (plus one context-free
    variant) so the decoder learns to key on the question rather than on any
    particular retrieved passages."""
    rng = random.Random(seed)
    pairs = []
    for rec in examples:
        contexts = [[]]
        if passages:
            contexts = [rng.sample(passages, min(n_context, len(passages)))
                        for _ in range(n_variants)] + [[]]
        for context in contexts:
            pairs.append(TrainPair(build_blocks(ANSWER_PREFIX, rec["question"], context),
                                   rec["answers"][0]))
            if rec.get("s_expression"):
                pairs.append(TrainPair(build_blocks(LF_PREFIX, rec["question"], context),
                                       rec["s_expression"]))
    return pairs
