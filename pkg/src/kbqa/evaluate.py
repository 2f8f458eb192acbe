"""Hits@1 / F1 scoring, retrieval hit/recall metrics, and report rendering.

Reports are written three ways: JSON, a plain-text table, a CSV, and
(optionally) a per-category F1 bar chart rendered with matplotlib.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import DataError

CATEGORIES = ("iid", "compositional", "zero-shot")


@dataclass
class DatasetExample:
    qid: str
    question: str
    gold_answers: list
    gold_lf: Optional[str] = None
    category: Optional[str] = None


@dataclass
class Prediction:
    qid: str
    answers: list  # ordered; answers[0] is the designated top answer
    source: Optional[str] = None  # "lf" | "gen"
    lf_rank: Optional[int] = None
    gen_rank: Optional[int] = None


@dataclass
class EvalReport:
    hits_at_1: float
    f1: float
    per_category: dict  # category -> {"hits_at_1", "f1", "count"}
    non_executable_rate: float
    num_examples: int

    def to_dict(self) -> dict:
        return {
            "hits_at_1": self.hits_at_1,
            "f1": self.f1,
            "per_category": self.per_category,
            "non_executable_rate": self.non_executable_rate,
            "num_examples": self.num_examples,
        }


def _norm(text: str) -> str:
    return " ".join(text.split()).casefold()


def score_example(pred_answers, gold_answers) -> tuple:
    """(hits@1, f1) for one example; the first predicted answer is the top one."""
    if not gold_answers:
        raise DataError("gold answer set must be non-empty")
    gold = {_norm(g) for g in gold_answers}
    pred = list(dict.fromkeys(_norm(p) for p in pred_answers if p.strip()))
    if not pred:
        return 0, 0.0
    hits = 1 if pred[0] in gold else 0
    overlap = len(set(pred) & gold)
    if overlap == 0:
        return hits, 0.0
    precision = overlap / len(pred)
    recall = overlap / len(gold)
    return hits, 2 * precision * recall / (precision + recall)


def retrieval_metrics(retrieved, passage_lookup, gold_answers, k: int) -> tuple:
    """(hit, recall) of gold answer names over the top-k passage bodies.

    A gold answer counts as found when it occurs as a word-boundary,
    case-insensitive substring of any retrieved body.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    bodies = []
    for rp in sorted(retrieved, key=lambda r: r.rank)[:k]:
        passage = passage_lookup.get(rp.passage_id)
        if passage is None:
            raise DataError(f"retrieved unknown passage id: {rp.passage_id}")
        bodies.append(passage.body)
    if not bodies or not gold_answers:
        return 0, 0.0
    text = "\n".join(bodies)
    found = 0
    for answer in gold_answers:
        pattern = r"\b" + re.escape(" ".join(answer.split())) + r"\b"
        if re.search(pattern, text, flags=re.IGNORECASE):
            found += 1
    return (1 if found else 0), found / len(gold_answers)


def aggregate(examples: list, predictions: list) -> EvalReport:
    """Macro-average metrics, overall and per question category."""
    by_qid = {p.qid: p for p in predictions}
    missing = [ex.qid for ex in examples if ex.qid not in by_qid]
    extra = [qid for qid in by_qid if qid not in {ex.qid for ex in examples}]
    if missing or extra:
        raise DataError(f"qid mismatch: missing predictions {missing}, unmatched {extra}")

    rows = []
    for ex in examples:
        pred = by_qid[ex.qid]
        hits, f1 = score_example(pred.answers, ex.gold_answers)
        rows.append((ex, pred, hits, f1))

    def mean(vals):
        vals = list(vals)
        return sum(vals) / len(vals) if vals else 0.0

    per_category = {}
    for cat in sorted({ex.category for ex, *_ in rows if ex.category is not None}):
        cat_rows = [r for r in rows if r[0].category == cat]
        per_category[cat] = {
            "hits_at_1": mean(r[2] for r in cat_rows),
            "f1": mean(r[3] for r in cat_rows),
            "count": len(cat_rows),
        }
    return EvalReport(
        hits_at_1=mean(r[2] for r in rows),
        f1=mean(r[3] for r in rows),
        per_category=per_category,
        non_executable_rate=mean(0.0 if r[1].lf_rank is not None else 1.0 for r in rows),
        num_examples=len(rows),
    )


# -- file formats ------------------------------------------------------------

def read_dataset_jsonl(fh) -> list:
    examples = []
    for line in fh:
        if not line.strip():
            continue
        rec = json.loads(line)
        examples.append(DatasetExample(
            qid=str(rec["qid"]),
            question=rec["question"],
            gold_answers=list(rec["answers"]),
            gold_lf=rec.get("s_expression"),
            category=rec.get("category"),
        ))
    return examples


def read_predictions_jsonl(fh) -> list:
    preds = []
    for line in fh:
        if not line.strip():
            continue
        rec = json.loads(line)
        preds.append(Prediction(
            qid=str(rec["qid"]),
            answers=list(rec["answers"]),
            source=rec.get("source"),
            lf_rank=rec.get("lf_rank"),
            gen_rank=rec.get("gen_rank"),
        ))
    return preds


def write_prediction(fh, pred: Prediction):
    fh.write(json.dumps({
        "qid": pred.qid,
        "answers": list(pred.answers),
        "source": pred.source,
        "lf_rank": pred.lf_rank,
        "gen_rank": pred.gen_rank,
    }, ensure_ascii=False) + "\n")


# -- report rendering --------------------------------------------------------

def render_table(report: EvalReport) -> str:
    lines = [
        f"{'slice':<16}{'count':>8}{'hits@1':>10}{'f1':>10}",
        f"{'overall':<16}{report.num_examples:>8}{report.hits_at_1:>10.4f}{report.f1:>10.4f}",
    ]
    for cat, stats in report.per_category.items():
        lines.append(f"{cat:<16}{stats['count']:>8}{stats['hits_at_1']:>10.4f}"
                     f"{stats['f1']:>10.4f}")
    lines.append(f"non-executable rate: {report.non_executable_rate:.4f}")
    return "\n".join(lines) + "\n"


def write_report_csv(report: EvalReport, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slice", "count", "hits_at_1", "f1"])
        writer.writerow(["overall", report.num_examples,
                         f"{report.hits_at_1:.6f}", f"{report.f1:.6f}"])
        for cat, stats in report.per_category.items():
            writer.writerow([cat, stats["count"],
                             f"{stats['hits_at_1']:.6f}", f"{stats['f1']:.6f}"])


def plot_category_f1(report: EvalReport, path):
    """Bar chart of per-category F1 (plus overall), written to path (svg/png)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = ["overall"] + list(report.per_category)
    values = [report.f1] + [s["f1"] for s in report.per_category.values()]
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(labels)), 3.2))
    ax.bar(labels, values, color="#4878a8")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("F1")
    ax.set_title("F1 by question category")
    for i, v in enumerate(values):
        ax.text(i, v + 0.02, f"{v:.2f}", ha="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
