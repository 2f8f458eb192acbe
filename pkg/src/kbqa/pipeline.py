"""End-to-end orchestration: config handling plus the ingest -> linearize ->
index -> retrieve -> read -> execute -> combine -> evaluate flow."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Optional

import yaml

from . import dense, evaluate, linearize, reader, sparse
from .combine import CombinationConfig, combine
from .errors import (ConfigError, DataError, KbqaError, NonExecutableError,
                     TransportError)
from .kb import KbStore, disambiguate_names, load_ntriples
from .logical_form import execute_candidate

log = logging.getLogger("kbqa")

DEFAULTS = {
    "kb": {"path": None, "name_relation": "name", "type_relation": "type"},
    "linearize": {"max_words": 100, "strip_relation_domain": True,
                  "shard_size": 100000},
    "retriever": {"kind": "sparse", "k": 100,
                  "sparse_index": None, "dense_index": None,
                  "embedding": {"provider": "hash", "dim": 64, "seed": 0, "url": None}},
    "reader": {"backend": "mock", "mock_fixture": None, "url": None, "beam_size": 10},
    "combination": {"lf_weight": 1.0, "score_fn": "reciprocal"},
    "mode": "single",
    "output_dir": "out",
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        elif val is not None:
            out[key] = val
    return out


def load_config(path: Optional[str], overrides: Optional[dict] = None) -> dict:
    cfg = DEFAULTS
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config root must be a mapping: {path}")
        cfg = _merge(cfg, loaded)
    if overrides:
        cfg = _merge(cfg, overrides)
    if cfg["retriever"]["k"] < 1:
        raise ConfigError("retriever.k must be >= 1")
    if cfg["reader"]["beam_size"] < 1:
        raise ConfigError("reader.beam_size must be >= 1")
    if cfg["mode"] not in ("single", "multi"):
        raise ConfigError(f"mode must be single or multi, got {cfg['mode']!r}")
    return cfg


def load_store(cfg: dict) -> KbStore:
    path = cfg["kb"]["path"]
    if not path:
        raise ConfigError("kb.path is not set")
    if not os.path.exists(path):
        raise ConfigError(f"kb file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        store = load_ntriples(fh, cfg["kb"]["name_relation"], cfg["kb"]["type_relation"])
    return disambiguate_names(store)


# -- linearize ---------------------------------------------------------------

def run_linearize(cfg: dict, out_dir: str) -> dict:
    """Write passage shards plus a manifest with counts and checksums."""
    store = load_store(cfg)
    warnings: list[str] = []
    passages = linearize.linearize_store(
        store,
        max_words=cfg["linearize"]["max_words"],
        strip_relation_domain=cfg["linearize"]["strip_relation_domain"],
        warnings=warnings,
    )
    os.makedirs(out_dir, exist_ok=True)
    shard_size = cfg["linearize"]["shard_size"]
    shards = []
    shard_idx, count, fh, path = 0, 0, None, None
    total = 0

    def close_shard():
        nonlocal fh
        if fh is None:
            return
        fh.close()
        with open(path, "rb") as rb:
            digest = hashlib.sha256(rb.read()).hexdigest()
        shards.append({"path": os.path.basename(path), "count": count, "sha256": digest})
        fh = None

    for passage in passages:
        if fh is None or count >= shard_size:
            close_shard()
            path = os.path.join(out_dir, f"passages-{shard_idx:05d}.jsonl")
            fh = open(path, "w", encoding="utf-8")
            shard_idx += 1
            count = 0
        linearize.write_passages_jsonl([passage], fh)
        count += 1
        total += 1
    close_shard()

    manifest = {"passage_count": total, "shards": shards, "warnings": warnings}
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as mf:
        json.dump(manifest, mf, indent=2)
    return manifest


def load_passages(passage_dir: str) -> dict:
    """Passage lookup (id -> Passage) from a shard directory or one JSONL file."""
    paths = []
    if os.path.isdir(passage_dir):
        paths = sorted(
            os.path.join(passage_dir, f) for f in os.listdir(passage_dir)
            if f.endswith(".jsonl"))
    elif os.path.exists(passage_dir):
        paths = [passage_dir]
    else:
        raise DataError(f"passage path not found: {passage_dir}")
    lookup = {}
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for passage in linearize.read_passages_jsonl(fh):
                if passage.passage_id in lookup:
                    raise DataError(f"duplicate passage id: {passage.passage_id}")
                lookup[passage.passage_id] = passage
    return lookup


# -- retrieval ---------------------------------------------------------------

def make_embedding_provider(cfg: dict):
    emb = cfg["retriever"]["embedding"]
    if emb["provider"] == "hash":
        return dense.HashEmbeddingProvider(dim=emb.get("dim", 64), seed=emb.get("seed", 0))
    if emb["provider"] == "remote":
        if not emb.get("url"):
            raise ConfigError("retriever.embedding.url required for remote provider")
        return dense.RemoteEmbeddingProvider(emb["url"])
    raise ConfigError(f"unknown embedding provider: {emb['provider']!r}")


class Retriever:
    """Unified sparse/dense retrieval front."""

    def __init__(self, cfg: dict, passage_dir: str):
        self.kind = cfg["retriever"]["kind"]
        self.k = cfg["retriever"]["k"]
        self.passages = load_passages(passage_dir)
        if self.kind == "sparse":
            path = cfg["retriever"]["sparse_index"]
            if not path or not os.path.exists(path):
                raise ConfigError(f"sparse index not found: {path}")
            self.sparse_index = sparse.SparseIndex.load(path)
        elif self.kind == "dense":
            path = cfg["retriever"]["dense_index"]
            if not path or not os.path.exists(path):
                raise ConfigError(f"dense index not found: {path}")
            self.dense_index = dense.DenseIndex.load(path)
            self.provider = make_embedding_provider(cfg)
        else:
            raise ConfigError(f"unknown retriever kind: {self.kind!r}")

    def retrieve(self, question: str):
        if self.kind == "sparse":
            return sparse.search_sparse(self.sparse_index, question, self.k)
        return dense.search_dense(self.dense_index, question, self.provider, self.k)


def make_reader_backend(cfg: dict):
    rd = cfg["reader"]
    if rd["backend"] == "mock":
        if not rd.get("mock_fixture"):
            raise ConfigError("reader.mock_fixture required for mock backend")
        return reader.MockReader.from_file(rd["mock_fixture"])
    if rd["backend"] == "remote":
        if not rd.get("url"):
            raise ConfigError("reader.url required for remote backend")
        return reader.RemoteReader(rd["url"])
    raise ConfigError(f"unknown reader backend: {rd['backend']!r}")


# -- answering ---------------------------------------------------------------

@dataclass
class QuestionLog:
    qid: str
    failed: bool = False
    error: Optional[str] = None
    non_executable: list = field(default_factory=list)  # (rank, reason)
    executable_count: int = 0


def answer_question(question: str, qid: str, store: KbStore, retriever: Retriever,
                    backend, cfg: dict) -> tuple:
    """One question end to end; returns (Prediction, QuestionLog)."""
    qlog = QuestionLog(qid)
    beam_size = cfg["reader"]["beam_size"]
    comb_cfg = CombinationConfig(
        lf_weight=cfg["combination"]["lf_weight"],
        score_fn=cfg["combination"]["score_fn"],
        beam_size=beam_size,
    )
    retrieved = retriever.retrieve(question)
    answer_input = reader.build_reader_input(question, retrieved, retriever.passages,
                                             "answer")
    lf_input = reader.build_reader_input(question, retrieved, retriever.passages,
                                         "logical_form")
    answer_beam = reader.call_reader(answer_input, beam_size, backend)
    lf_beam = reader.call_reader(lf_input, beam_size, backend)

    # every candidate is executed so that the full executable list exists
    lf_answer_sets = []
    for rank, candidate in enumerate(lf_beam.candidates, start=1):
        try:
            lf_answer_sets.append(execute_candidate(candidate, store))
            qlog.executable_count += 1
        except NonExecutableError as exc:
            qlog.non_executable.append((rank, exc.reason))

    if cfg["mode"] == "multi":
        gen_answer_sets = [reader.split_multi_answer(c) for c in answer_beam.candidates]
    else:
        gen_answer_sets = [(c,) for c in answer_beam.candidates]
    gen_answer_sets = [s for s in gen_answer_sets if s]

    if not gen_answer_sets and not lf_answer_sets:
        qlog.failed = True
        qlog.error = "reader produced no usable candidates"
        return evaluate.Prediction(qid, []), qlog
    if not gen_answer_sets:
        return evaluate.Prediction(qid, list(lf_answer_sets[0]), "lf", 1, None), qlog

    result = combine(lf_answer_sets, gen_answer_sets, comb_cfg)
    return evaluate.Prediction(qid, list(result.answers), result.source,
                               result.lf_rank, result.gen_rank), qlog


def answer_dataset(examples: list, store: KbStore, retriever: Retriever, backend,
                   cfg: dict) -> tuple:
    """All questions; single-question failures yield empty predictions."""
    predictions, logs = [], []
    for ex in examples:
        try:
            pred, qlog = answer_question(ex.question, ex.qid, store, retriever,
                                         backend, cfg)
        except (KbqaError, ValueError) as exc:
            log.warning("question %s failed: %s", ex.qid, exc)
            pred = evaluate.Prediction(ex.qid, [])
            qlog = QuestionLog(ex.qid, failed=True, error=str(exc))
        predictions.append(pred)
        logs.append(qlog)
    return predictions, logs


# -- evaluation --------------------------------------------------------------

def run_eval(examples: list, predictions: list, out_dir: str,
             with_figure: bool = True) -> evaluate.EvalReport:
    report = evaluate.aggregate(examples, predictions)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(evaluate.render_table(report))
    evaluate.write_report_csv(report, os.path.join(out_dir, "report.csv"))
    if with_figure:
        evaluate.plot_category_f1(report, os.path.join(out_dir, "category_f1.svg"))
    return report
