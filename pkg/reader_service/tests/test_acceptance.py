"""Acceptance suite for the reader service: one test per release criterion,
each printing a [PASS]/[FAIL] line (run with -s) and enforcing its budget.

The QA pipeline is only ever exercised through its CLI and the HTTP wire
protocol; nothing here imports it.
"""

import json
import random
import time
from contextlib import contextmanager

import requests

from conftest import question_for, run_kbqa
from lf_check import is_well_formed_lf
from reader_service.data import ANSWER_PREFIX, LF_PREFIX, load_passages

TRAIN_BUDGET_SECONDS = 1800  # fine-tune + serve + probe, per criterion


@contextmanager
def criterion(name, budget_seconds):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.monotonic() - start
    if elapsed > budget_seconds:
        print(f"[FAIL] {name} (took {elapsed:.1f}s > {budget_seconds}s budget)")
        raise AssertionError(f"{name} exceeded time budget: {elapsed:.1f}s")
    print(f"[PASS] {name} ({elapsed:.1f}s)")


def _generate(url, prefix, question, passages, beam_size=5):
    response = requests.post(f"{url}/generate", json={
        "prefix": prefix, "question": question,
        "passages": passages, "beam_size": beam_size}, timeout=120)
    response.raise_for_status()
    return response.json()["candidates"]


def test_service_protocol_and_prefix_sensitivity(toy_world, trained, server_url):
    """Schema-valid responses with contiguous ranks; after toy fine-tuning the
    logical-form prefix yields well-formed s-expressions on >= 90% of the
    training questions while the answer prefix yields plain text."""
    with criterion("service protocol conformance and prefix sensitivity",
                   TRAIN_BUDGET_SECONDS):
        _model, _vocab, history = trained
        assert history[-1]["elapsed"] < TRAIN_BUDGET_SECONDS
        assert history[-1]["exact_match"] == 1.0

        pool = load_passages(toy_world["passages"])
        rng = random.Random(0)
        questions = [question_for(i) for i in range(12)]
        lf_ok = answer_ok = 0
        for question in questions:
            passages = rng.sample(pool, 2)
            for prefix in (ANSWER_PREFIX, LF_PREFIX):
                candidates = _generate(server_url, prefix, question, passages)
                assert candidates, "empty beam"
                ranks = [c["rank"] for c in candidates]
                assert ranks == list(range(1, len(ranks) + 1))
                assert all(isinstance(c["text"], str) and c["text"]
                           for c in candidates)
                top = candidates[0]["text"]
                if prefix == LF_PREFIX:
                    lf_ok += is_well_formed_lf(top)
                else:
                    answer_ok += not top.startswith("(")
        assert lf_ok / len(questions) >= 0.9
        assert answer_ok / len(questions) >= 0.9


def test_joint_run_with_qa_pipeline(toy_world, server_url):
    """The QA pipeline pointed at the fine-tuned service reaches F1 >= 0.8 on
    the toy training split (wiring sanity, not a quality claim)."""
    with criterion("joint run with QA pipeline F1 >= 0.8", TRAIN_BUDGET_SECONDS):
        root = toy_world["root"]
        config = str(toy_world["config"])
        dataset = str(toy_world["dataset"])
        predictions = str(root / "predictions.jsonl")
        eval_dir = str(root / "eval")
        run_kbqa(["--config", config, "answer", dataset,
                  "--reader-url", server_url, "--out", predictions], root)
        run_kbqa(["--config", config, "eval", predictions, dataset,
                  "--out", eval_dir], root)
        with open(f"{eval_dir}/report.json", encoding="utf-8") as fh:
            report = json.load(fh)
        assert report["num_examples"] == 12
        assert report["f1"] >= 0.8
        assert report["hits_at_1"] >= 0.8
