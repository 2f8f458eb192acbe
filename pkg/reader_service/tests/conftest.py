"""Shared fixtures: a toy KB/dataset world prepared with the kbqa CLI, one
fine-tuned model trained on it, and a live HTTP server around that model."""

import glob
import json
import shutil
import subprocess
import sys
import threading
import time

import pytest
import uvicorn
import yaml

from reader_service.data import load_dataset, load_passages, make_pairs
from reader_service.model import ModelConfig
from reader_service.service import create_app
from reader_service.training import TrainConfig, train_pairs

N_QUESTIONS = 12
ENGINE_CLASS = "cvg.computer_game_engine"
DEV_RELATION = "cvg.computer_game_engine.developer"
DATE_RELATION = "cvg.computer_game_engine.release_date"
CATEGORIES = ["iid", "compositional", "zero-shot"]


def question_for(i):
    return f"what video game engine did company {i} develop?"


def gold_lf_for(i):
    return f"(AND {ENGINE_CLASS} (JOIN {DEV_RELATION} [ Company {i} ]))"


def run_kbqa(args, cwd):
    """Drive the QA pipeline through its CLI only."""
    proc = subprocess.run([sys.executable, "-m", "kbqa.cli", *args],
                          cwd=cwd, capture_output=True, text=True)
    assert proc.returncode == 0, f"kbqa {' '.join(args)} failed:\n{proc.stderr}"
    return proc.stdout


@pytest.fixture(scope="session")
def toy_world(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy_world")
    kb_path = root / "kb.nt"
    dataset_path = root / "dataset.jsonl"
    config_path = root / "config.yaml"
    out_dir = root / "out"

    lines = []
    for i in range(N_QUESTIONS):
        lines.append(f'm.e{i:02d} name "Engine {i}" .')
        lines.append(f'm.c{i:02d} name "Company {i}" .')
        lines.append(f"m.e{i:02d} type {ENGINE_CLASS} .")
        lines.append(f"m.e{i:02d} {DEV_RELATION} m.c{i:02d} .")
        lines.append(f'm.e{i:02d} {DATE_RELATION} "{1980 + i}" .')
    kb_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    with open(dataset_path, "w", encoding="utf-8") as fh:
        for i in range(N_QUESTIONS):
            fh.write(json.dumps({
                "qid": f"q{i:02d}",
                "question": question_for(i),
                "answers": [f"Engine {i}"],
                "s_expression": gold_lf_for(i),
                "category": CATEGORIES[i % len(CATEGORIES)],
            }) + "\n")

    config = {
        "kb": {"path": str(kb_path)},
        "retriever": {"kind": "sparse", "k": 2,
                      "sparse_index": str(out_dir / "sparse_index.json")},
        "reader": {"beam_size": 5},
        "output_dir": str(out_dir),
    }
    config_path.write_text(yaml.safe_dump(config), encoding="utf-8")

    run_kbqa(["--config", str(config_path), "linearize"], root)
    run_kbqa(["--config", str(config_path), "index-sparse"], root)

    # merge the passage shards into one pool for training context blocks
    passages_path = root / "passages.jsonl"
    with open(passages_path, "w", encoding="utf-8") as out:
        for shard in sorted(glob.glob(str(out_dir / "passages" / "passages-*.jsonl"))):
            with open(shard, encoding="utf-8") as fh:
                shutil.copyfileobj(fh, out)

    return {"root": root, "kb": kb_path, "dataset": dataset_path,
            "config": config_path, "passages": passages_path, "out": out_dir}


@pytest.fixture(scope="session")
def trained(toy_world):
    examples = load_dataset(toy_world["dataset"])
    passages = load_passages(toy_world["passages"])
    pairs = make_pairs(examples, passages, n_context=2, seed=0, n_variants=3)
    model, vocab, history = train_pairs(
        pairs,
        ModelConfig(d_model=64, dropout=0.0),
        TrainConfig(max_epochs=600, check_every=25, seed=0))
    return model, vocab, history


@pytest.fixture(scope="session")
def server_url(trained):
    model, vocab, _ = trained
    app = create_app(model, vocab)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 30
    while not server.started:
        assert time.monotonic() < deadline, "server did not start"
        time.sleep(0.05)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)
