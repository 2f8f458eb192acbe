"""Builder for a small self-consistent KB + dataset + mock reader fixture."""

import json
import os

import yaml

from kbqa.reader import ANSWER_PREFIX, LF_PREFIX

ENGINE_CLASS = "cvg.computer_game_engine"
DEV_RELATION = "cvg.computer_game_engine.developer"
DATE_RELATION = "cvg.computer_game_engine.release_date"

CATEGORIES = ["iid"] * 8 + ["compositional"] * 6 + ["zero-shot"] * 6


def question_for(i):
    return f"what video game engine did company {i} develop?"


def gold_lf_for(i):
    return f"(AND {ENGINE_CLASS} (JOIN {DEV_RELATION} [ Company {i} ]))"


def build_toy_world(root, n=20, corrupt_lfs=False, beam=5, retriever_kind="sparse"):
    """Write kb.nt, dataset.jsonl, reader_fixture.json, and config.yaml under root.

    With corrupt_lfs the mock emits only unparseable logical forms, exercising
    the generated-answer fallback.
    """
    os.makedirs(root, exist_ok=True)
    kb_path = os.path.join(root, "kb.nt")
    dataset_path = os.path.join(root, "dataset.jsonl")
    fixture_path = os.path.join(root, "reader_fixture.json")
    config_path = os.path.join(root, "config.yaml")
    out_dir = os.path.join(root, "out")

    lines = []
    for i in range(n):
        lines.append(f'm.e{i:02d} name "Engine {i}" .')
        lines.append(f'm.c{i:02d} name "Company {i}" .')
        lines.append(f"m.e{i:02d} type {ENGINE_CLASS} .")
        lines.append(f"m.e{i:02d} {DEV_RELATION} m.c{i:02d} .")
        lines.append(f'm.e{i:02d} {DATE_RELATION} "{1980 + i}" .')
    with open(kb_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    with open(dataset_path, "w", encoding="utf-8") as fh:
        for i in range(n):
            fh.write(json.dumps({
                "qid": f"q{i:02d}",
                "question": question_for(i),
                "answers": [f"Engine {i}"],
                "s_expression": gold_lf_for(i),
                "category": CATEGORIES[i % len(CATEGORIES)],
            }) + "\n")

    fixture = {}
    for i in range(n):
        q = question_for(i)
        lf_beam = (["(AND broken", "(FOO x y)"] if corrupt_lfs
                   else [gold_lf_for(i), "(AND broken"])
        fixture[f"{LF_PREFIX}||{q}"] = lf_beam
        fixture[f"{ANSWER_PREFIX}||{q}"] = [f"Engine {i}", "WebKit"]
    with open(fixture_path, "w", encoding="utf-8") as fh:
        json.dump(fixture, fh, indent=2)

    config = {
        "kb": {"path": kb_path, "name_relation": "name", "type_relation": "type"},
        "retriever": {"kind": retriever_kind, "k": 5,
                      "sparse_index": os.path.join(out_dir, "sparse_index.json"),
                      "dense_index": os.path.join(out_dir, "dense_index.bin"),
                      "embedding": {"provider": "hash", "dim": 32, "seed": 0}},
        "reader": {"backend": "mock", "mock_fixture": fixture_path, "beam_size": beam},
        "output_dir": out_dir,
    }
    with open(config_path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config, fh)

    return {"root": root, "kb": kb_path, "dataset": dataset_path,
            "fixture": fixture_path, "config": config_path, "out": out_dir}
