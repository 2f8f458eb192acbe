import json

import pytest

from reader_service.data import (ANSWER_PREFIX, LF_PREFIX, DatasetError,
                                 build_blocks, load_dataset, make_pairs)


def test_build_blocks_without_passages_is_single_block():
    blocks = build_blocks(ANSWER_PREFIX, "who made it?", [])
    assert blocks == ["Question Answering: who made it?"]


def test_build_blocks_one_per_passage():
    passages = [{"title": "A", "text": "a body"}, {"title": "B", "text": "b body"}]
    blocks = build_blocks(LF_PREFIX, "who made it?", passages)
    assert blocks == [
        "Semantic Parsing: who made it? title: A context: a body",
        "Semantic Parsing: who made it? title: B context: b body"]


def _write_dataset(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def test_load_dataset_validates_fields(tmp_path):
    path = tmp_path / "data.jsonl"
    _write_dataset(path, [{"qid": "q1", "question": "q?"}])
    with pytest.raises(DatasetError, match="answers"):
        load_dataset(path)
    _write_dataset(path, [{"qid": "q1", "question": "q?", "answers": []}])
    with pytest.raises(DatasetError, match="empty answers"):
        load_dataset(path)
    _write_dataset(path, [])
    with pytest.raises(DatasetError, match="empty"):
        load_dataset(path)


def test_make_pairs_two_per_example_with_lf():
    examples = [
        {"qid": "q1", "question": "a?", "answers": ["X"],
         "s_expression": "(JOIN rel [ X ])"},
        {"qid": "q2", "question": "b?", "answers": ["Y"]},
    ]
    pairs = make_pairs(examples)
    assert len(pairs) == 3
    assert pairs[0].blocks == ["Question Answering: a?"]
    assert pairs[0].target == "X"
    assert pairs[1].blocks == ["Semantic Parsing: a?"]
    assert pairs[1].target == "(JOIN rel [ X ])"
    assert pairs[2].target == "Y"


def test_make_pairs_context_attachment_is_deterministic():
    examples = [{"qid": "q1", "question": "a?", "answers": ["X"]}]
    passages = [{"title": f"T{i}", "text": f"body {i}"} for i in range(10)]
    first = make_pairs(examples, passages, n_context=2, seed=7)
    second = make_pairs(examples, passages, n_context=2, seed=7)
    assert [p.blocks for p in first] == [p.blocks for p in second]
    assert len(first[0].blocks) == 2
