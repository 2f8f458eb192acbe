"""Wire-protocol conformance of the HTTP endpoints (model quality aside)."""

import pytest
import torch
from fastapi.testclient import TestClient

from reader_service.model import FusionSeq2Seq, ModelConfig
from reader_service.service import create_app
from reader_service.vocab import Vocab

D_MODEL = 32


@pytest.fixture(scope="module")
def client():
    torch.manual_seed(0)
    vocab = Vocab.build(["what video game engine did the company develop",
                         "Engine 1 title: context:"])
    cfg = ModelConfig(d_model=D_MODEL, n_heads=2, n_encoder_layers=1,
                      n_decoder_layers=1, dim_feedforward=64, dropout=0.0,
                      max_target_len=10)
    model = FusionSeq2Seq(len(vocab), cfg)
    return TestClient(create_app(model, vocab))


def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_generate_schema_and_contiguous_ranks(client):
    response = client.post("/generate", json={
        "prefix": "Question Answering:",
        "question": "what engine did the company develop?",
        "passages": [{"title": "Engine 1", "text": "the company develop"}],
        "beam_size": 4,
    })
    assert response.status_code == 200
    candidates = response.json()["candidates"]
    assert 1 <= len(candidates) <= 4
    assert [c["rank"] for c in candidates] == list(range(1, len(candidates) + 1))
    for c in candidates:
        assert isinstance(c["text"], str) and c["text"]
    assert len({c["text"] for c in candidates}) == len(candidates)


def test_generate_without_passages(client):
    response = client.post("/generate", json={
        "prefix": "Semantic Parsing:",
        "question": "what engine?",
        "passages": [],
        "beam_size": 1,
    })
    assert response.status_code == 200
    assert len(response.json()["candidates"]) == 1


def test_generate_rejects_bad_beam_size(client):
    response = client.post("/generate", json={
        "prefix": "Question Answering:", "question": "q?", "beam_size": 0})
    assert response.status_code == 422


def test_generate_requires_question(client):
    response = client.post("/generate", json={"prefix": "Question Answering:"})
    assert response.status_code == 422


def test_embed_both_modes(client):
    for mode in ("passage", "question"):
        response = client.post("/embed", json={
            "mode": mode, "texts": ["what engine", "the company"]})
        assert response.status_code == 200
        payload = response.json()
        assert payload["dim"] == D_MODEL
        assert len(payload["vectors"]) == 2
        assert all(len(vec) == D_MODEL for vec in payload["vectors"])


def test_embed_modes_differ(client):
    out = {}
    for mode in ("passage", "question"):
        response = client.post("/embed", json={"mode": mode, "texts": ["engine"]})
        out[mode] = response.json()["vectors"][0]
    assert out["passage"] != out["question"]


def test_embed_rejects_unknown_mode(client):
    response = client.post("/embed", json={"mode": "document", "texts": ["x"]})
    assert response.status_code == 422
