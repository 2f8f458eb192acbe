"""HTTP service implementing the reader and embedding wire protocols."""

from __future__ import annotations

import threading

from fastapi import FastAPI
from pydantic import BaseModel, Field

from .data import build_blocks
from .model import FusionSeq2Seq
from .vocab import PASSAGE_MODE, QUESTION_MODE, Vocab


class PassageIn(BaseModel):
    title: str
    text: str


class GenerateRequest(BaseModel):
    prefix: str
    question: str
    passages: list[PassageIn] = Field(default_factory=list)
    beam_size: int = Field(default=10, ge=1)


class Candidate(BaseModel):
    text: str
    rank: int


class GenerateResponse(BaseModel):
    candidates: list[Candidate]


class EmbedRequest(BaseModel):
    mode: str = Field(pattern="^(passage|question)$")
    texts: list[str]


class EmbedResponse(BaseModel):
    dim: int
    vectors: list[list[float]]


def create_app(model: FusionSeq2Seq, vocab: Vocab) -> FastAPI:
    app = FastAPI(title="reader-service")
    # generation is request-serial; FastAPI handles concurrent accepts
    generate_lock = threading.Lock()

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest) -> GenerateResponse:
        blocks = build_blocks(request.prefix, request.question,
                              [p.model_dump() for p in request.passages])
        encoded = [[vocab.encode(b) for b in blocks]]
        with generate_lock:
            beams = model.beam_search(encoded, beam_size=request.beam_size)
        texts = []
        for token_ids, _score in beams:
            text = vocab.decode(token_ids)
            if text and text not in texts:
                texts.append(text)
        return GenerateResponse(candidates=[
            Candidate(text=t, rank=i) for i, t in enumerate(texts, start=1)])

    @app.post("/embed", response_model=EmbedResponse)
    def embed(request: EmbedRequest) -> EmbedResponse:
        mode_id = PASSAGE_MODE if request.mode == "passage" else QUESTION_MODE
        vectors = []
        with generate_lock:
            for text in request.texts:
                ids = [mode_id] + vocab.encode(text)
                vectors.append(model.embed_text(ids).tolist())
        return EmbedResponse(dim=model.cfg.d_model, vectors=vectors)

    return app
