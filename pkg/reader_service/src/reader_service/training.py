"""Multi-task fine-tuning loop (answer generation + logical form generation)."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass

import torch
import torch.nn as nn

from .data import TrainPair, load_dataset, load_passages, make_pairs
from .model import FusionSeq2Seq, ModelConfig, save_checkpoint
from .vocab import BOS, EOS, PAD, Vocab, tokenize

log = logging.getLogger("reader_service")


@dataclass
class TrainConfig:
    max_epochs: int = 400
    batch_size: int = 16
    learning_rate: float = 3e-4
    seed: int = 0
    n_context: int = 2
    n_variants: int = 3
    check_every: int = 20  # epochs between exact-match convergence checks
    target_exact_match: float = 1.0


def _batches(pairs: list, vocab: Vocab, batch_size: int, max_target_len: int):
    for start in range(0, len(pairs), batch_size):
        chunk = pairs[start:start + batch_size]
        blocks = [[vocab.encode(b) for b in p.blocks] for p in chunk]
        targets = [vocab.encode(p.target)[: max_target_len - 1] for p in chunk]
        width = max(len(t) for t in targets) + 1
        tgt_in = torch.full((len(chunk), width), PAD, dtype=torch.long)
        tgt_out = torch.full((len(chunk), width), PAD, dtype=torch.long)
        for i, t in enumerate(targets):
            tgt_in[i, 0] = BOS
            tgt_in[i, 1:len(t) + 1] = torch.tensor(t)
            tgt_out[i, :len(t)] = torch.tensor(t)
            tgt_out[i, len(t)] = EOS
        yield blocks, tgt_in, tgt_out


def exact_match_rate(model: FusionSeq2Seq, vocab: Vocab, pairs: list) -> float:
    hits = 0
    for pair in pairs:
        blocks = [[vocab.encode(b) for b in pair.blocks]]
        best = model.beam_search(blocks, beam_size=1)
        if vocab.decode(best[0][0]) == " ".join(tokenize(pair.target)):
            hits += 1
    return hits / len(pairs)


def train_pairs(pairs: list, model_cfg: ModelConfig, train_cfg: TrainConfig) -> tuple:
    """Returns (model, vocab, history). Stops early once the model reproduces
    the training targets exactly."""
    torch.manual_seed(train_cfg.seed)
    texts = [p.target for p in pairs] + [b for p in pairs for b in p.blocks]
    vocab = Vocab.build(texts)
    model = FusionSeq2Seq(len(vocab), model_cfg)
    optimizer = torch.optim.Adam(model.parameters(), lr=train_cfg.learning_rate)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)
    history = []
    start = time.monotonic()
    for epoch in range(1, train_cfg.max_epochs + 1):
        model.train()
        total = 0.0
        for blocks, tgt_in, tgt_out in _batches(pairs, vocab, train_cfg.batch_size,
                                                model_cfg.max_target_len):
            optimizer.zero_grad()
            logits = model(blocks, tgt_in)
            loss = loss_fn(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))
            loss.backward()
            optimizer.step()
            total += loss.item()
        history.append({"epoch": epoch, "loss": total,
                        "elapsed": time.monotonic() - start})
        if epoch % train_cfg.check_every == 0 or epoch == train_cfg.max_epochs:
            em = exact_match_rate(model, vocab, pairs)
            history[-1]["exact_match"] = em
            log.info("epoch %d loss %.4f exact-match %.2f", epoch, total, em)
            if em >= train_cfg.target_exact_match:
                break
    model.eval()
    return model, vocab, history


def train_files(dataset_path, checkpoint_path, passages_path=None,
                model_cfg: ModelConfig | None = None,
                train_cfg: TrainConfig | None = None,
                log_path=None) -> list:
    model_cfg = model_cfg or ModelConfig()
    train_cfg = train_cfg or TrainConfig()
    examples = load_dataset(dataset_path)
    passages = load_passages(passages_path) if passages_path else None
    pairs = make_pairs(examples, passages, n_context=train_cfg.n_context,
                       seed=train_cfg.seed, n_variants=train_cfg.n_variants)
    model, vocab, history = train_pairs(pairs, model_cfg, train_cfg)
    save_checkpoint(checkpoint_path, model, vocab)
    if log_path:
        with open(log_path, "w", encoding="utf-8") as fh:
            json.dump(history, fh, indent=2)
    return history
