"""Fusion-style seq2seq: each input block is encoded separately and the
decoder attends over the concatenation of all block states."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import torch
import torch.nn as nn

from .vocab import BOS, EOS, PAD, Vocab


@dataclass
class ModelConfig:
    d_model: int = 96
    n_heads: int = 4
    n_encoder_layers: int = 2
    n_decoder_layers: int = 2
    dim_feedforward: int = 256
    dropout: float = 0.1
    max_block_len: int = 64
    max_target_len: int = 48


class PositionalEncoding(nn.Module):
    def __init__(self, d_model: int, max_len: int = 512):
        super().__init__()
        position = torch.arange(max_len).unsqueeze(1)
        div = torch.exp(torch.arange(0, d_model, 2) * (-math.log(10000.0) / d_model))
        pe = torch.zeros(max_len, d_model)
        pe[:, 0::2] = torch.sin(position * div)
        pe[:, 1::2] = torch.cos(position * div)
        self.register_buffer("pe", pe)

    def forward(self, x):
        return x + self.pe[: x.size(1)].unsqueeze(0)


class FusionSeq2Seq(nn.Module):
    def __init__(self, vocab_size: int, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.embedding = nn.Embedding(vocab_size, cfg.d_model, padding_idx=PAD)
        self.pos = PositionalEncoding(cfg.d_model, max(cfg.max_block_len,
                                                       cfg.max_target_len) + 8)
        self.encoder = nn.TransformerEncoder(
            nn.TransformerEncoderLayer(cfg.d_model, cfg.n_heads, cfg.dim_feedforward,
                                       cfg.dropout, batch_first=True),
            cfg.n_encoder_layers)
        self.decoder = nn.TransformerDecoder(
            nn.TransformerDecoderLayer(cfg.d_model, cfg.n_heads, cfg.dim_feedforward,
                                       cfg.dropout, batch_first=True),
            cfg.n_decoder_layers)
        self.out_proj = nn.Linear(cfg.d_model, vocab_size)

    # -- encoding ------------------------------------------------------------

    def _pad_blocks(self, block_ids: list) -> tuple:
        """block_ids: per example, list of token-id lists. Returns a flat
        (n_examples * max_blocks, max_len) tensor plus its pad mask."""
        max_blocks = max(len(blocks) for blocks in block_ids)
        max_len = min(self.cfg.max_block_len,
                      max(max((len(b) for b in blocks), default=1)
                          for blocks in block_ids))
        max_len = max(max_len, 1)
        n = len(block_ids)
        src = torch.full((n, max_blocks, max_len), PAD, dtype=torch.long)
        for i, blocks in enumerate(block_ids):
            for j, block in enumerate(blocks):
                ids = block[:max_len]
                src[i, j, :len(ids)] = torch.tensor(ids, dtype=torch.long)
        return src, max_blocks, max_len

    def encode(self, block_ids: list) -> tuple:
        """Each block passes the encoder independently; states are concatenated
        per example into one memory sequence."""
        src, max_blocks, max_len = self._pad_blocks(block_ids)
        device = self.embedding.weight.device
        src = src.to(device)
        flat = src.view(-1, max_len)
        pad_mask = flat.eq(PAD)
        states = self.encoder(self.pos(self.embedding(flat)),
                              src_key_padding_mask=pad_mask)
        memory = states.view(len(block_ids), max_blocks * max_len, -1)
        memory_mask = pad_mask.view(len(block_ids), max_blocks * max_len)
        # a fully padded memory row breaks attention; keep one position open
        memory_mask = memory_mask.clone()
        memory_mask[:, 0] = False
        return memory, memory_mask

    # -- training ------------------------------------------------------------

    def forward(self, block_ids: list, target_in: torch.Tensor) -> torch.Tensor:
        memory, memory_mask = self.encode(block_ids)
        causal = nn.Transformer.generate_square_subsequent_mask(
            target_in.size(1), device=memory.device)
        dec = self.decoder(self.pos(self.embedding(target_in)), memory,
                           tgt_mask=causal,
                           tgt_key_padding_mask=target_in.eq(PAD),
                           memory_key_padding_mask=memory_mask)
        return self.out_proj(dec)

    # -- inference -----------------------------------------------------------

    @torch.no_grad()
    def beam_search(self, block_ids: list, beam_size: int,
                    max_len: int | None = None) -> list:
        """Beam decode one example; returns [(token_ids, score)] best-first."""
        assert len(block_ids) == 1
        self.eval()
        max_len = max_len or self.cfg.max_target_len
        memory, memory_mask = self.encode(block_ids)
        device = memory.device
        beams = [([BOS], 0.0)]
        finished = []
        for _ in range(max_len):
            live = [(seq, score) for seq, score in beams if seq[-1] != EOS]
            if not live:
                break
            tgt = torch.tensor([seq for seq, _ in live], dtype=torch.long,
                               device=device)
            mem = memory.expand(len(live), -1, -1)
            mask = memory_mask.expand(len(live), -1)
            causal = nn.Transformer.generate_square_subsequent_mask(
                tgt.size(1), device=device)
            dec = self.decoder(self.pos(self.embedding(tgt)), mem,
                               tgt_mask=causal, memory_key_padding_mask=mask)
            logprobs = torch.log_softmax(self.out_proj(dec[:, -1]), dim=-1)
            candidates = []
            for i, (seq, score) in enumerate(live):
                top = torch.topk(logprobs[i], beam_size)
                for logp, tok in zip(top.values.tolist(), top.indices.tolist()):
                    candidates.append((seq + [tok], score + logp))
            candidates.sort(key=lambda c: -c[1])
            beams = candidates[:beam_size]
            finished.extend((seq, score) for seq, score in beams if seq[-1] == EOS)
            if len(finished) >= beam_size:
                break
        if not finished:
            finished = beams
        # rank by mean log-prob so shorter sequences get no free advantage
        finished.sort(key=lambda c: -c[1] / max(len(c[0]) - 1, 1))
        return [(seq, score / max(len(seq) - 1, 1)) for seq, score in finished[:beam_size]]

    @torch.no_grad()
    def embed_text(self, token_ids: list) -> torch.Tensor:
        """Mean-pooled encoder state of one token sequence."""
        self.eval()
        memory, memory_mask = self.encode([[token_ids]])
        keep = (~memory_mask).unsqueeze(-1).float()
        pooled = (memory * keep).sum(1) / keep.sum(1).clamp(min=1.0)
        return pooled[0]


def save_checkpoint(path, model: FusionSeq2Seq, vocab: Vocab):
    torch.save({
        "config": asdict(model.cfg),
        "vocab": vocab.itos,
        "state_dict": model.state_dict(),
    }, path)


def load_checkpoint(path) -> tuple:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    cfg = ModelConfig(**payload["config"])
    vocab = Vocab([])
    vocab.itos = payload["vocab"]
    vocab.stoi = {t: i for i, t in enumerate(vocab.itos)}
    model = FusionSeq2Seq(len(vocab), cfg)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, vocab
