"""Word-level vocabulary shared by encoder and decoder."""

from __future__ import annotations

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>", "<passage>", "<question>"]
PASSAGE_MODE = 4
QUESTION_MODE = 5


def tokenize(text: str) -> list:
    """Whitespace tokens with brackets/parens split off (logical form syntax)."""
    for ch in "()[]":
        text = text.replace(ch, f" {ch} ")
    return text.split()


def detokenize(tokens: list) -> str:
    return " ".join(tokens)


class Vocab:
    def __init__(self, tokens: list):
        self.itos = list(SPECIALS) + [t for t in tokens if t not in SPECIALS]
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    def __len__(self):
        return len(self.itos)

    @classmethod
    def build(cls, texts) -> "Vocab":
        seen = dict.fromkeys(tok for text in texts for tok in tokenize(text))
        return cls(list(seen))

    def encode(self, text: str) -> list:
        return [self.stoi.get(tok, UNK) for tok in tokenize(text)]

    def decode(self, ids) -> str:
        out = []
        for i in ids:
            if i == EOS:
                break
            if i in (PAD, BOS):
                continue
            out.append(self.itos[i] if i < len(self.itos) else "<unk>")
        return detokenize(out)
