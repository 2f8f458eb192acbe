"""Seq2seq reader service: per-passage encoding, joint beam decoding."""

__version__ = "0.1.0"
