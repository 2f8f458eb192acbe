"""KBQA pipeline: KB linearization, passage retrieval, logical-form execution,
and answer combination."""

__version__ = "0.1.0"
