"""Transformer token-embedding exporter for the LIEB analysis toolkit."""

from .config import MAX_SEQUENCE_TOKENS, ExportConfig
from .encode import (
    Encoder,
    export_collection,
    export_corpus_stats,
    tokenize_collection,
)
from .formats import (
    FLAG_LOWERCASED,
    count_frequencies,
    join_word,
    write_lieb,
    write_stats,
)

__version__ = "0.1.0"

__all__ = [
    "ExportConfig",
    "Encoder",
    "MAX_SEQUENCE_TOKENS",
    "FLAG_LOWERCASED",
    "count_frequencies",
    "export_collection",
    "export_corpus_stats",
    "join_word",
    "tokenize_collection",
    "write_lieb",
    "write_stats",
    "__version__",
]
