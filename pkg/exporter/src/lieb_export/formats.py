"""Writers for the two file formats the analysis toolkit consumes.

LIEB layout (all little-endian): magic "LIEB", version u16, flags u16,
dim u32, sequence count u64; then per sequence its id (u16 length +
UTF-8), token count u32, per token the text (u16 length + UTF-8) and a
word_index u32, and finally the n_tokens x dim float32 matrix row-major.

The stats table is a three-column TSV (term, df, granularity) headed by
"#N <doc count>", subword rows first, each block sorted by term.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

LIEB_MAGIC = b"LIEB"
LIEB_VERSION = 1
FLAG_LOWERCASED = 0x0001

# One exported sequence: (id, [(subword text, word_index), ...], matrix).
Record = tuple[str, Sequence[tuple[str, int]], np.ndarray]


def _utf8_field(text: str, what: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError(f"{what} is longer than 65535 UTF-8 bytes")
    return struct.pack("<H", len(raw)) + raw


def write_lieb(records: Iterable[Record], dim: int, path: str | Path,
               lowercased: bool = True) -> Path:
    """Serialize exported sequences. Embeddings are written as given
    (pre-normalization; the toolkit normalizes on load)."""
    records = list(records)
    if not records:
        raise ValueError("refusing to write a LIEB file with no sequences")
    flags = FLAG_LOWERCASED if lowercased else 0

    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(LIEB_MAGIC)
        fh.write(struct.pack("<HHIQ", LIEB_VERSION, flags, dim, len(records)))
        for seq_id, tokens, matrix in records:
            matrix = np.asarray(matrix, dtype=np.float32)
            if matrix.shape != (len(tokens), dim):
                raise ValueError(
                    f"sequence '{seq_id}': matrix shape {matrix.shape} does not "
                    f"match {len(tokens)} tokens of dimension {dim}"
                )
            if not tokens:
                raise ValueError(f"sequence '{seq_id}' has no tokens")
            fh.write(_utf8_field(seq_id, f"sequence id '{seq_id}'"))
            fh.write(struct.pack("<I", len(tokens)))
            for text, word_index in tokens:
                fh.write(_utf8_field(text, f"token '{text}'"))
                fh.write(struct.pack("<I", word_index))
            fh.write(matrix.tobytes(order="C"))
    return path


def join_word(pieces: Sequence[str]) -> str:
    """Surface word from its subword pieces: continuation markers dropped."""
    return "".join(p[2:] if p.startswith("##") else p for p in pieces)


def count_frequencies(
    token_lists: Iterable[Sequence[tuple[str, int]]],
) -> tuple[int, dict[str, int], dict[str, int]]:
    """Document frequencies at both granularities over tokenized texts.

    A term counts once per document regardless of how often it occurs.
    Returns (n_docs, df_subword, df_word).
    """
    df_sub: dict[str, int] = {}
    df_word: dict[str, int] = {}
    n_docs = 0
    for tokens in token_lists:
        n_docs += 1
        for text in {t for t, _ in tokens}:
            df_sub[text] = df_sub.get(text, 0) + 1
        by_word: dict[int, list[str]] = {}
        for text, word_index in tokens:
            by_word.setdefault(word_index, []).append(text)
        for word in {join_word(pieces) for pieces in by_word.values()}:
            df_word[word] = df_word.get(word, 0) + 1
    return n_docs, df_sub, df_word


def write_stats(n_docs: int, df_subword: Mapping[str, int],
                df_word: Mapping[str, int], path: str | Path) -> Path:
    path = Path(path)
    lines = [f"#N {n_docs}"]
    for granularity, table in (("subword", df_subword), ("word", df_word)):
        for term in sorted(table):
            if "\t" in term or "\n" in term:
                raise ValueError(f"term {term!r} contains a tab or newline")
            lines.append(f"{term}\t{table[term]}\t{granularity}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
