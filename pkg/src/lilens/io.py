"""File formats: LIEB embedding dumps, TREC-style run files, and
corpus-statistics tables.

LIEB layout (all integers little-endian):

    magic   4 bytes  b"LIEB"
    version u16      currently 1
    flags   u16      producer flags (bit 0: texts were lowercased)
    dim     u32      embedding dimension, shared by every sequence
    count   u64      number of sequences
    then per sequence:
        id_len   u16, id bytes (UTF-8)
        n_tokens u32
        per token: tok_len u16, token bytes (UTF-8), word_index u32
        n_tokens * dim float32 embedding rows, row-major
"""

from __future__ import annotations

import struct
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from .model import (
    CandidateSet,
    CorpusStats,
    EmbeddingSequence,
    EmbeddingStore,
    InputError,
    Token,
    make_sequence,
)

__all__ = [
    "LIEB_MAGIC",
    "LIEB_VERSION",
    "RUN_TAG",
    "load_corpus_stats",
    "load_embeddings",
    "load_run",
    "write_corpus_stats",
    "write_embeddings",
    "write_run",
]

LIEB_MAGIC = b"LIEB"
LIEB_VERSION = 1

# Tag written into run files produced by the re-ranker.
RUN_TAG = "lilens"

_GRANULARITIES = ("subword", "word")


class _Cursor:
    """Sequential reader over a byte buffer that fails loudly on truncation."""

    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise InputError(f"{self.path}: truncated file")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Read a LIEB file into an immutable store.

    Rows are re-normalized to unit length on load. Raises InputError (with
    the file name in the message) for a bad magic, unsupported version,
    truncation, zero-norm rows, or sequences over the token cap.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    cur = _Cursor(data, str(path))
    if cur.take(4) != LIEB_MAGIC:
        raise InputError(f"{path}: not a LIEB file (bad magic)")
    version = cur.u16()
    if version != LIEB_VERSION:
        raise InputError(f"{path}: unsupported LIEB version {version}")
    flags = cur.u16()
    dim = cur.u32()
    if dim < 1:
        raise InputError(f"{path}: embedding dimension 0")
    count = cur.u64()

    sequences = []
    for _ in range(count):
        seq_id = cur.take(cur.u16()).decode("utf-8")
        n_tokens = cur.u32()
        tokens = []
        for _ in range(n_tokens):
            text = cur.take(cur.u16()).decode("utf-8")
            tokens.append(Token(text=text, word_index=cur.u32()))
        raw = cur.take(n_tokens * dim * 4)
        matrix = np.frombuffer(raw, dtype="<f4").reshape(n_tokens, dim)
        try:
            sequences.append(make_sequence(seq_id, tokens, matrix))
        except InputError as exc:
            raise InputError(f"{path}: {exc}") from exc
    if cur.pos != len(data):
        raise InputError(f"{path}: {len(data) - cur.pos} trailing bytes after last sequence")
    try:
        return EmbeddingStore(sequences, flags=flags)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


def write_embeddings(
    sequences: EmbeddingStore | Iterable[EmbeddingSequence],
    path: str | Path,
    flags: int | None = None,
) -> None:
    """Write sequences to a LIEB file. Accepts a store or an iterable; an
    iterable is validated through EmbeddingStore first."""
    if not isinstance(sequences, EmbeddingStore):
        store = EmbeddingStore(sequences, flags=flags or 0)
    else:
        store = sequences
    if flags is None:
        flags = store.flags
    parts = [LIEB_MAGIC, struct.pack("<HHIQ", LIEB_VERSION, flags, store.dim, len(store))]
    for seq in store.values():
        id_bytes = seq.id.encode("utf-8")
        if len(id_bytes) > 0xFFFF:
            raise InputError(f"sequence id '{seq.id[:32]}...' over 65535 bytes")
        parts.append(struct.pack("<H", len(id_bytes)))
        parts.append(id_bytes)
        parts.append(struct.pack("<I", seq.n_tokens))
        for tok in seq.tokens:
            text_bytes = tok.text.encode("utf-8")
            if len(text_bytes) > 0xFFFF:
                raise InputError(f"token text over 65535 bytes in sequence '{seq.id}'")
            parts.append(struct.pack("<H", len(text_bytes)))
            parts.append(text_bytes)
            parts.append(struct.pack("<I", tok.word_index))
        parts.append(np.ascontiguousarray(seq.matrix, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_run(path: str | Path) -> list[CandidateSet]:
    """Parse a TREC run file: ``qid Q0 docid rank score tag`` per line.

    Candidates are grouped per query (queries in first-seen order) and
    ordered by ascending rank. Raises InputError, naming the line, for a
    malformed line, a non-numeric rank or score, a duplicate
    (query, doc) pair, or a candidate set over the cap.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc

    per_query: dict[str, list[tuple[int, int, str, float]]] = {}
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 6:
            raise InputError(f"{path}:{lineno}: expected 6 fields, got {len(fields)}")
        qid, _, doc_id, rank_s, score_s, _ = fields
        try:
            rank = int(rank_s)
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-integer rank '{rank_s}'") from None
        try:
            score = float(score_s)
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-numeric score '{score_s}'") from None
        if (qid, doc_id) in seen:
            raise InputError(f"{path}:{lineno}: duplicate candidate '{doc_id}' for query '{qid}'")
        seen.add((qid, doc_id))
        per_query.setdefault(qid, []).append((rank, lineno, doc_id, score))

    if not per_query:
        raise InputError(f"{path}: run file holds no candidates")
    out = []
    for qid, rows in per_query.items():
        rows.sort(key=lambda r: (r[0], r[1]))
        try:
            out.append(
                CandidateSet(
                    query_id=qid,
                    doc_ids=tuple(r[2] for r in rows),
                    first_stage_scores=tuple(r[3] for r in rows),
                )
            )
        except InputError as exc:
            raise InputError(f"{path}: {exc}") from exc
    return out


def write_run(rankings: Iterable, path: str | Path, tag: str = RUN_TAG) -> None:
    """Write rankings (objects with query_id and ordered (doc_id, score)
    entries) in TREC run format, scores to 9 significant digits."""
    lines = []
    for ranking in rankings:
        for rank, (doc_id, score) in enumerate(ranking.entries, start=1):
            lines.append(f"{ranking.query_id} Q0 {doc_id} {rank} {score:.9g} {tag}\n")
    Path(path).write_text("".join(lines), encoding="utf-8")


def write_corpus_stats(stats: CorpusStats, path: str | Path) -> None:
    """Write the canonical three-column stats table:

        #N <n_docs>
        term <TAB> df <TAB> granularity

    Terms are sorted within each granularity, subword block first.
    """
    lines = [f"#N {stats.n_docs}\n"]
    for granularity, table in (("subword", stats.df_subword), ("word", stats.df_word)):
        for term in sorted(table):
            if "\t" in term or "\n" in term or "\r" in term:
                raise InputError(f"term {term!r} cannot be written to a tab-separated table")
            lines.append(f"{term}\t{table[term]}\t{granularity}\n")
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_corpus_stats(path: str | Path, granularity: str | None = None) -> CorpusStats:
    """Read a stats table. Three-column rows carry their own granularity;
    a two-column table is legal only when `granularity` names which single
    table the file holds."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    if not lines or not lines[0].startswith("#N "):
        raise InputError(f"{path}: first line must be '#N <count>'")
    try:
        n_docs = int(lines[0][3:].strip())
    except ValueError:
        raise InputError(f"{path}: malformed document count {lines[0]!r}") from None

    tables: dict[str, dict[str, int]] = {"subword": {}, "word": {}}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) == 3:
            term, df_s, gran = fields
        elif len(fields) == 2:
            if granularity is None:
                raise InputError(
                    f"{path}:{lineno}: two-column row but no granularity was given for the file"
                )
            term, df_s = fields
            gran = granularity
        else:
            raise InputError(f"{path}:{lineno}: expected 2 or 3 tab-separated fields")
        if gran not in _GRANULARITIES:
            raise InputError(f"{path}:{lineno}: unknown granularity '{gran}'")
        try:
            df = int(df_s)
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-integer df '{df_s}'") from None
        if term in tables[gran]:
            raise InputError(f"{path}:{lineno}: duplicate {gran} term '{term}'")
        tables[gran][term] = df
    try:
        return CorpusStats(n_docs=n_docs, df_subword=tables["subword"], df_word=tables["word"])
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc
