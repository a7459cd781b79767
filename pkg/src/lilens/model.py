"""Domain types for late-interaction analysis: tokens, embedding sequences,
embedding stores, candidate sets, and corpus-level term statistics."""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CONTINUATION_MARKER",
    "MAX_CANDIDATES",
    "MAX_SEQUENCE_TOKENS",
    "CandidateSet",
    "CorpusStats",
    "EmbeddingSequence",
    "EmbeddingStore",
    "InputError",
    "Token",
    "UnknownTermError",
    "compute_corpus_stats",
    "idf",
    "make_sequence",
    "word_strings",
]

# Subword prefix marking "continues the previous token's word" (WordPiece style).
CONTINUATION_MARKER = "##"

# Sequences longer than this are rejected at load time.
MAX_SEQUENCE_TOKENS = 512

# Upper bound on candidate-set size for one query.
MAX_CANDIDATES = 1000

_ZERO_NORM = 1e-12


class InputError(ValueError):
    """An ingested file or structure violates its contract."""


class UnknownTermError(KeyError):
    """A term was looked up in corpus statistics that never indexed it."""


@dataclass(frozen=True)
class Token:
    """One subword: its exact text (continuation marker included) and the
    index of the surface word it belongs to."""

    text: str
    word_index: int


@dataclass(frozen=True)
class EmbeddingSequence:
    """A tokenized query or passage with one unit-normalized embedding row
    per subword token.

    Attributes
    ----------
    id : str
        Identifier, unique within a store.
    tokens : tuple[Token, ...]
        Subword tokens, aligned 1:1 with matrix rows.
    matrix : np.ndarray
        Shape (n_tokens, dim), float32, read-only. Every row has unit
        Euclidean norm (within float32 rounding), so cosine similarity
        reduces to a dot product.
    """

    id: str
    tokens: tuple[Token, ...]
    matrix: np.ndarray = field(repr=False)

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def word_positions(self) -> dict[int, tuple[int, ...]]:
        """Map each word_index to the token positions composing that word."""
        spans: dict[int, list[int]] = {}
        for pos, tok in enumerate(self.tokens):
            spans.setdefault(tok.word_index, []).append(pos)
        return {w: tuple(ps) for w, ps in spans.items()}

    def words(self) -> list[str]:
        """Surface word strings in order of word_index."""
        return word_strings(self.tokens)


def word_strings(tokens: Sequence[Token]) -> list[str]:
    """Reconstruct surface words: concatenate each word's subwords with the
    continuation marker stripped."""
    out: list[str] = []
    for tok in tokens:
        piece = tok.text
        if piece.startswith(CONTINUATION_MARKER):
            piece = piece[len(CONTINUATION_MARKER):]
        if tok.word_index == len(out):
            out.append(piece)
        else:
            out[tok.word_index] += piece
    return out


def make_sequence(seq_id: str, tokens: Sequence[Token], matrix: np.ndarray) -> EmbeddingSequence:
    """Validate and normalize one sequence.

    Rows are normalized to unit length in float64 and stored as read-only
    float32. Raises InputError for an empty sequence, a sequence over the
    512-token cap, a token/row count mismatch, a near-zero embedding row,
    or word indices that do not start at 0 and advance in steps of 0 or 1.
    """
    toks = tuple(tokens)
    if len(toks) == 0:
        raise InputError(f"sequence '{seq_id}' has no tokens")
    if len(toks) > MAX_SEQUENCE_TOKENS:
        raise InputError(
            f"sequence '{seq_id}' has {len(toks)} tokens, over the {MAX_SEQUENCE_TOKENS} cap"
        )
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != len(toks):
        raise InputError(
            f"sequence '{seq_id}': embedding matrix shape {mat.shape} does not match "
            f"{len(toks)} tokens"
        )
    if mat.shape[1] < 1:
        raise InputError(f"sequence '{seq_id}' has embedding dimension 0")

    prev = -1
    for pos, tok in enumerate(toks):
        step = tok.word_index - prev
        if step not in (0, 1):
            raise InputError(
                f"sequence '{seq_id}': word_index {tok.word_index} at position {pos} "
                f"does not follow {prev} in steps of 0 or 1"
            )
        prev = tok.word_index

    norms = np.linalg.norm(mat, axis=1)
    bad = np.flatnonzero(norms < _ZERO_NORM)
    if bad.size:
        raise InputError(
            f"sequence '{seq_id}': embedding row {int(bad[0])} has near-zero norm"
        )
    unit = (mat / norms[:, None]).astype(np.float32)
    unit.flags.writeable = False
    return EmbeddingSequence(id=seq_id, tokens=toks, matrix=unit)


class EmbeddingStore(Mapping):
    """Immutable id -> EmbeddingSequence map with one common embedding
    dimension. Insertion order of sequences is preserved."""

    def __init__(self, sequences: Iterable[EmbeddingSequence], flags: int = 0):
        seqs: dict[str, EmbeddingSequence] = {}
        dim: int | None = None
        for seq in sequences:
            if seq.id in seqs:
                raise InputError(f"duplicate sequence id '{seq.id}'")
            if dim is None:
                dim = seq.dim
            elif seq.dim != dim:
                raise InputError(
                    f"sequence '{seq.id}' has dimension {seq.dim}, expected {dim}"
                )
            seqs[seq.id] = seq
        if dim is None:
            raise InputError("embedding store holds no sequences")
        self._seqs = seqs
        self._dim = dim
        self._flags = int(flags)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def flags(self) -> int:
        return self._flags

    def __getitem__(self, seq_id: str) -> EmbeddingSequence:
        return self._seqs[seq_id]

    def __iter__(self) -> Iterator[str]:
        return iter(self._seqs)

    def __len__(self) -> int:
        return len(self._seqs)

    def __repr__(self) -> str:
        return f"EmbeddingStore({len(self)} sequences, dim={self.dim})"


@dataclass(frozen=True)
class CandidateSet:
    """First-stage candidates for one query, ordered by first-stage rank."""

    query_id: str
    doc_ids: tuple[str, ...]
    first_stage_scores: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.doc_ids)
        if n < 1:
            raise InputError(f"query '{self.query_id}': empty candidate set")
        if n > MAX_CANDIDATES:
            raise InputError(
                f"query '{self.query_id}': {n} candidates, over the {MAX_CANDIDATES} cap"
            )
        if len(set(self.doc_ids)) != n:
            raise InputError(f"query '{self.query_id}': duplicate doc_id in candidate set")
        if self.first_stage_scores is not None and len(self.first_stage_scores) != n:
            raise InputError(
                f"query '{self.query_id}': {len(self.first_stage_scores)} first-stage "
                f"scores for {n} candidates"
            )


@dataclass(frozen=True)
class CorpusStats:
    """Document-frequency tables at subword and word granularity."""

    n_docs: int
    df_subword: Mapping[str, int]
    df_word: Mapping[str, int]

    def __post_init__(self) -> None:
        if self.n_docs < 1:
            raise InputError("corpus statistics require at least one document")
        for name, table in (("subword", self.df_subword), ("word", self.df_word)):
            for term, df in table.items():
                if not 1 <= df <= self.n_docs:
                    raise InputError(
                        f"{name} term '{term}': df={df} outside [1, {self.n_docs}]"
                    )


def compute_corpus_stats(corpus: Iterable[Sequence[Token]]) -> CorpusStats:
    """Count, per term, the number of distinct documents containing it.

    `corpus` yields one token sequence per document. Words are grouped by
    word_index and compared as reconstructed surface strings; subwords are
    compared byte-exact, continuation markers included.
    """
    df_sub: dict[str, int] = {}
    df_word: dict[str, int] = {}
    n_docs = 0
    for tokens in corpus:
        n_docs += 1
        for text in {tok.text for tok in tokens}:
            df_sub[text] = df_sub.get(text, 0) + 1
        for word in set(word_strings(tokens)):
            df_word[word] = df_word.get(word, 0) + 1
    if n_docs == 0:
        raise InputError("cannot compute statistics for an empty corpus")
    return CorpusStats(n_docs=n_docs, df_subword=df_sub, df_word=df_word)


def idf(stats: CorpusStats, term: str, granularity: str = "subword") -> float:
    """Inverse document frequency, ln(N / df), with df clamped to >= 1.

    Raises UnknownTermError for a term absent from the requested table, so
    callers can choose to skip it.
    """
    if granularity == "subword":
        table = stats.df_subword
    elif granularity == "word":
        table = stats.df_word
    else:
        raise ValueError(f"unknown granularity '{granularity}'")
    if term not in table:
        raise UnknownTermError(term)
    return math.log(stats.n_docs / max(table[term], 1))
