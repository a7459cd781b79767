"""White-box diagnostics over scoring traces: masked-term importance,
exact-vs-soft match score gaps, match statistics, and spectral
concentration of a term's contextual embeddings."""

from __future__ import annotations

from collections import Counter
from collections.abc import Collection, Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .correlation import tau_ap
from .eigen import gram_singular_values
from .model import (
    CandidateSet,
    CorpusStats,
    EmbeddingSequence,
    EmbeddingStore,
    UnknownTermError,
    idf,
)
from .scoring import QueryTrace, Ranking, rank_from_trace, trace_candidates

__all__ = [
    "DEFAULT_SPECTRAL_CAP",
    "DeltaESRow",
    "MatchStatsRow",
    "SpectralRow",
    "TermImportanceRow",
    "TOP_MATCHES",
    "aggregate_importance",
    "collect_occurrences",
    "collect_subword_pairs",
    "delta_es_subword",
    "delta_es_word",
    "match_stats",
    "match_stats_from_trace",
    "spectral_ratio",
    "term_importance",
    "term_importance_from_trace",
]

# Row cap for one term's occurrence matrix in the spectral diagnostic.
DEFAULT_SPECTRAL_CAP = 50_000

# Matched-token texts reported per query position.
TOP_MATCHES = 10


# ---------------------------------------------------------------------------
# Masked-term importance


@dataclass(frozen=True)
class TermImportanceRow:
    """Aggregated importance of one surface word across queries. Lower
    mean tau_ap = masking the word perturbs rankings more = more
    important. idf_word is None when corpus statistics never saw the
    word."""

    word: str
    per_query: tuple[tuple[str, float], ...]
    mean_tau_ap: float
    idf_word: float | None
    n_queries: int


def term_importance_from_trace(
    trace: QueryTrace, word_index: int, symmetric: bool = False
) -> tuple[Ranking, float]:
    """Mask one word of the traced query, re-rank, and compare with the
    unmasked ranking (the reference) by tau_ap."""
    if trace.n_docs < 2:
        raise ValueError(
            f"query '{trace.query.id}': term importance needs at least 2 candidates"
        )
    positions = [
        p for p, tok in enumerate(trace.query.tokens) if tok.word_index == word_index
    ]
    if not positions:
        raise ValueError(
            f"query '{trace.query.id}' has no word_index {word_index}"
        )
    original = rank_from_trace(trace)
    masked = rank_from_trace(trace, positions)
    value = tau_ap(original.doc_ids, masked.doc_ids, symmetric=symmetric)
    return masked, value


def term_importance(
    query: EmbeddingSequence,
    candidates: CandidateSet,
    docs: EmbeddingStore,
    word_index: int,
    symmetric: bool = False,
) -> tuple[Ranking, float]:
    """Convenience wrapper around term_importance_from_trace for a single
    (query, word) probe."""
    trace = trace_candidates(query, candidates, docs)
    return term_importance_from_trace(trace, word_index, symmetric=symmetric)


def aggregate_importance(
    per_query: Iterable[tuple[str, str, float]],
    stats: CorpusStats | None = None,
) -> list[TermImportanceRow]:
    """Group (word, query_id, tau_ap) triples by word string. Rows are
    sorted by word; the same surface word in several queries averages over
    them. Words missing from the stats keep idf_word=None rather than
    being dropped."""
    grouped: dict[str, list[tuple[str, float]]] = {}
    for word, query_id, value in per_query:
        grouped.setdefault(word, []).append((query_id, value))
    rows = []
    for word in sorted(grouped):
        entries = sorted(grouped[word])
        values = [v for _, v in entries]
        idf_word: float | None = None
        if stats is not None:
            try:
                idf_word = idf(stats, word, "word")
            except UnknownTermError:
                idf_word = None
        rows.append(
            TermImportanceRow(
                word=word,
                per_query=tuple(entries),
                mean_tau_ap=float(np.mean(values)),
                idf_word=idf_word,
                n_queries=len(entries),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Exact-vs-soft match score gap


@dataclass(frozen=True)
class DeltaESRow:
    """Mean exact-minus-soft c_max gap for one term.

    delta_es is None when no (query, position) pair had both an exact and
    a soft side; `partial` marks a word-level row whose sum had to skip an
    undefined subword."""

    term: str
    granularity: str
    delta_es: float | None
    partial: bool
    n_pairs_used: int
    n_pairs_skipped: int
    idf: float | None


def collect_subword_pairs(
    traces: Iterable[QueryTrace],
) -> dict[str, list[tuple[np.ndarray, np.ndarray]]]:
    """Gather, per query subword text, one (c_max column, exact-match
    flags) pair for every (query, position) occurrence of that text."""
    pairs: dict[str, list[tuple[np.ndarray, np.ndarray]]] = {}
    for trace in traces:
        matched = np.array(trace.matched_text, dtype=object)
        for i, tok in enumerate(trace.query.tokens):
            exact = matched[:, i] == tok.text
            pairs.setdefault(tok.text, []).append((trace.c_max[:, i], exact))
    return pairs


def delta_es_subword(
    term: str,
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    term_idf: float | None = None,
) -> DeltaESRow:
    """Average, over (query, position) pairs carrying this subword, the
    gap mean(c_max | exact match) - mean(c_max | soft match).

    A pair whose candidate set has no exact match, or no soft match,
    contributes nothing and is counted in n_pairs_skipped."""
    diffs = []
    skipped = 0
    for c_vals, exact in pairs:
        c = np.asarray(c_vals, dtype=np.float64)
        mask = np.asarray(exact, dtype=bool)
        if mask.all() or not mask.any():
            skipped += 1
            continue
        diffs.append(float(c[mask].mean() - c[~mask].mean()))
    value = float(np.mean(diffs)) if diffs else None
    return DeltaESRow(
        term=term,
        granularity="subword",
        delta_es=value,
        partial=False,
        n_pairs_used=len(diffs),
        n_pairs_skipped=skipped,
        idf=term_idf,
    )


def delta_es_word(
    word: str,
    subword_rows: Sequence[DeltaESRow],
    word_idf: float | None = None,
) -> DeltaESRow:
    """Word-level gap: the sum over the word's subword sequence of each
    defined subword gap. Undefined when every constituent is undefined;
    partial when only some are."""
    if not subword_rows:
        raise ValueError(f"word '{word}' has no subword rows")
    defined = [row.delta_es for row in subword_rows if row.delta_es is not None]
    value = float(sum(defined)) if defined else None
    return DeltaESRow(
        term=word,
        granularity="word",
        delta_es=value,
        partial=bool(defined) and len(defined) < len(subword_rows),
        n_pairs_used=sum(r.n_pairs_used for r in subword_rows),
        n_pairs_skipped=sum(r.n_pairs_skipped for r in subword_rows),
        idf=word_idf,
    )


# ---------------------------------------------------------------------------
# Match statistics


@dataclass(frozen=True)
class MatchStatsRow:
    """What one query position matched across its candidate documents.

    Frequencies are fractions of the candidate set. exact_match_freq
    counts documents whose matched token text equals the position's own
    text; other_query_term_freq counts documents whose matched text
    differs from it but equals a query token text of a different word."""

    query_id: str
    position: int
    token: str
    exact_match_freq: float
    other_query_term_freq: float
    top_matched_tokens: tuple[tuple[str, float], ...]


def match_stats_from_trace(trace: QueryTrace, k: int = TOP_MATCHES) -> list[MatchStatsRow]:
    if trace.n_docs < 1:
        raise ValueError(f"query '{trace.query.id}' has no candidates to match against")
    n_docs = trace.n_docs
    rows = []
    for i, tok in enumerate(trace.query.tokens):
        other_texts = {
            t.text for t in trace.query.tokens if t.word_index != tok.word_index
        }
        matched = [trace.matched_text[d][i] for d in range(n_docs)]
        exact = sum(1 for text in matched if text == tok.text)
        other = sum(1 for text in matched if text != tok.text and text in other_texts)
        counts = Counter(matched)
        # Most frequent first; frequency ties resolved lexicographically.
        top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        rows.append(
            MatchStatsRow(
                query_id=trace.query.id,
                position=i,
                token=tok.text,
                exact_match_freq=exact / n_docs,
                other_query_term_freq=other / n_docs,
                top_matched_tokens=tuple((text, cnt / n_docs) for text, cnt in top),
            )
        )
    return rows


def match_stats(
    query: EmbeddingSequence,
    candidates: CandidateSet,
    docs: EmbeddingStore,
    k: int = TOP_MATCHES,
) -> list[MatchStatsRow]:
    """Per-position match statistics of one query over its candidates."""
    return match_stats_from_trace(trace_candidates(query, candidates, docs), k=k)


# ---------------------------------------------------------------------------
# Spectral concentration


@dataclass(frozen=True)
class SpectralRow:
    """Concentration of one subword's document-side embeddings: the share
    of the largest singular value in the singular-value sum over the
    min(m, d) values of the (uncentered) occurrence matrix. Near 1 means
    every occurrence points the same way."""

    term: str
    n_occurrences: int
    singular_values: tuple[float, ...]
    ratio: float
    idf_subword: float | None


def collect_occurrences(
    candidate_sets: Iterable[CandidateSet],
    docs: EmbeddingStore,
    terms: Collection[str] | None = None,
) -> dict[str, np.ndarray]:
    """Stack document-side embedding rows per subword text.

    Pools over the union of documents named by the candidate sets; a
    document appearing in several sets contributes each (doc, position)
    occurrence once. Documents are visited in sorted-id order so row
    order, and with it any capped subsample, is reproducible. With
    `terms`, only those texts are collected."""
    wanted = None if terms is None else set(terms)
    doc_ids = sorted({doc_id for cs in candidate_sets for doc_id in cs.doc_ids})
    rows: dict[str, list[np.ndarray]] = {}
    for doc_id in doc_ids:
        doc = docs[doc_id]
        for pos, tok in enumerate(doc.tokens):
            if wanted is not None and tok.text not in wanted:
                continue
            rows.setdefault(tok.text, []).append(doc.matrix[pos])
    return {text: np.stack(vecs) for text, vecs in rows.items()}


def spectral_ratio(
    term: str,
    occurrence_rows: np.ndarray,
    cap: int = DEFAULT_SPECTRAL_CAP,
    seed: int = 0,
    term_idf: float | None = None,
) -> SpectralRow:
    """Singular-value concentration of one term's occurrence matrix.

    No mean-centering is applied: a shared direction is exactly the signal
    this diagnostic looks for. Over `cap` rows, a seeded uniform draw
    without replacement keeps the computation bounded and reproducible.
    """
    x = np.asarray(occurrence_rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"term '{term}' has no occurrence rows")
    m = x.shape[0]
    if m > cap:
        rng = np.random.default_rng(seed)
        picked = np.sort(rng.choice(m, size=cap, replace=False))
        x = x[picked]
    svals = gram_singular_values(x)
    total = float(svals.sum())
    return SpectralRow(
        term=term,
        n_occurrences=m,
        singular_values=tuple(float(v) for v in svals),
        ratio=float(svals[0]) / total,
        idf_subword=term_idf,
    )
