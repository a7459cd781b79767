"""Late-interaction scoring: per-token max-similarity with argmax tracing,
masked variants, and candidate re-ranking.

The relevance score of a document for a query is the sum, over query
tokens, of the maximum cosine similarity against any document token.
Embeddings are unit rows, so cosine is a plain dot product. Similarities
and score sums are computed in float64 regardless of storage precision.
"""

from __future__ import annotations

from collections.abc import Collection, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import CandidateSet, EmbeddingSequence, EmbeddingStore, InputError

__all__ = [
    "ArgmaxTrace",
    "QueryTrace",
    "Ranking",
    "cosine_row",
    "masked_score",
    "max_sim",
    "rank_from_trace",
    "rerank",
    "score",
    "trace_candidates",
]


@dataclass(frozen=True)
class ArgmaxTrace:
    """Per-query-token record of one (query, document) scoring pass.

    c_max[i] is the winning similarity for query token i, j_star[i] the
    position of the first document token attaining it, and
    matched_token_text[i] that token's text.
    """

    c_max: np.ndarray = field(repr=False)
    j_star: np.ndarray = field(repr=False)
    matched_token_text: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.matched_token_text)


@dataclass(frozen=True)
class Ranking:
    """Documents ordered by descending score; ties broken by ascending
    doc_id so rankings are total orders."""

    query_id: str
    entries: tuple[tuple[str, float], ...]

    @property
    def doc_ids(self) -> tuple[str, ...]:
        return tuple(doc_id for doc_id, _ in self.entries)

    @property
    def scores(self) -> tuple[float, ...]:
        return tuple(s for _, s in self.entries)


def cosine_row(q_vec: np.ndarray, doc: EmbeddingSequence) -> np.ndarray:
    """Similarities of one unit query vector against every document token.

    Returns a float64 array of length doc.n_tokens; values lie in
    [-1 - 1e-6, 1 + 1e-6] given unit inputs.
    """
    q = np.asarray(q_vec, dtype=np.float64).reshape(-1)
    if q.shape[0] != doc.dim:
        raise ValueError(
            f"query vector has dimension {q.shape[0]}, document '{doc.id}' has {doc.dim}"
        )
    return doc.matrix.astype(np.float64) @ q


def max_sim(query: EmbeddingSequence, doc: EmbeddingSequence) -> ArgmaxTrace:
    """Score one document against every query token, keeping the argmax.

    Ties on the maximum go to the lowest document-token index.
    """
    if query.dim != doc.dim:
        raise ValueError(
            f"query '{query.id}' has dimension {query.dim}, "
            f"document '{doc.id}' has {doc.dim}"
        )
    sims = query.matrix.astype(np.float64) @ doc.matrix.astype(np.float64).T
    j_star = np.argmax(sims, axis=1)
    c_max = sims[np.arange(sims.shape[0]), j_star]
    texts = tuple(doc.tokens[int(j)].text for j in j_star)
    return ArgmaxTrace(c_max=c_max, j_star=j_star, matched_token_text=texts)


def score(query: EmbeddingSequence, doc: EmbeddingSequence) -> float:
    """Full relevance score: sum of c_max over all query tokens."""
    return float(np.sum(max_sim(query, doc).c_max))


def _check_positions(query: EmbeddingSequence, masked_positions: Collection[int]) -> np.ndarray:
    keep = np.ones(query.n_tokens, dtype=bool)
    for p in masked_positions:
        if not 0 <= p < query.n_tokens:
            raise ValueError(
                f"masked position {p} outside query '{query.id}' "
                f"with {query.n_tokens} tokens"
            )
        keep[p] = False
    return keep


def masked_score(
    query: EmbeddingSequence, doc: EmbeddingSequence, masked_positions: Collection[int]
) -> float:
    """Relevance score with the given query-token positions' summands
    dropped. Document-side argmaxes are not recomputed: masking the whole
    query gives 0.0, masking nothing gives `score`."""
    keep = _check_positions(query, masked_positions)
    return float(np.sum(max_sim(query, doc).c_max[keep]))


@dataclass(frozen=True)
class QueryTrace:
    """Scoring traces of one query against its full candidate set.

    c_max has shape (n_docs, n_query_tokens); row order follows doc_ids.
    matched_text[d][i] is the text of the document token matched by query
    token i in document d.
    """

    query: EmbeddingSequence
    doc_ids: tuple[str, ...]
    c_max: np.ndarray = field(repr=False)
    j_star: np.ndarray = field(repr=False)
    matched_text: tuple[tuple[str, ...], ...] = field(repr=False)

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)


def trace_candidates(
    query: EmbeddingSequence,
    candidates: CandidateSet,
    docs: EmbeddingStore,
    n_threads: int = 1,
) -> QueryTrace:
    """Run max_sim for every candidate document.

    Documents are scored independently, so the result is identical for any
    thread count. Raises InputError for a candidate doc_id missing from
    the store.
    """
    resolved = []
    for doc_id in candidates.doc_ids:
        if doc_id not in docs:
            raise InputError(
                f"candidate '{doc_id}' for query '{candidates.query_id}' "
                f"is not in the document store"
            )
        resolved.append(docs[doc_id])

    if n_threads > 1 and len(resolved) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            traces = list(pool.map(lambda d: max_sim(query, d), resolved))
    else:
        traces = [max_sim(query, d) for d in resolved]

    return QueryTrace(
        query=query,
        doc_ids=tuple(candidates.doc_ids),
        c_max=np.stack([t.c_max for t in traces]),
        j_star=np.stack([t.j_star for t in traces]),
        matched_text=tuple(t.matched_token_text for t in traces),
    )


def rank_from_trace(trace: QueryTrace, masked_positions: Collection[int] = ()) -> Ranking:
    """Order a trace's documents by (masked) score, descending, with ties
    broken by ascending doc_id."""
    keep = _check_positions(trace.query, masked_positions)
    scores = trace.c_max[:, keep].sum(axis=1)
    order = sorted(range(trace.n_docs), key=lambda d: (-scores[d], trace.doc_ids[d]))
    return Ranking(
        query_id=trace.query.id,
        entries=tuple((trace.doc_ids[d], float(scores[d])) for d in order),
    )


def rerank(
    query: EmbeddingSequence,
    candidates: CandidateSet,
    docs: EmbeddingStore,
    masked_positions: Collection[int] = (),
    n_threads: int = 1,
) -> Ranking:
    """Re-rank a candidate set by (optionally masked) late-interaction
    score. Output is bit-identical across runs and thread counts."""
    trace = trace_candidates(query, candidates, docs, n_threads=n_threads)
    return rank_from_trace(trace, masked_positions)
