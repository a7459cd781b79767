"""Synthetic corpus generator with IDF-linked embedding geometry.

Every vocabulary word gets a base direction and a document-frequency
target. Rare words embed almost exactly on their base direction in every
context; frequent words lean mostly on a per-passage context vector drawn
around a shared global direction. That coupling is what the diagnostics
should recover downstream: masking a rare word reorders rankings (low
tau_ap), rare words match exactly with a wide score gap (high delta), and
their occurrence matrices concentrate spectrally (ratio near 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .io import write_corpus_stats, write_embeddings, write_run
from .model import (
    CandidateSet,
    CorpusStats,
    EmbeddingStore,
    Token,
    compute_corpus_stats,
    make_sequence,
)
from .scoring import Ranking

__all__ = ["SynthConfig", "SynthFixture", "generate", "write_fixture"]


@dataclass(frozen=True)
class SynthConfig:
    n_docs: int = 400
    n_queries: int = 16
    vocab_size: int = 48
    dim: int = 16
    words_per_query: int = 4
    candidates_per_query: int = 120
    # Candidates guaranteed to contain each query word (when the corpus has them).
    forced_per_word: int = 6
    # Every k-th vocabulary word splits into two subwords.
    multi_subword_every: int = 6
    # Document-frequency targets, geometric from df_hi down to df_lo.
    df_hi: float = 0.85
    df_lo: float = 0.03
    # Base-direction weight range: frequent words get alpha_lo, rare alpha_hi.
    alpha_lo: float = 0.25
    alpha_hi: float = 0.97
    context_spread: float = 0.4
    noise: float = 0.03
    seed: int = 7

    def __post_init__(self) -> None:
        if self.candidates_per_query > self.n_docs:
            raise ValueError("candidates_per_query cannot exceed n_docs")
        if self.words_per_query > self.vocab_size:
            raise ValueError("words_per_query cannot exceed vocab_size")
        if self.n_docs < 2 or self.n_queries < 1 or self.dim < 2:
            raise ValueError("fixture needs n_docs >= 2, n_queries >= 1, dim >= 2")


@dataclass(frozen=True)
class SynthFixture:
    queries: EmbeddingStore
    docs: EmbeddingStore
    candidates: list[CandidateSet]
    stats: CorpusStats


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def generate(config: SynthConfig = SynthConfig()) -> SynthFixture:
    """Build the full fixture: query store, document store, first-stage
    candidate sets, and corpus statistics. Deterministic in config.seed."""
    rng = np.random.default_rng(config.seed)
    v = config.vocab_size

    # Vocabulary: word k -> subword texts. p[k] is its inclusion
    # probability per document, descending, so IDF rises with k.
    subwords: list[tuple[str, ...]] = []
    for k in range(v):
        if config.multi_subword_every and k % config.multi_subword_every == 1:
            subwords.append((f"w{k:02d}a", f"##w{k:02d}b"))
        else:
            subwords.append((f"w{k:02d}",))
    p = np.geomspace(config.df_hi, config.df_lo, v)
    alpha = np.linspace(config.alpha_lo, config.alpha_hi, v)

    directions = {
        text: _unit(rng.standard_normal(config.dim))
        for pieces in subwords
        for text in pieces
    }
    global_ctx = _unit(rng.standard_normal(config.dim))

    def embed(text: str, word_k: int, ctx: np.ndarray) -> np.ndarray:
        a = alpha[word_k]
        raw = (
            a * directions[text]
            + (1.0 - a) * ctx
            + config.noise * rng.standard_normal(config.dim)
        )
        return _unit(raw)

    # Documents.
    doc_sequences = []
    doc_words: list[set[int]] = []
    for j in range(config.n_docs):
        included = np.flatnonzero(rng.random(v) < p)
        if included.size == 0:
            included = np.array([0])
        ctx = _unit(global_ctx + config.context_spread * rng.standard_normal(config.dim))
        tokens = []
        rows = []
        for w_idx, k in enumerate(included):
            for text in subwords[k]:
                tokens.append(Token(text=text, word_index=w_idx))
                rows.append(embed(text, int(k), ctx))
        doc_sequences.append(make_sequence(f"d{j:04d}", tokens, np.stack(rows)))
        doc_words.append(set(int(k) for k in included))
    docs = EmbeddingStore(doc_sequences)

    # Queries: one word from the frequent third, one from the rare third,
    # the rest from anywhere, all distinct.
    lo_tier = np.arange(0, v // 3)
    hi_tier = np.arange(2 * v // 3, v)
    query_sequences = []
    query_words: list[list[int]] = []
    for qi in range(config.n_queries):
        chosen = [int(rng.choice(lo_tier)), int(rng.choice(hi_tier))]
        while len(chosen) < config.words_per_query:
            k = int(rng.integers(0, v))
            if k not in chosen:
                chosen.append(k)
        ctx = _unit(global_ctx + config.context_spread * rng.standard_normal(config.dim))
        tokens = []
        rows = []
        for w_idx, k in enumerate(chosen):
            for text in subwords[k]:
                tokens.append(Token(text=text, word_index=w_idx))
                rows.append(embed(text, k, ctx))
        query_sequences.append(make_sequence(f"q{qi:02d}", tokens, np.stack(rows)))
        query_words.append(chosen)
    queries = EmbeddingStore(query_sequences)

    # First-stage candidates: force a few containing documents per query
    # word so the exact side of the downstream split is never starved,
    # fill the rest uniformly, then order by a noisy overlap score.
    candidates = []
    for qi, chosen in enumerate(query_words):
        picked: list[int] = []
        picked_set: set[int] = set()
        for k in chosen:
            containing = [j for j in range(config.n_docs) if k in doc_words[j]]
            if containing:
                take = rng.choice(
                    len(containing),
                    size=min(config.forced_per_word, len(containing)),
                    replace=False,
                )
                for t in take:
                    j = containing[int(t)]
                    if j not in picked_set:
                        picked.append(j)
                        picked_set.add(j)
        remaining = [j for j in range(config.n_docs) if j not in picked_set]
        fill = config.candidates_per_query - len(picked)
        if fill > 0:
            take = rng.choice(len(remaining), size=fill, replace=False)
            picked.extend(remaining[int(t)] for t in take)

        overlap = np.array([len(set(chosen) & doc_words[j]) for j in picked], dtype=float)
        first_stage = overlap + 0.01 * rng.standard_normal(len(picked))
        order = sorted(range(len(picked)), key=lambda i: (-first_stage[i], picked[i]))
        candidates.append(
            CandidateSet(
                query_id=f"q{qi:02d}",
                doc_ids=tuple(f"d{picked[i]:04d}" for i in order),
                first_stage_scores=tuple(float(first_stage[i]) for i in order),
            )
        )

    stats = compute_corpus_stats([seq.tokens for seq in doc_sequences])
    return SynthFixture(queries=queries, docs=docs, candidates=candidates, stats=stats)


def write_fixture(fixture: SynthFixture, out_dir: str | Path) -> dict[str, Path]:
    """Write the four pipeline inputs into out_dir and return their paths:
    queries.lieb, docs.lieb, candidates.run, stats.tsv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "queries": out / "queries.lieb",
        "docs": out / "docs.lieb",
        "run": out / "candidates.run",
        "stats": out / "stats.tsv",
    }
    write_embeddings(fixture.queries, paths["queries"])
    write_embeddings(fixture.docs, paths["docs"])
    rankings = [
        Ranking(
            query_id=cs.query_id,
            entries=tuple(zip(cs.doc_ids, cs.first_stage_scores)),
        )
        for cs in fixture.candidates
    ]
    write_run(rankings, paths["run"], tag="synth")
    write_corpus_stats(fixture.stats, paths["stats"])
    return paths
