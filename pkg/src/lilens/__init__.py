"""lilens: a white-box analysis toolkit for late-interaction retrieval.

Late-interaction scorers sum, per query token, the best cosine match
against a document's token embeddings. This package re-implements that
scoring with full argmax traces and builds diagnostics on top of it:
masked-term importance (AP rank correlation against the unmasked
ranking), exact-vs-soft match score gaps, match-frequency statistics,
and spectral concentration of a term's contextual embeddings.
"""

from .analysis import (
    DeltaESRow,
    MatchStatsRow,
    SpectralRow,
    TermImportanceRow,
    aggregate_importance,
    collect_occurrences,
    collect_subword_pairs,
    delta_es_subword,
    delta_es_word,
    match_stats,
    match_stats_from_trace,
    spectral_ratio,
    term_importance,
    term_importance_from_trace,
)
from .correlation import kendall_tau, pearson, tau_ap
from .eigen import gram_singular_values, jacobi_eigenvalues
from .io import (
    load_corpus_stats,
    load_embeddings,
    load_run,
    write_corpus_stats,
    write_embeddings,
    write_run,
)
from .model import (
    CandidateSet,
    CorpusStats,
    EmbeddingSequence,
    EmbeddingStore,
    InputError,
    Token,
    UnknownTermError,
    compute_corpus_stats,
    idf,
    make_sequence,
    word_strings,
)
from .scoring import (
    ArgmaxTrace,
    QueryTrace,
    Ranking,
    cosine_row,
    masked_score,
    max_sim,
    rank_from_trace,
    rerank,
    score,
    trace_candidates,
)
from .synth import SynthConfig, SynthFixture, generate as generate_fixture, write_fixture

__version__ = "0.1.0"
