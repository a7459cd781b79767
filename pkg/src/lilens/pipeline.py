"""End-to-end orchestration: load inputs, run the diagnostics, and write
the CSV/JSON reports consumed by plotting or inspection downstream.

Every command validates all of its inputs before any computation starts,
and computes everything before any output file is opened, so a failing
run never leaves partial outputs. Output bytes are deterministic: rows
are sorted, floats are written in shortest round-trip form, and worker
threads only ever parallelize per-query work that is reduced in input
order.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .analysis import (
    DEFAULT_SPECTRAL_CAP,
    DeltaESRow,
    MatchStatsRow,
    SpectralRow,
    TermImportanceRow,
    aggregate_importance,
    collect_occurrences,
    collect_subword_pairs,
    delta_es_subword,
    delta_es_word,
    match_stats_from_trace,
    spectral_ratio,
    term_importance_from_trace,
)
from .correlation import pearson
from .io import load_corpus_stats, load_embeddings, load_run, write_run
from .model import CandidateSet, CorpusStats, EmbeddingStore, InputError, UnknownTermError, idf
from .scoring import QueryTrace, rank_from_trace, trace_candidates

__all__ = [
    "Inputs",
    "RunConfig",
    "cmd_delta_es",
    "cmd_importance",
    "cmd_match_stats",
    "cmd_report",
    "cmd_rerank",
    "cmd_spectral",
    "load_inputs",
]

log = logging.getLogger(__name__)

IMPORTANCE_HEADER = ["word", "query_id", "tau_ap", "mean_tau_ap", "idf_word", "n_queries"]
DELTA_HEADER = ["term", "granularity", "delta_es", "partial", "n_pairs_used", "n_pairs_skipped", "idf"]
SPECTRAL_HEADER = ["term", "m", "ratio", "idf_subword"]
MATCHES_HEADER = ["query_id", "position", "token", "exact_match_freq", "other_query_term_freq", "top_matches"]


@dataclass(frozen=True)
class RunConfig:
    queries: Path | str | None = None
    docs: Path | str | None = None
    run: Path | str | None = None
    stats: Path | str | None = None
    out_dir: Path | str = "."
    threads: int = 1
    seed: int = 0
    tau_ap_mode: str = "asym"
    spectral_cap: int = DEFAULT_SPECTRAL_CAP

    def __post_init__(self) -> None:
        if self.threads < 1:
            raise InputError(f"--threads must be at least 1, got {self.threads}")
        if self.tau_ap_mode not in ("asym", "sym"):
            raise InputError(f"--tau-ap-mode must be 'asym' or 'sym', got '{self.tau_ap_mode}'")
        if self.spectral_cap < 1:
            raise InputError(f"--spectral-cap must be at least 1, got {self.spectral_cap}")


@dataclass(frozen=True)
class Inputs:
    queries: EmbeddingStore
    docs: EmbeddingStore
    candidates: list[CandidateSet]
    stats: CorpusStats | None


def load_inputs(cfg: RunConfig, need_stats: bool = False) -> Inputs:
    """Parse and cross-validate every input file up front.

    Checks that the two stores share one embedding dimension and that all
    run-file query and document ids resolve in their stores."""
    for name, value in (("--queries", cfg.queries), ("--docs", cfg.docs), ("--run", cfg.run)):
        if value is None:
            raise InputError(f"{name} is required")
    if need_stats and cfg.stats is None:
        raise InputError("--stats is required")

    queries = load_embeddings(cfg.queries)
    docs = load_embeddings(cfg.docs)
    if queries.dim != docs.dim:
        raise InputError(
            f"{cfg.queries}: query dimension {queries.dim} does not match "
            f"document dimension {docs.dim} in {cfg.docs}"
        )
    candidates = load_run(cfg.run)
    for cs in candidates:
        if cs.query_id not in queries:
            raise InputError(
                f"{cfg.run}: query '{cs.query_id}' is not in the query store"
            )
        for doc_id in cs.doc_ids:
            if doc_id not in docs:
                raise InputError(
                    f"{cfg.run}: candidate '{doc_id}' for query '{cs.query_id}' "
                    f"is not in the document store"
                )
    stats = load_corpus_stats(cfg.stats) if cfg.stats is not None else None
    return Inputs(queries=queries, docs=docs, candidates=candidates, stats=stats)


def _traces(inputs: Inputs, cfg: RunConfig) -> list[QueryTrace]:
    """One trace per candidate set, in run-file order. Queries are scored
    independently, so results do not depend on the thread count."""
    def one(cs: CandidateSet) -> QueryTrace:
        return trace_candidates(inputs.queries[cs.query_id], cs, inputs.docs)

    if cfg.threads > 1 and len(inputs.candidates) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(one, inputs.candidates))
    return [one(cs) for cs in inputs.candidates]


def _fmt(value) -> str:
    """Shortest round-trip cell text; None becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Per-command computation


def _importance_rows(
    traces: Sequence[QueryTrace], cfg: RunConfig, stats: CorpusStats | None
) -> tuple[list[tuple[str, str, float]], list[TermImportanceRow]]:
    symmetric = cfg.tau_ap_mode == "sym"
    triples = []
    for trace in traces:
        if trace.n_docs < 2:
            log.warning(
                "query '%s' has %d candidate(s); skipped for term importance",
                trace.query.id,
                trace.n_docs,
            )
            continue
        words = trace.query.words()
        for word_index, word in enumerate(words):
            _, value = term_importance_from_trace(trace, word_index, symmetric=symmetric)
            triples.append((word, trace.query.id, value))
    if not triples:
        raise InputError("no rankable queries: every candidate set has fewer than 2 documents")
    return triples, aggregate_importance(triples, stats)


def _word_decompositions(traces: Sequence[QueryTrace]) -> dict[str, tuple[str, ...]]:
    """Map each query surface word to its subword sequence, taken from the
    word's first occurrence in (query_id, word_index) order."""
    decomp: dict[str, tuple[str, ...]] = {}
    for trace in sorted(traces, key=lambda t: t.query.id):
        spans = trace.query.word_positions()
        words = trace.query.words()
        for word_index in sorted(spans):
            word = words[word_index]
            if word not in decomp:
                decomp[word] = tuple(trace.query.tokens[p].text for p in spans[word_index])
    return decomp


def _safe_idf(stats: CorpusStats | None, term: str, granularity: str) -> float | None:
    if stats is None:
        return None
    try:
        return idf(stats, term, granularity)
    except UnknownTermError:
        return None


def _delta_rows(
    traces: Sequence[QueryTrace], stats: CorpusStats | None
) -> tuple[list[DeltaESRow], list[DeltaESRow]]:
    pairs = collect_subword_pairs(traces)
    sub_rows = {
        term: delta_es_subword(term, pairs[term], _safe_idf(stats, term, "subword"))
        for term in sorted(pairs)
    }
    word_rows = []
    for word, pieces in sorted(_word_decompositions(traces).items()):
        word_rows.append(
            delta_es_word(word, [sub_rows[t] for t in pieces], _safe_idf(stats, word, "word"))
        )
    return list(sub_rows.values()), word_rows


def _spectral_rows(
    inputs: Inputs, traces: Sequence[QueryTrace], cfg: RunConfig, stats: CorpusStats | None
) -> list[SpectralRow]:
    terms = {tok.text for trace in traces for tok in trace.query.tokens}
    occurrences = collect_occurrences(inputs.candidates, inputs.docs, terms)
    rows = []
    for term in sorted(terms):
        if term not in occurrences:
            log.warning("query term '%s' never occurs in a scored document; skipped", term)
            continue
        rows.append(
            spectral_ratio(
                term,
                occurrences[term],
                cap=cfg.spectral_cap,
                seed=cfg.seed,
                term_idf=_safe_idf(stats, term, "subword"),
            )
        )
    return rows


def _match_rows(traces: Sequence[QueryTrace]) -> list[MatchStatsRow]:
    rows = []
    for trace in traces:
        rows.extend(match_stats_from_trace(trace))
    rows.sort(key=lambda r: (r.query_id, r.position))
    return rows


# ---------------------------------------------------------------------------
# Commands


def cmd_rerank(cfg: RunConfig) -> Path:
    """Re-rank every candidate set and write a TREC run file."""
    inputs = load_inputs(cfg)
    rankings = [rank_from_trace(trace) for trace in _traces(inputs, cfg)]
    out = _out_dir(cfg) / "rerank.run"
    write_run(rankings, out)
    return out


def cmd_importance(cfg: RunConfig) -> Path:
    """Write importance.csv: per-(word, query) tau_ap with per-word
    aggregates, and log the IDF correlation summary."""
    inputs = load_inputs(cfg, need_stats=True)
    triples, agg = _importance_rows(_traces(inputs, cfg), cfg, inputs.stats)
    by_word = {row.word: row for row in agg}
    csv_rows = []
    for word, query_id, value in sorted(triples):
        row = by_word[word]
        csv_rows.append([word, query_id, value, row.mean_tau_ap, row.idf_word, row.n_queries])
    out = _out_dir(cfg) / "importance.csv"
    _write_csv(out, IMPORTANCE_HEADER, csv_rows)
    points = [(r.idf_word, r.mean_tau_ap) for r in agg if r.idf_word is not None]
    if len(points) >= 2:
        try:
            r = pearson([p[0] for p in points], [p[1] for p in points])
            log.info("pearson(idf_word, mean_tau_ap) = %.4f over %d words", r, len(points))
        except ValueError as exc:
            log.info("correlation summary unavailable: %s", exc)
    else:
        log.info("correlation summary unavailable: %d word(s) with known IDF", len(points))
    return out


def cmd_delta_es(cfg: RunConfig) -> Path:
    """Write delta_es.csv: subword rows then word rows. Undefined gaps
    stay empty cells, never 0."""
    inputs = load_inputs(cfg, need_stats=True)
    sub_rows, word_rows = _delta_rows(_traces(inputs, cfg), inputs.stats)
    csv_rows = [
        [r.term, r.granularity, r.delta_es, r.partial, r.n_pairs_used, r.n_pairs_skipped, r.idf]
        for r in (*sub_rows, *word_rows)
    ]
    out = _out_dir(cfg) / "delta_es.csv"
    _write_csv(out, DELTA_HEADER, csv_rows)
    return out


def cmd_spectral(cfg: RunConfig) -> Path:
    """Write spectral.csv plus a spectral_values.json sidecar holding the
    raw singular-value lists."""
    inputs = load_inputs(cfg, need_stats=True)
    rows = _spectral_rows(inputs, _traces(inputs, cfg), cfg, inputs.stats)
    out_dir = _out_dir(cfg)
    out = out_dir / "spectral.csv"
    _write_csv(
        out,
        SPECTRAL_HEADER,
        [[r.term, r.n_occurrences, r.ratio, r.idf_subword] for r in rows],
    )
    values = {r.term: list(r.singular_values) for r in rows}
    with open(out_dir / "spectral_values.json", "w", encoding="utf-8") as fh:
        json.dump(values, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return out


def cmd_match_stats(cfg: RunConfig) -> Path:
    """Write matches.csv with per-position match frequencies and the
    top matched texts (a JSON list per cell)."""
    inputs = load_inputs(cfg)
    rows = _match_rows(_traces(inputs, cfg))
    csv_rows = [
        [
            r.query_id,
            r.position,
            r.token,
            r.exact_match_freq,
            r.other_query_term_freq,
            json.dumps([[t, f] for t, f in r.top_matched_tokens]),
        ]
        for r in rows
    ]
    out = _out_dir(cfg) / "matches.csv"
    _write_csv(out, MATCHES_HEADER, csv_rows)
    return out


def _correlation_entry(points: list[tuple[float, float]]) -> dict:
    if len(points) < 2:
        return {"reason": "insufficient points", "n_points": len(points)}
    try:
        r = pearson([p[0] for p in points], [p[1] for p in points])
    except ValueError:
        return {"reason": "zero variance", "n_points": len(points)}
    return {"r": round(r, 4), "n_points": len(points)}


def cmd_report(cfg: RunConfig) -> Path:
    """Run every diagnostic, write all component CSVs, and summarize the
    three IDF correlations in report.json."""
    inputs = load_inputs(cfg, need_stats=True)
    traces = _traces(inputs, cfg)

    triples, agg = _importance_rows(traces, cfg, inputs.stats)
    sub_rows, word_rows = _delta_rows(traces, inputs.stats)
    spec_rows = _spectral_rows(inputs, traces, cfg, inputs.stats)
    match_rows = _match_rows(traces)

    out_dir = _out_dir(cfg)
    by_word = {row.word: row for row in agg}
    _write_csv(
        out_dir / "importance.csv",
        IMPORTANCE_HEADER,
        [
            [w, q, v, by_word[w].mean_tau_ap, by_word[w].idf_word, by_word[w].n_queries]
            for w, q, v in sorted(triples)
        ],
    )
    _write_csv(
        out_dir / "delta_es.csv",
        DELTA_HEADER,
        [
            [r.term, r.granularity, r.delta_es, r.partial, r.n_pairs_used, r.n_pairs_skipped, r.idf]
            for r in (*sub_rows, *word_rows)
        ],
    )
    _write_csv(
        out_dir / "spectral.csv",
        SPECTRAL_HEADER,
        [[r.term, r.n_occurrences, r.ratio, r.idf_subword] for r in spec_rows],
    )
    with open(out_dir / "spectral_values.json", "w", encoding="utf-8") as fh:
        json.dump({r.term: list(r.singular_values) for r in spec_rows}, fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_csv(
        out_dir / "matches.csv",
        MATCHES_HEADER,
        [
            [
                r.query_id,
                r.position,
                r.token,
                r.exact_match_freq,
                r.other_query_term_freq,
                json.dumps([[t, f] for t, f in r.top_matched_tokens]),
            ]
            for r in match_rows
        ],
    )

    tau_points = [(r.idf_word, r.mean_tau_ap) for r in agg if r.idf_word is not None]
    delta_points = [
        (r.idf, r.delta_es) for r in word_rows if r.idf is not None and r.delta_es is not None
    ]
    spec_points = [(r.idf_subword, r.ratio) for r in spec_rows if r.idf_subword is not None]

    report = {
        "toolkit_version": __version__,
        # Only knobs that change the computed numbers. Paths and thread
        # count stay out so identical inputs give identical bytes.
        "config": {
            "seed": cfg.seed,
            "tau_ap_mode": cfg.tau_ap_mode,
            "spectral_cap": cfg.spectral_cap,
        },
        "pearson_idf_tauap": _correlation_entry(tau_points),
        "pearson_idf_deltaes": _correlation_entry(delta_points),
        "pearson_idf_spectral": _correlation_entry(spec_points),
    }
    out = out_dir / "report.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return out
