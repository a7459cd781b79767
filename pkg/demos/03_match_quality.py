# %% [markdown]
# # Exact matches, soft matches, and what tokens actually hit
#
# Two diagnostics on the same traces:
#
# * **delta_ES** -- for each term, the winning similarity when the term
#   exact-matches (same subword on both sides) minus when it soft-matches
#   (different subword). Large positive values mean the model rewards the
#   literal term being present.
# * **match stats** -- per query position, how often its argmax landed on
#   its own text, on another query term's text, or elsewhere.

# %%
from lilens import (
    SynthConfig,
    collect_subword_pairs,
    delta_es_subword,
    generate_fixture,
    idf,
    match_stats_from_trace,
    trace_candidates,
)
from lilens.model import UnknownTermError

fixture = generate_fixture(SynthConfig(seed=13))
queries, docs, stats = fixture.queries, fixture.docs, fixture.stats

traces = [
    trace_candidates(queries[cand.query_id], cand, docs)
    for cand in fixture.candidates
]

# %% [markdown]
# ## delta_ES per subword
# Pairs with only exact (or only soft) matches are skipped and counted;
# a term with no usable pair at all reports an undefined value.

# %%
pairs = collect_subword_pairs(traces)
rows = []
for term, term_pairs in pairs.items():
    try:
        term_idf = idf(stats, term)
    except UnknownTermError:
        term_idf = None
    rows.append(delta_es_subword(term, term_pairs, term_idf))

rows.sort(key=lambda r: (r.delta_es is None, -(r.delta_es or 0.0)))
print(f"{'term':<10} {'idf':>6} {'delta_ES':>9} {'used':>5} {'skipped':>8}")
for r in rows:
    shown = "undef" if r.delta_es is None else f"{r.delta_es:.3f}"
    idf_shown = "" if r.idf is None else f"{r.idf:.2f}"
    print(f"{r.term:<10} {idf_shown:>6} {shown:>9} {r.n_pairs_used:>5} {r.n_pairs_skipped:>8}")

# %% [markdown]
# High-IDF terms sit at the top: when a rare term is literally present the
# model scores it far above its soft fallbacks. For frequent terms the gap
# shrinks -- an exact hit on a near-stopword is worth little.

# %% [markdown]
# ## Match stats for one query
# Frequencies are fractions of the query's candidate set.

# %%
trace = traces[0]
print(f"query {trace.query.id}, {trace.n_docs} candidates")
print(f"{'pos':>3} {'token':<10} {'exact':>6} {'other-term':>10}  top matches")
for row in match_stats_from_trace(trace):
    top = ", ".join(f"{t}:{f:.2f}" for t, f in row.top_matched_tokens[:3])
    print(
        f"{row.position:>3} {row.token:<10} {row.exact_match_freq:>6.2f} "
        f"{row.other_query_term_freq:>10.2f}  {top}"
    )
