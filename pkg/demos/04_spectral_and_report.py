# %% [markdown]
# # Embedding geometry per term, and the one-shot report
#
# Stack every contextual embedding a term receives across the scored
# documents into a matrix and look at its singular values. The ratio
# lambda_1 / sum(lambda) says how one-directional the term's embeddings
# are: 1.0 means context never moves it, 1/min(m,d) means isotropic.
# Rare terms should concentrate; function words should smear.

# %%
import json
import tempfile
from pathlib import Path

from lilens import (
    SynthConfig,
    collect_occurrences,
    generate_fixture,
    idf,
    spectral_ratio,
    write_fixture,
)
from lilens.model import UnknownTermError
from lilens.pipeline import RunConfig, cmd_report

fixture = generate_fixture(SynthConfig(seed=13))

# %%
# Occurrence pools: deduplicated document-side rows for each subword that
# appears in some query, gathered over all candidate sets.
query_terms = {tok.text for q in fixture.queries.values() for tok in q.tokens}
pools = collect_occurrences(fixture.candidates, fixture.docs, terms=query_terms)

rows = []
for term, matrix in pools.items():
    try:
        term_idf = idf(fixture.stats, term)
    except UnknownTermError:
        term_idf = None
    rows.append(spectral_ratio(term, matrix, term_idf=term_idf))

rows.sort(key=lambda r: -r.ratio)
print(f"{'term':<10} {'idf':>6} {'m':>5} {'ratio':>7}   leading singular values")
for r in rows:
    idf_shown = "" if r.idf_subword is None else f"{r.idf_subword:.2f}"
    lead = ", ".join(f"{v:.2f}" for v in r.singular_values[:4])
    print(f"{r.term:<10} {idf_shown:>6} {r.n_occurrences:>5} {r.ratio:>7.3f}   {lead}")

# %% [markdown]
# ## Everything at once
# The `report` pipeline runs all diagnostics and correlates each one with
# IDF. The same artifacts come from the command line:
#
#     lilens synth  --out-dir corpus --n-docs 400
#     lilens report --queries corpus/queries.lieb --docs corpus/docs.lieb \
#                   --run corpus/candidates.run --stats corpus/stats.tsv \
#                   --out-dir report

# %%
with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    paths = write_fixture(fixture, tmp / "corpus")
    cmd_report(
        RunConfig(
            queries=paths["queries"],
            docs=paths["docs"],
            run=paths["run"],
            stats=paths["stats"],
            out_dir=tmp / "report",
        )
    )
    blob = json.loads((tmp / "report" / "report.json").read_text())
    written = sorted(p.name for p in (tmp / "report").iterdir())

print("report files:", ", ".join(written))
for key in ("pearson_idf_tauap", "pearson_idf_deltaes", "pearson_idf_spectral"):
    print(f"{key:<22} {blob[key]}")
