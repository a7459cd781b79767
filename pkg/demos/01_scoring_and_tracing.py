# %% [markdown]
# # Scoring and tracing
#
# Late-interaction scoring sums, over query tokens, the best cosine
# similarity against any document token. Because the sum decomposes per
# query token, every score comes with a free explanation: which document
# token won, and by how much. This demo builds a tiny corpus by hand and
# walks through that trace.

# %%
import numpy as np

from lilens import (
    CandidateSet,
    EmbeddingStore,
    Token,
    make_sequence,
    masked_score,
    max_sim,
    rerank,
    score,
)

rng = np.random.default_rng(5)

# Toy embeddings: each vocabulary word owns a fixed random direction, and
# a token's vector is its word direction plus a pinch of contextual noise.
# Identical words therefore score near 1.0 against each other; unrelated
# words land near 0.
DIRECTIONS = {}


def direction(word):
    if word not in DIRECTIONS:
        DIRECTIONS[word] = rng.standard_normal(32)
    return DIRECTIONS[word]


def sentence(seq_id, words):
    tokens = [Token(w, i) for i, w in enumerate(words)]
    rows = np.stack([direction(w) + 0.15 * rng.standard_normal(32) for w in words])
    return make_sequence(seq_id, tokens, rows)


query = sentence("q1", ["treatment", "of", "shingles"])
docs = EmbeddingStore(
    [
        sentence("d-exact", ["shingles", "treatment", "needs", "antivirals"]),
        sentence("d-topic", ["zoster", "rash", "therapy", "options"]),
        sentence("d-off", ["roof", "shingles", "installation", "guide"]),
    ]
)

# %% [markdown]
# ## Per-token trace
# For each query token: the winning document token, its index, and the
# similarity it contributes to the total.

# %%
for doc_id in docs:
    trace = max_sim(query, docs[doc_id])
    print(f"\n{doc_id}  (score {score(query, docs[doc_id]):.3f})")
    print(f"  {'query token':<12} {'matched':<14} {'j*':>3} {'c_max':>7}")
    for tok, text, j, c in zip(
        query.tokens, trace.matched_token_text, trace.j_star, trace.c_max
    ):
        marker = "exact" if text == tok.text else "soft"
        print(f"  {tok.text:<12} {text:<14} {int(j):>3} {c:>7.3f}  {marker}")

# %% [markdown]
# "of" matches whatever is least unlike it -- a soft match contributing
# noise. Masking drops a token's summand without rescoring anything.

# %%
candidates = CandidateSet("q1", tuple(docs))
full = rerank(query, candidates, docs)
no_of = rerank(query, candidates, docs, masked_positions={1})

print("full ranking:     ", [f"{d} {s:.3f}" for d, s in full.entries])
print("without 'of':     ", [f"{d} {s:.3f}" for d, s in no_of.entries])
d = docs["d-topic"]
print(
    f"masked_score check: {masked_score(query, d, {1}):.6f} "
    f"== full {score(query, d):.6f} minus the 'of' summand"
)
