from __future__ import annotations

import numpy as np
import pytest

from lilens import EmbeddingStore, Token, make_sequence


def build_sequence(seq_id, token_specs, matrix):
    """token_specs: list of (text, word_index) pairs."""
    tokens = [Token(text=t, word_index=w) for t, w in token_specs]
    return make_sequence(seq_id, tokens, np.asarray(matrix, dtype=np.float64))


def random_sequence(rng, seq_id, n_tokens, dim, vocab=None, max_word_len=3):
    """Random unit-seeded sequence with WordPiece-shaped word grouping."""
    specs = []
    word_index = -1
    remaining = 0
    for pos in range(n_tokens):
        if remaining == 0:
            word_index += 1
            remaining = int(rng.integers(1, max_word_len + 1))
            text = f"tok{pos}" if vocab is None else str(rng.choice(vocab))
        else:
            text = f"##piece{pos}" if vocab is None else "##" + str(rng.choice(vocab))
        specs.append((text, word_index))
        remaining -= 1
    return build_sequence(seq_id, specs, rng.standard_normal((n_tokens, dim)))


def random_store(rng, n_seqs, dim, max_tokens=12, prefix="s", vocab=None):
    return EmbeddingStore(
        random_sequence(
            rng, f"{prefix}{i:03d}", int(rng.integers(1, max_tokens + 1)), dim, vocab=vocab
        )
        for i in range(n_seqs)
    )


@pytest.fixture
def rng():
    return np.random.default_rng(42)


# The acceptance suite records one (criterion, passed, detail) triple per
# criterion; the summary hook prints them even when capture is on.
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_criterion(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((criterion, passed, detail))
    assert passed, f"{criterion}: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {criterion}  [{detail}]")
