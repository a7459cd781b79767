"""Round-trip tests: everything exported here is read back with the
analysis toolkit (`lilens`), which is the consumer the files exist for."""

import dataclasses
import logging

import numpy as np
import pytest
import torch
from transformers import BertTokenizerFast

from lilens import load_corpus_stats, load_embeddings, word_strings

from lieb_export import (
    ExportConfig,
    export_collection,
    export_corpus_stats,
    tokenize_collection,
)
from conftest import HIDDEN, SENTENCES


def fresh_rows(tokenizer, model, text, projection=None):
    """Independent single-sentence forward pass: the oracle for what the
    exporter should have serialized for `text` (pre-normalization)."""
    encoding = tokenizer([text.lower()], return_tensors="pt")
    with torch.no_grad():
        hidden = model(**encoding).last_hidden_state[0].numpy()
    keep = [i for i, w in enumerate(encoding.word_ids(0)) if w is not None]
    rows = hidden[keep, :]
    if projection is not None:
        rows = rows @ projection
    return rows


@pytest.fixture(scope="session")
def exported(tokenizer, model, tmp_path_factory):
    out = tmp_path_factory.mktemp("export")
    config = ExportConfig(model="local-test", batch_size=4)
    lieb = export_collection(SENTENCES, config, out / "docs.lieb",
                             tokenizer=tokenizer, model=model)
    stats = export_corpus_stats(SENTENCES, config, out / "stats.tsv",
                                tokenizer=tokenizer)
    return lieb, stats


class TestRoundTrip:
    def test_every_sequence_survives(self, exported):
        store = load_embeddings(exported[0])
        assert list(store) == list(SENTENCES)
        assert store.dim == HIDDEN

    def test_token_self_cosine_is_one(self, exported, tokenizer, model):
        store = load_embeddings(exported[0])
        worst = 1.0
        for text_id, text in SENTENCES.items():
            loaded = store[text_id].matrix.astype(np.float64)
            fresh = fresh_rows(tokenizer, model, text).astype(np.float64)
            fresh /= np.linalg.norm(fresh, axis=1, keepdims=True)
            worst = min(worst, float(np.min(np.sum(loaded * fresh, axis=1))))
        assert worst >= 1.0 - 1e-5

    def test_word_index_grouping_reconstructs_surface_words(self, exported):
        store = load_embeddings(exported[0])
        for text_id, text in SENTENCES.items():
            assert word_strings(store[text_id].tokens) == text.split(), text_id

    def test_multi_subword_word_shares_one_index(self, exported):
        store = load_embeddings(exported[0])
        tokens = store["s00"].tokens  # "treatment of shingles ."
        texts = [t.text for t in tokens]
        assert texts == ["treatment", "of", "shin", "##gles", "."]
        assert tokens[2].word_index == tokens[3].word_index

    def test_stats_match_brute_force_recount(self, exported, tokenizer):
        stats = load_corpus_stats(exported[1])
        df_word, df_sub = {}, {}
        for text in SENTENCES.values():
            for word in set(text.split()):
                df_word[word] = df_word.get(word, 0) + 1
            for sub in set(tokenizer.tokenize(text)):
                df_sub[sub] = df_sub.get(sub, 0) + 1
        assert stats.n_docs == len(SENTENCES)
        assert dict(stats.df_word) == df_word
        assert dict(stats.df_subword) == df_sub

    def test_lowercase_flag_recorded(self, exported):
        assert load_embeddings(exported[0]).flags & 1 == 1

    def test_export_is_deterministic(self, exported, tokenizer, model, tmp_path):
        config = ExportConfig(model="local-test", batch_size=4)
        again = export_collection(SENTENCES, config, tmp_path / "again.lieb",
                                  tokenizer=tokenizer, model=model)
        assert again.read_bytes() == exported[0].read_bytes()


class TestProjection:
    def test_projected_export_round_trips(self, tokenizer, model, tmp_path):
        rng = np.random.default_rng(3)
        projection = rng.standard_normal((HIDDEN, 8)).astype(np.float32)
        np.save(tmp_path / "proj.npy", projection)
        config = ExportConfig(model="local-test", projection=tmp_path / "proj.npy")

        path = export_collection(SENTENCES, config, tmp_path / "p.lieb",
                                 tokenizer=tokenizer, model=model)
        store = load_embeddings(path)
        assert store.dim == 8
        fresh = fresh_rows(tokenizer, model, SENTENCES["s03"], projection)
        fresh = fresh / np.linalg.norm(fresh, axis=1, keepdims=True)
        np.testing.assert_allclose(
            store["s03"].matrix.astype(np.float64), fresh, atol=1e-5
        )

    def test_wrong_shape_rejected(self, tokenizer, model, tmp_path):
        np.save(tmp_path / "bad.npy", np.zeros((HIDDEN + 1, 8), dtype=np.float32))
        config = ExportConfig(model="local-test", projection=tmp_path / "bad.npy")
        with pytest.raises(ValueError, match="projection shape"):
            export_collection(SENTENCES, config, tmp_path / "x.lieb",
                              tokenizer=tokenizer, model=model)


class TestContractEdges:
    def test_empty_text_skipped_with_warning(self, tokenizer, model, tmp_path, caplog):
        texts = {"real": "shingles rash .", "hollow": ""}
        config = ExportConfig(model="local-test")
        with caplog.at_level(logging.WARNING):
            path = export_collection(texts, config, tmp_path / "x.lieb",
                                     tokenizer=tokenizer, model=model)
        assert "hollow" in caplog.text and "skipped" in caplog.text
        assert list(load_embeddings(path)) == ["real"]

    def test_skipped_text_leaves_stats_n(self, tokenizer, tmp_path):
        texts = {"real": "shingles rash .", "hollow": ""}
        config = ExportConfig(model="local-test")
        path = export_corpus_stats(texts, config, tmp_path / "s.tsv",
                                   tokenizer=tokenizer)
        assert load_corpus_stats(path).n_docs == 1

    def test_long_text_truncated_with_warning(self, tokenizer, model, tmp_path, caplog):
        texts = {"long": " ".join(["rash"] * 50)}
        config = ExportConfig(model="local-test", max_length=10)
        with caplog.at_level(logging.WARNING):
            path = export_collection(texts, config, tmp_path / "t.lieb",
                                     tokenizer=tokenizer, model=model)
        assert "truncated" in caplog.text
        # 10 encoder positions minus the begin/end markers.
        assert load_embeddings(path)["long"].n_tokens == 8

    def test_all_texts_empty_is_an_error(self, tokenizer, config):
        with pytest.raises(ValueError, match="nothing to export"):
            tokenize_collection({"a": "", "b": " "}, config, tokenizer)

    def test_no_texts_is_an_error(self, tokenizer, config):
        with pytest.raises(ValueError, match="no texts"):
            tokenize_collection({}, config, tokenizer)

    def test_config_validation(self):
        with pytest.raises(ValueError, match="max_length"):
            ExportConfig(model="m", max_length=513)
        with pytest.raises(ValueError, match="max_length"):
            ExportConfig(model="m", max_length=0)
        with pytest.raises(ValueError, match="batch_size"):
            ExportConfig(model="m", batch_size=0)

    def test_casing_choice_changes_flag_and_tokens(self, vocab_file, model, tmp_path):
        # A tokenizer that preserves case makes the config choice visible:
        # the all-lowercase toy vocab sends capitalized words to [UNK]
        # unless the exporter lowercases first. The flags bit records it.
        cased_tokenizer = BertTokenizerFast(str(vocab_file), do_lower_case=False)
        texts = {"t": "Shingles rash ."}

        kept = export_collection(
            texts, dataclasses.replace(ExportConfig(model="local-test"), lowercase=False),
            tmp_path / "cased.lieb", tokenizer=cased_tokenizer, model=model,
        )
        store = load_embeddings(kept)
        assert store.flags & 1 == 0
        assert store["t"].tokens[0].text == "[UNK]"

        lowered = export_collection(
            texts, ExportConfig(model="local-test"),
            tmp_path / "lowered.lieb", tokenizer=cased_tokenizer, model=model,
        )
        store = load_embeddings(lowered)
        assert store.flags & 1 == 1
        assert store["t"].tokens[0].text == "shin"
