"""Offline test rig: a handwritten WordPiece vocabulary and a tiny randomly
initialized encoder, so no network or model downloads are involved. The
exporter's public API accepts these injected objects directly."""

from __future__ import annotations

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizerFast

from lieb_export import ExportConfig

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "of", "a", "and", "for", "virus", "causes", "rash", "skin",
    "treatment", "pain", "##ful", "shin", "##gles", "zoster", "nerve",
    "blister", "##s", "infection", "old", "##er", "adult", "vaccine",
    "reduce", "##d", "risk", "doctor", "early", "antiviral", "drug",
    "help", "heal", ".",
]

# Ten sentences built entirely from the vocabulary above; punctuation is
# space-separated so surface words are exactly text.split().
SENTENCES = {
    "s00": "treatment of shingles .",
    "s01": "the virus causes a painful rash .",
    "s02": "shingles causes nerve pain and blisters .",
    "s03": "older adults reduced risk .",
    "s04": "the vaccine reduced shingles risk .",
    "s05": "a doctor helps .",
    "s06": "early antiviral drugs help .",
    "s07": "the rash heals .",
    "s08": "zoster virus infection of the skin .",
    "s09": "skin blisters heal .",
}

HIDDEN = 32


@pytest.fixture(scope="session")
def vocab_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("vocab") / "vocab.txt"
    path.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def tokenizer(vocab_file):
    return BertTokenizerFast(str(vocab_file), do_lower_case=True)


@pytest.fixture(scope="session")
def model():
    torch.manual_seed(7)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=HIDDEN,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    return BertModel(config).eval()


@pytest.fixture
def config():
    return ExportConfig(model="local-test", batch_size=4)
