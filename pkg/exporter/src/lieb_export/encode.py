"""Tokenization alignment and batched embedding extraction.

No query/document marker tokens are inserted and no query augmentation is
applied: the input text goes straight through the tokenizer, the encoder's
own begin/end specials are stripped from the output, and each surviving
subword keeps a word_index linking it to the surface word it came from.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping

import numpy as np
import torch

from .config import ExportConfig
from .formats import Record, count_frequencies, write_lieb, write_stats

logger = logging.getLogger(__name__)

Tokens = list[tuple[str, int]]


def _load_tokenizer(config: ExportConfig):
    from transformers import AutoTokenizer

    return AutoTokenizer.from_pretrained(config.model)


def _load_model(config: ExportConfig):
    from transformers import AutoModel

    return AutoModel.from_pretrained(config.model)


def _prepare(text: str, config: ExportConfig) -> str:
    return text.lower() if config.lowercase else text


def _align(encoding, index: int, tokenizer) -> Tokens:
    """Subword texts with dense word indices; special tokens dropped."""
    texts = tokenizer.convert_ids_to_tokens(encoding["input_ids"][index])
    tokens: Tokens = []
    dense: dict[int, int] = {}
    for text, word_id in zip(texts, encoding.word_ids(index)):
        if word_id is None:
            continue
        dense.setdefault(word_id, len(dense))
        tokens.append((text, dense[word_id]))
    return tokens


def tokenize_collection(
    texts: Mapping[str, str], config: ExportConfig, tokenizer=None
) -> list[tuple[str, Tokens]]:
    """Tokenize every text, skipping and warning as the contract requires.

    Texts that tokenize to zero content tokens are skipped with a warning;
    texts over max_length are truncated with a warning. Returns (id,
    tokens) pairs in input order for the survivors.
    """
    if not texts:
        raise ValueError("no texts to export")
    if tokenizer is None:
        tokenizer = _load_tokenizer(config)

    out: list[tuple[str, Tokens]] = []
    for text_id, text in texts.items():
        prepared = _prepare(text, config)
        encoding = tokenizer(
            [prepared], truncation=True, max_length=config.max_length
        )
        tokens = _align(encoding, 0, tokenizer)
        if not tokens:
            logger.warning("text '%s' tokenized to 0 tokens; skipped", text_id)
            continue
        full_length = len(tokenizer([prepared], truncation=False)["input_ids"][0])
        if full_length > len(encoding["input_ids"][0]):
            logger.warning(
                "text '%s' truncated from %d to %d encoder tokens",
                text_id, full_length, len(encoding["input_ids"][0]),
            )
        out.append((text_id, tokens))
    if not out:
        raise ValueError("every text tokenized to 0 tokens; nothing to export")
    return out


class Encoder:
    """Tokenizer + frozen encoder + optional linear projection.

    Pass `tokenizer` and `model` explicitly to use already-loaded objects
    (tests build tiny local ones); otherwise both come from config.model.
    """

    def __init__(self, config: ExportConfig, tokenizer=None, model=None):
        self.config = config
        self.tokenizer = tokenizer if tokenizer is not None else _load_tokenizer(config)
        self.model = model if model is not None else _load_model(config)
        self.model.eval().to(config.device)

        self.projection: np.ndarray | None = None
        encoder_dim = self.model.config.hidden_size
        if config.projection is not None:
            matrix = np.load(Path(config.projection))
            if matrix.ndim != 2 or matrix.shape[0] != encoder_dim:
                raise ValueError(
                    f"projection shape {matrix.shape} does not map encoder "
                    f"dimension {encoder_dim}"
                )
            self.projection = matrix.astype(np.float32)
        self.out_dim = int(
            self.projection.shape[1] if self.projection is not None else encoder_dim
        )

    def embed_batch(self, prepared_texts: list[str]) -> list[np.ndarray]:
        """Content-token embeddings for each text, specials excluded,
        projection applied. Rows are raw encoder outputs, not normalized."""
        encoding = self.tokenizer(
            prepared_texts,
            padding=True,
            truncation=True,
            max_length=self.config.max_length,
            return_tensors="pt",
        ).to(self.config.device)
        with torch.no_grad():
            hidden = self.model(**encoding).last_hidden_state.cpu().numpy()

        out = []
        for index in range(len(prepared_texts)):
            keep = [
                pos for pos, word_id in enumerate(encoding.word_ids(index))
                if word_id is not None
            ]
            rows = hidden[index, keep, :]
            if self.projection is not None:
                rows = rows @ self.projection
            out.append(rows.astype(np.float32))
        return out


def export_collection(
    texts: Mapping[str, str],
    config: ExportConfig,
    out_path: str | Path,
    tokenizer=None,
    model=None,
) -> Path:
    """Encode every text and write one LIEB file."""
    encoder = Encoder(config, tokenizer=tokenizer, model=model)
    aligned = tokenize_collection(texts, config, encoder.tokenizer)

    records: list[Record] = []
    for start in range(0, len(aligned), config.batch_size):
        batch = aligned[start : start + config.batch_size]
        prepared = [_prepare(texts[text_id], config) for text_id, _ in batch]
        for (text_id, tokens), rows in zip(batch, encoder.embed_batch(prepared)):
            if rows.shape[0] != len(tokens):
                raise RuntimeError(
                    f"text '{text_id}': {rows.shape[0]} embedding rows for "
                    f"{len(tokens)} tokens"
                )
            records.append((text_id, tokens, rows))
    return write_lieb(records, encoder.out_dim, out_path, lowercased=config.lowercase)


def export_corpus_stats(
    texts: Mapping[str, str],
    config: ExportConfig,
    out_path: str | Path,
    tokenizer=None,
) -> Path:
    """Document frequencies of the exact token stream export_collection
    would serialize; N counts the texts that export at least one token."""
    aligned = tokenize_collection(texts, config, tokenizer)
    n_docs, df_sub, df_word = count_frequencies(tokens for _, tokens in aligned)
    return write_stats(n_docs, df_sub, df_word, out_path)
