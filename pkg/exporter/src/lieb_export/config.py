"""Export settings."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

MAX_SEQUENCE_TOKENS = 512


@dataclass(frozen=True)
class ExportConfig:
    """Everything that determines what gets exported.

    `model` is a transformers identifier or local path; `projection` is an
    optional .npy file holding an (encoder_dim x output_dim) matrix applied
    to every token embedding before serialization. `lowercase` is applied
    to the input text and recorded in the LIEB flags field (bit 0).
    """

    model: str
    projection: str | Path | None = None
    max_length: int = MAX_SEQUENCE_TOKENS
    lowercase: bool = True
    batch_size: int = 16
    device: str = "cpu"

    def __post_init__(self) -> None:
        if not 1 <= self.max_length <= MAX_SEQUENCE_TOKENS:
            raise ValueError(
                f"max_length must be in [1, {MAX_SEQUENCE_TOKENS}], got {self.max_length}"
            )
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
