"""Command line for the exporter.

Input texts come from a two-column TSV (id <TAB> text, one per line).
Exit codes: 0 success, 2 input problem, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ExportConfig
from .encode import export_collection, export_corpus_stats

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def read_texts(path: str | Path) -> dict[str, str]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValueError(f"{path}: {exc.strerror or exc}") from exc
    texts: dict[str, str] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t", 1)
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'id<TAB>text'")
        text_id, text = parts
        if text_id in texts:
            raise ValueError(f"{path}:{lineno}: duplicate id '{text_id}'")
        texts[text_id] = text
    if not texts:
        raise ValueError(f"{path}: no texts found")
    return texts


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True, help="encoder identifier or local path")
    parser.add_argument("--projection", default=None,
                        help=".npy matrix (encoder_dim x output_dim); omit for none")
    parser.add_argument("--max-length", type=int, default=ExportConfig.max_length)
    parser.add_argument("--no-lowercase", dest="lowercase", action="store_false",
                        help="keep the input casing (default lowercases)")
    parser.add_argument("--batch-size", type=int, default=ExportConfig.batch_size)
    parser.add_argument("--device", default=ExportConfig.device)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lieb-export",
        description="Export transformer token embeddings and corpus statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embeddings", help="write a LIEB embedding file")
    p.add_argument("--texts", required=True, help="TSV of id<TAB>text")
    p.add_argument("--out", required=True, help="output .lieb path")
    _add_config_flags(p)

    p = sub.add_parser("stats", help="write a corpus statistics table")
    p.add_argument("--texts", required=True, help="TSV of id<TAB>text")
    p.add_argument("--out", required=True, help="output .tsv path")
    _add_config_flags(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        config = ExportConfig(
            model=args.model,
            projection=args.projection,
            max_length=args.max_length,
            lowercase=args.lowercase,
            batch_size=args.batch_size,
            device=args.device,
        )
        texts = read_texts(args.texts)
        if args.command == "embeddings":
            out = export_collection(texts, config, args.out)
        else:
            out = export_corpus_stats(texts, config, args.out)
        print(out)
    except (ValueError, OSError) as exc:
        # OSError covers unreadable inputs and unloadable model paths.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
