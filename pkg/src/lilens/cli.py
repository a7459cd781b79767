"""Command-line entry point.

Exit codes: 0 on success, 2 for any input problem (bad flags, missing or
malformed files, unresolvable ids), 3 for an internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .analysis import DEFAULT_SPECTRAL_CAP
from .model import InputError
from .pipeline import (
    RunConfig,
    cmd_delta_es,
    cmd_importance,
    cmd_match_stats,
    cmd_report,
    cmd_rerank,
    cmd_spectral,
)
from .synth import SynthConfig, generate, write_fixture

__all__ = ["main"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _add_io_flags(parser: argparse.ArgumentParser, stats: bool) -> None:
    parser.add_argument("--queries", required=True, help="query LIEB file")
    parser.add_argument("--docs", required=True, help="document LIEB file")
    parser.add_argument("--run", required=True, help="first-stage TREC run file")
    if stats:
        parser.add_argument("--stats", required=True, help="corpus statistics table")
    parser.add_argument("--out-dir", default=".", help="directory for output files")
    parser.add_argument("--threads", type=int, default=1, help="worker threads")
    parser.add_argument("--seed", type=int, default=0, help="seed for capped subsampling")
    parser.add_argument(
        "--tau-ap-mode",
        choices=("asym", "sym"),
        default="asym",
        help="tau_ap direction: candidate-iterated (asym) or mean of both (sym)",
    )
    parser.add_argument(
        "--spectral-cap",
        type=int,
        default=DEFAULT_SPECTRAL_CAP,
        help="row cap per term for the spectral diagnostic",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lilens",
        description="White-box diagnostics for late-interaction (MaxSim) retrieval.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    specs = [
        ("rerank", "re-rank candidates and write a run file", False, cmd_rerank),
        ("importance", "masked-term importance (tau_ap) per query word", True, cmd_importance),
        ("delta-es", "exact-vs-soft match score gaps", True, cmd_delta_es),
        ("spectral", "singular-value concentration per query term", True, cmd_spectral),
        ("match-stats", "per-position match frequencies", False, cmd_match_stats),
        ("report", "all diagnostics plus the IDF correlation summary", True, cmd_report),
    ]
    for name, help_text, needs_stats, fn in specs:
        p = sub.add_parser(name, help=help_text)
        _add_io_flags(p, stats=needs_stats)
        if not needs_stats:
            p.add_argument("--stats", default=None, help="corpus statistics table (optional)")
        p.set_defaults(fn=fn)

    p = sub.add_parser("synth", help="generate a synthetic fixture corpus")
    p.add_argument("--out-dir", required=True, help="directory for the fixture files")
    p.add_argument("--seed", type=int, default=SynthConfig.seed)
    p.add_argument("--n-docs", type=int, default=SynthConfig.n_docs)
    p.add_argument("--n-queries", type=int, default=SynthConfig.n_queries)
    p.add_argument("--vocab-size", type=int, default=SynthConfig.vocab_size)
    p.add_argument("--dim", type=int, default=SynthConfig.dim)
    p.set_defaults(fn=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            config = SynthConfig(
                n_docs=args.n_docs,
                n_queries=args.n_queries,
                vocab_size=args.vocab_size,
                dim=args.dim,
                seed=args.seed,
                # The class default suits the full-size fixture; small
                # corpora just use every document as a candidate.
                candidates_per_query=min(SynthConfig.candidates_per_query, args.n_docs),
            )
            paths = write_fixture(generate(config), args.out_dir)
            for name, path in paths.items():
                print(f"{name}: {path}")
        else:
            cfg = RunConfig(
                queries=Path(args.queries),
                docs=Path(args.docs),
                run=Path(args.run),
                stats=Path(args.stats) if args.stats else None,
                out_dir=Path(args.out_dir),
                threads=args.threads,
                seed=args.seed,
                tau_ap_mode=args.tau_ap_mode,
                spectral_cap=args.spectral_cap,
            )
            out = args.fn(cfg)
            print(out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
