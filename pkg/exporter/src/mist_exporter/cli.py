"""Command line for the exporter: mist-export --encoder stub --corpus
corpus.jsonl --out emb.bin --max-len 512
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .corpus_reader import CorpusReadError
from .export import AlignmentError, ExportConfig, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mist-export",
        description="Export an embedding sidecar (MISTEMB1) from a corpus",
    )
    parser.add_argument("--version", action="version", version=f"mist-export {__version__}")
    parser.add_argument("--encoder", required=True,
                        help='"stub" or a transformer model name (optionally "hf:<name>")')
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--max-len", type=int, default=512)
    parser.add_argument("--dim", type=int, default=8, help="stub encoder dimension")
    parser.add_argument("--device", default="cpu")
    return parser


def run(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    config = ExportConfig(
        encoder=args.encoder, corpus=args.corpus, out=args.out,
        max_len=args.max_len, dim=args.dim, device=args.device,
    )
    try:
        export(config)
    except (CorpusReadError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AlignmentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    raise SystemExit(run())
