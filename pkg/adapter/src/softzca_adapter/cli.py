"""Command-line front end: softzca-extract."""

from __future__ import annotations

import argparse
import sys

from .extract import (
    POOLING_MEAN_LAST_HIDDEN,
    POOLINGS,
    AdapterError,
    ExtractionSpec,
    extract,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softzca-extract",
        description="Extract per-sequence transformer embeddings into NPY matrices plus a manifest.",
    )
    parser.add_argument("--model", required=True, help="checkpoint identifier or local directory")
    parser.add_argument("--input", required=True, help="JSONL corpus of {id, text, field} records")
    parser.add_argument("--out", required=True, help="output directory (code.npy, comments.npy, manifest.json)")
    parser.add_argument("--pooling", default=POOLING_MEAN_LAST_HIDDEN, choices=POOLINGS,
                        help="mean of the last hidden state, or the model's own pooled output")
    parser.add_argument("--max-tokens", type=int, default=256, help="truncation budget per sequence")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = ExtractionSpec(
        model=args.model,
        input_path=args.input,
        output_dir=args.out,
        pooling=args.pooling,
        max_tokens=args.max_tokens,
    )
    try:
        manifest = extract(spec)
    except AdapterError as exc:
        print(f"softzca-extract: error: {exc}", file=sys.stderr)
        return 1
    fields = ", ".join(f"{name}={meta['count']}" for name, meta in sorted(manifest["fields"].items()))
    print(f"extracted {fields} -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
