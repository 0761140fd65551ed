"""Command-line interface: fit, transform, isoscore, eval, sweep."""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, SoftZcaError
from .pipeline import (
    DEFAULT_GRID,
    MODE_SEPARATE,
    RunConfig,
    cmd_eval,
    cmd_fit,
    cmd_isoscore,
    cmd_sweep,
    cmd_transform,
)
from .retrieval import DIRECTION_COMMENT_TO_CODE


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems as ConfigError (exit 4)."""

    def error(self, message):
        raise ConfigError(message)


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ConfigError(f"invalid epsilon grid {text!r}: expected comma-separated floats") from None


def _add_corpus_args(sub, with_fit_sets: bool = True) -> None:
    sub.add_argument("--code", required=True, help="code-side embedding matrix (NPY or CSV)")
    sub.add_argument("--comments", required=True, help="comment-side embedding matrix (NPY or CSV)")
    if with_fit_sets:
        sub.add_argument("--fit-code", help="optional separate matrix to fit the code transform on")
        sub.add_argument("--fit-comments", help="optional separate matrix to fit the comment transform on")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="softzca", description="Whitening, isotropy, and retrieval evaluation for embeddings.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fit = sub.add_parser("fit", help="fit whitening transform file(s)")
    _add_corpus_args(fit)
    fit.add_argument("--method", default=None, help="zca | soft-zca | pca | cholesky (default soft-zca)")
    fit.add_argument("--epsilon", type=float, default=None, help="eigenvalue regularizer (default 0.01)")
    fit.add_argument("--mode", default=MODE_SEPARATE, help="separate | combined")
    fit.add_argument("--out", required=True, help="output directory for transform files")

    transform = sub.add_parser("transform", help="apply a transform file to a matrix")
    transform.add_argument("--transform", required=True, help="transform file written by fit")
    transform.add_argument("--input", required=True, help="matrix to whiten (NPY or CSV)")
    transform.add_argument("--out", required=True, help="output matrix path (input format preserved)")

    iso = sub.add_parser("isoscore", help="isotropy score of one matrix")
    iso.add_argument("--input", required=True, help="embedding matrix (NPY or CSV)")
    iso.add_argument("--out", default=None, help="optional CSV output path")

    evaluate = sub.add_parser("eval", help="baseline and optionally whitened retrieval report")
    _add_corpus_args(evaluate)
    evaluate.add_argument("--method", default=None, help="whiten with this method (omit for baseline only)")
    evaluate.add_argument("--epsilon", type=float, default=None, help="eigenvalue regularizer (default 0.01)")
    evaluate.add_argument("--mode", default=MODE_SEPARATE, help="separate | combined")
    evaluate.add_argument("--manifest", default=None, help="pair manifest JSON asserting row alignment")
    evaluate.add_argument("--direction", default=DIRECTION_COMMENT_TO_CODE,
                          help="comment-to-code | code-to-comment")
    evaluate.add_argument("--seed", type=int, default=0, help="seed echoed into reports")
    evaluate.add_argument("--out", required=True, help="output directory for eval.json/eval.csv/ranks.csv")

    sweep = sub.add_parser("sweep", help="evaluate over an epsilon grid")
    _add_corpus_args(sweep)
    sweep.add_argument("--method", default=None, help="whitening method (default soft-zca)")
    sweep.add_argument("--grid", default=None, help="comma-separated epsilon values")
    sweep.add_argument("--mode", default=MODE_SEPARATE, help="separate | combined")
    sweep.add_argument("--manifest", default=None, help="pair manifest JSON asserting row alignment")
    sweep.add_argument("--direction", default=DIRECTION_COMMENT_TO_CODE,
                       help="comment-to-code | code-to-comment")
    sweep.add_argument("--seed", type=int, default=0, help="seed echoed into reports")
    sweep.add_argument("--out", required=True, help="output directory for sweep.csv/sweep.json")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        method=getattr(args, "method", None),
        epsilon=getattr(args, "epsilon", None),
        mode=getattr(args, "mode", MODE_SEPARATE),
        code_path=getattr(args, "code", None),
        comments_path=getattr(args, "comments", None),
        fit_code_path=getattr(args, "fit_code", None),
        fit_comments_path=getattr(args, "fit_comments", None),
        transform_path=getattr(args, "transform", None),
        input_path=getattr(args, "input", None),
        manifest_path=getattr(args, "manifest", None),
        out=getattr(args, "out", None),
        seed=getattr(args, "seed", 0),
        epsilon_grid=_parse_grid(args.grid) if getattr(args, "grid", None) else DEFAULT_GRID,
        direction=getattr(args, "direction", DIRECTION_COMMENT_TO_CODE),
    )


def _run(args: argparse.Namespace) -> None:
    config = _config_from_args(args)
    if args.command == "fit":
        written = cmd_fit(config)
        for role, path in sorted(written.items()):
            print(f"wrote {role} transform: {path}")
    elif args.command == "transform":
        path = cmd_transform(config)
        print(f"wrote whitened matrix: {path}")
    elif args.command == "isoscore":
        value = cmd_isoscore(config)
        print(f"isoscore={value.score:.6g} dim={value.dim} n={value.sample_count}")
    elif args.command == "eval":
        outcome = cmd_eval(config)
        print(f"baseline mrr={outcome.baseline.mrr:.6g}")
        if outcome.whitened is not None:
            print(
                f"whitened mrr={outcome.whitened.mrr:.6g} "
                f"(method={outcome.whitened.method.value}, epsilon={outcome.whitened.epsilon:.6g}) "
                f"delta_mrr={outcome.delta_mrr:+.6g}"
            )
        print(f"reports written to {config.out}")
    elif args.command == "sweep":
        sweep = cmd_sweep(config)
        print(f"sweep over {len(sweep.rows)} epsilon values written to {config.out}")
    else:  # unreachable: argparse enforces the command set
        raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _run(args)
    except SoftZcaError as exc:
        print(f"softzca: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
