"""Batch orchestration over matrix files: fit, transform, isoscore, eval, sweep.

Transforms are fitted on the evaluation sets themselves by default (override
with the fit_* paths for a leakage-free setup). In separate mode each side
gets its own transform; in combined mode one transform is fitted on the
row-wise concatenation of both sides and applied to each.

All emitted CSV uses 6 significant digits; a JSON file with full-precision
values is written alongside. Outputs are byte-deterministic for identical
inputs and configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, InputError
from .isoscore import IsoScoreValue, isoscore
from .retrieval import (
    DIRECTION_COMMENT_TO_CODE,
    DIRECTIONS,
    EvalReport,
    PairedCorpus,
    evaluate,
)
from .storage import (
    FORMAT_NPY,
    detect_matrix_format,
    load_matrix,
    load_pair_manifest,
    load_transform,
    save_matrix,
    save_transform,
)
from .whitening import (
    EmbeddingSet,
    EigenDecomposition,
    FitStatistics,
    Method,
    WhiteningTransform,
    apply_transform,
    build_transform,
    eigendecompose,
    fit_statistics,
)

DEFAULT_EPSILON = 0.01
DEFAULT_GRID = (0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)

MODE_SEPARATE = "separate"
MODE_COMBINED = "combined"
MODES = (MODE_SEPARATE, MODE_COMBINED)

TRANSFORM_CODE_FILE = "transform_code.szt"
TRANSFORM_COMMENT_FILE = "transform_comment.szt"
TRANSFORM_COMBINED_FILE = "transform_combined.szt"


@dataclass
class RunConfig:
    """Configuration shared by the pipeline commands.

    method and epsilon stay None to request a baseline-only evaluation;
    commands that always whiten fall back to soft_zca at epsilon 0.01.
    """

    method: Method | None = None
    epsilon: float | None = None
    mode: str = MODE_SEPARATE
    code_path: Path | None = None
    comments_path: Path | None = None
    fit_code_path: Path | None = None
    fit_comments_path: Path | None = None
    transform_path: Path | None = None
    input_path: Path | None = None
    manifest_path: Path | None = None
    out: Path | None = None
    seed: int = 0
    epsilon_grid: tuple[float, ...] = DEFAULT_GRID
    direction: str = DIRECTION_COMMENT_TO_CODE

    def __post_init__(self) -> None:
        if self.method is not None and not isinstance(self.method, Method):
            try:
                self.method = Method(str(self.method).replace("-", "_"))
            except ValueError:
                valid = ", ".join(m.value.replace("_", "-") for m in Method)
                raise ConfigError(f"unknown method {self.method!r}; expected one of: {valid}") from None
        if self.epsilon is not None and self.epsilon < 0.0:
            raise ConfigError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of: {', '.join(MODES)}")
        if self.direction not in DIRECTIONS:
            raise ConfigError(
                f"unknown direction {self.direction!r}; expected one of: {', '.join(DIRECTIONS)}"
            )
        grid = tuple(float(e) for e in self.epsilon_grid)
        if not grid:
            raise ConfigError("epsilon grid must not be empty")
        if any(e < 0.0 for e in grid):
            raise ConfigError(f"invalid epsilon grid {grid}: negative values are not allowed")
        self.epsilon_grid = tuple(sorted(set(grid)))
        for name in ("code_path", "comments_path", "fit_code_path", "fit_comments_path",
                     "transform_path", "input_path", "manifest_path", "out"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, Path(value))

    def resolved_method(self) -> Method:
        return self.method if self.method is not None else Method.SOFT_ZCA

    def resolved_epsilon(self) -> float:
        return self.epsilon if self.epsilon is not None else DEFAULT_EPSILON

    def wants_whitening(self) -> bool:
        return self.method is not None or self.epsilon is not None


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    isoscore_code: float
    isoscore_comment: float
    mrr: float


@dataclass(frozen=True)
class SweepReport:
    """One evaluation per epsilon over a fixed corpus and method."""

    rows: tuple[SweepRow, ...]
    method: Method
    corpus: str

    def __post_init__(self) -> None:
        eps = [row.epsilon for row in self.rows]
        if not eps or any(b <= a for a, b in zip(eps, eps[1:])):
            raise InputError("sweep rows must have strictly ascending epsilon values")


@dataclass(frozen=True)
class EvalOutcome:
    """Baseline report plus, when whitening was requested, the whitened one."""

    baseline: EvalReport
    whitened: EvalReport | None
    delta_mrr: float | None
    ids: list | None


def load_embeddings(path) -> EmbeddingSet:
    """Load an embedding matrix file (NPY or CSV) into an EmbeddingSet."""
    if path is None:
        raise ConfigError("an input matrix path is required")
    try:
        return EmbeddingSet(load_matrix(path))
    except InputError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def _load_corpus(config: RunConfig) -> tuple[PairedCorpus, list | None]:
    if config.code_path is None or config.comments_path is None:
        raise ConfigError("both --code and --comments matrices are required")
    documents = load_embeddings(config.code_path)
    queries = load_embeddings(config.comments_path)
    corpus = PairedCorpus(queries=queries, documents=documents)
    ids = None
    if config.manifest_path is not None:
        ids = load_pair_manifest(config.manifest_path)
        if len(ids) != corpus.size:
            raise InputError(
                f"{config.manifest_path}: manifest lists {len(ids)} pairs but the corpus has {corpus.size}"
            )
    return corpus, ids


def fit_transforms(
    code: EmbeddingSet,
    comments: EmbeddingSet,
    config: RunConfig,
    epsilon: float | None = None,
    cache: dict | None = None,
) -> tuple[WhiteningTransform, WhiteningTransform]:
    """Fit per-side (separate) or shared (combined) whitening transforms.

    The returned pair is (code transform, comment transform); in combined
    mode both elements are the same object. A cache dictionary can be passed
    to reuse the eigendecompositions across epsilon values.
    """
    method = config.resolved_method()
    eps = config.resolved_epsilon() if epsilon is None else epsilon
    cache = cache if cache is not None else {}

    def stats_and_eig(key: str, data: EmbeddingSet) -> tuple[FitStatistics, EigenDecomposition | None]:
        if key not in cache:
            stats = fit_statistics(data)
            eig = eigendecompose(stats) if method is not Method.CHOLESKY else None
            cache[key] = (stats, eig)
        return cache[key]

    if config.mode == MODE_COMBINED:
        if code.dim != comments.dim:
            raise ConfigError(
                f"combined mode requires equal dimensions, got code {code.dim} and comments {comments.dim}"
            )
        stacked = EmbeddingSet(np.concatenate([code.data, comments.data], axis=0))
        stats, eig = stats_and_eig("combined", stacked)
        shared = build_transform(stats, method, eps, eig=eig)
        return shared, shared

    code_stats, code_eig = stats_and_eig("code", code)
    comment_stats, comment_eig = stats_and_eig("comment", comments)
    return (
        build_transform(code_stats, method, eps, eig=code_eig),
        build_transform(comment_stats, method, eps, eig=comment_eig),
    )


def _fit_sides(config: RunConfig) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Matrices the transforms are fitted on (fit-set overrides honored)."""
    code = load_embeddings(config.fit_code_path if config.fit_code_path else config.code_path)
    comments = load_embeddings(
        config.fit_comments_path if config.fit_comments_path else config.comments_path
    )
    return code, comments


def cmd_fit(config: RunConfig) -> dict[str, Path]:
    """Fit transform file(s) from the configured matrices.

    Separate mode writes transform_code.szt and transform_comment.szt;
    combined mode writes a single transform_combined.szt.
    """
    out_dir = _ensure_out_dir(config)
    code, comments = _fit_sides(config)
    t_code, t_comment = fit_transforms(code, comments, config)
    written: dict[str, Path] = {}
    if config.mode == MODE_COMBINED:
        path = out_dir / TRANSFORM_COMBINED_FILE
        save_transform(path, t_code)
        written["combined"] = path
    else:
        code_path = out_dir / TRANSFORM_CODE_FILE
        comment_path = out_dir / TRANSFORM_COMMENT_FILE
        save_transform(code_path, t_code)
        save_transform(comment_path, t_comment)
        written["code"] = code_path
        written["comment"] = comment_path
    return written


def cmd_transform(config: RunConfig) -> Path:
    """Apply a persisted transform to one matrix, writing the whitened matrix.

    The output keeps the input's interchange format (NPY stays NPY, CSV
    stays CSV).
    """
    if config.transform_path is None:
        raise ConfigError("--transform is required")
    if config.input_path is None:
        raise ConfigError("--input is required")
    if config.out is None:
        raise ConfigError("--out is required")
    transform = load_transform(config.transform_path)
    embeddings = load_embeddings(config.input_path)
    whitened = apply_transform(transform, embeddings)
    fmt = detect_matrix_format(config.input_path)
    config.out.parent.mkdir(parents=True, exist_ok=True)
    save_matrix(config.out, whitened.data, fmt)
    return config.out


def cmd_isoscore(config: RunConfig) -> IsoScoreValue:
    """Compute the isotropy score of one matrix; optionally write it as CSV."""
    if config.input_path is None:
        raise ConfigError("--input is required")
    value = isoscore(load_embeddings(config.input_path))
    if config.out is not None:
        config.out.parent.mkdir(parents=True, exist_ok=True)
        lines = ["isoscore,dim,n", f"{_fmt6(value.score)},{value.dim},{value.sample_count}"]
        config.out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return value


def cmd_eval(config: RunConfig) -> EvalOutcome:
    """Evaluate retrieval on a paired corpus, writing eval.json and eval.csv.

    Always reports the non-whitened baseline; when a method or epsilon is
    configured, also reports the whitened run and the MRR difference.
    """
    out_dir = _ensure_out_dir(config)
    corpus, ids = _load_corpus(config)
    baseline = evaluate(corpus, direction=config.direction)

    whitened = None
    delta = None
    if config.wants_whitening():
        fit_code, fit_comments = _fit_sides(config)
        t_code, t_comment = fit_transforms(fit_code, fit_comments, config)
        whitened = evaluate(corpus, t_code, t_comment, direction=config.direction)
        delta = whitened.mrr - baseline.mrr

    outcome = EvalOutcome(baseline=baseline, whitened=whitened, delta_mrr=delta, ids=ids)
    _write_json(out_dir / "eval.json", _eval_payload(config, outcome))
    (out_dir / "eval.csv").write_text(_eval_csv(outcome), encoding="utf-8")
    (out_dir / "ranks.csv").write_text(_ranks_csv(outcome), encoding="utf-8")
    return outcome


def cmd_sweep(config: RunConfig) -> SweepReport:
    """Evaluate over the epsilon grid, writing sweep.csv and sweep.json."""
    out_dir = _ensure_out_dir(config)
    corpus, _ = _load_corpus(config)
    fit_code, fit_comments = _fit_sides(config)
    method = config.resolved_method()

    cache: dict = {}
    rows = []
    reports = []
    for eps in config.epsilon_grid:
        t_code, t_comment = fit_transforms(fit_code, fit_comments, config, epsilon=eps, cache=cache)
        report = evaluate(corpus, t_code, t_comment, direction=config.direction)
        rows.append(
            SweepRow(
                epsilon=eps,
                isoscore_code=report.isoscore_code.score,
                isoscore_comment=report.isoscore_comment.score,
                mrr=report.mrr,
            )
        )
        reports.append(report)

    corpus_id = f"{config.code_path.name}|{config.comments_path.name}"
    sweep = SweepReport(rows=tuple(rows), method=method, corpus=corpus_id)

    csv_lines = ["epsilon,isoscore_code,isoscore_comment,mrr"]
    for row in sweep.rows:
        csv_lines.append(
            f"{_fmt6(row.epsilon)},{_fmt6(row.isoscore_code)},"
            f"{_fmt6(row.isoscore_comment)},{_fmt6(row.mrr)}"
        )
    (out_dir / "sweep.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")

    payload = {
        "method": method.value,
        "mode": config.mode,
        "direction": config.direction,
        "seed": config.seed,
        "corpus": corpus_id,
        "rows": [
            {
                "epsilon": row.epsilon,
                "isoscore_code": row.isoscore_code,
                "isoscore_comment": row.isoscore_comment,
                "mrr": row.mrr,
            }
            for row in sweep.rows
        ],
    }
    _write_json(out_dir / "sweep.json", payload)
    return sweep


def _ensure_out_dir(config: RunConfig) -> Path:
    if config.out is None:
        raise ConfigError("--out directory is required")
    config.out.mkdir(parents=True, exist_ok=True)
    return config.out


def _fmt6(value: float) -> str:
    return format(float(value), ".6g")


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _isoscore_payload(value: IsoScoreValue) -> dict:
    return {"score": value.score, "dim": value.dim, "n": value.sample_count}


def _report_payload(report: EvalReport) -> dict:
    return {
        "method": None if report.method is None else report.method.value,
        "epsilon": report.epsilon,
        "mrr": report.mrr,
        "isoscore_code": _isoscore_payload(report.isoscore_code),
        "isoscore_comment": _isoscore_payload(report.isoscore_comment),
        "reciprocal_ranks": [float(r) for r in report.reciprocal_ranks],
    }


def _eval_payload(config: RunConfig, outcome: EvalOutcome) -> dict:
    return {
        "config": {
            "method": None if not config.wants_whitening() else config.resolved_method().value,
            "epsilon": None if not config.wants_whitening() else config.resolved_epsilon(),
            "mode": config.mode,
            "direction": config.direction,
            "seed": config.seed,
            "code": str(config.code_path),
            "comments": str(config.comments_path),
        },
        "baseline": _report_payload(outcome.baseline),
        "whitened": None if outcome.whitened is None else _report_payload(outcome.whitened),
        "delta_mrr": outcome.delta_mrr,
        "ids": outcome.ids,
    }


def _eval_csv(outcome: EvalOutcome) -> str:
    header = "label,method,epsilon,mrr,delta_mrr,isoscore_code,isoscore_comment,n,dim"
    base = outcome.baseline
    lines = [
        header,
        f"baseline,none,,{_fmt6(base.mrr)},,{_fmt6(base.isoscore_code.score)},"
        f"{_fmt6(base.isoscore_comment.score)},{base.isoscore_code.sample_count},"
        f"{base.isoscore_code.dim}",
    ]
    if outcome.whitened is not None:
        white = outcome.whitened
        lines.append(
            f"whitened,{white.method.value},{_fmt6(white.epsilon)},{_fmt6(white.mrr)},"
            f"{_fmt6(outcome.delta_mrr)},{_fmt6(white.isoscore_code.score)},"
            f"{_fmt6(white.isoscore_comment.score)},{white.isoscore_code.sample_count},"
            f"{white.isoscore_code.dim}"
        )
    return "\n".join(lines) + "\n"


def _ranks_csv(outcome: EvalOutcome) -> str:
    report = outcome.whitened if outcome.whitened is not None else outcome.baseline
    ids = outcome.ids
    lines = ["index,id,rank,reciprocal_rank"]
    for i, rr in enumerate(report.reciprocal_ranks):
        rank = int(round(1.0 / rr))
        label = "" if ids is None else str(ids[i])
        lines.append(f"{i},{label},{rank},{_fmt6(rr)}")
    return "\n".join(lines) + "\n"
