"""Adapter acceptance: pooling fidelity and the full extract-then-evaluate path.

Run with `pytest tests/test_acceptance.py -v -s` for the per-criterion lines.
The end-to-end criterion mines real function/docstring pairs from installed
Python sources, embeds them with a local checkpoint, and drives the softzca
CLI purely through the emitted files.
"""

import ast
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import torch

from softzca_adapter import ExtractionSpec, extract
from softzca_adapter.cli import main as cli_main


def _passed(name):
    print(f"[acceptance] PASS {name}")


def mine_code_comment_pairs(limit, max_chars=1500):
    """Real (function body, docstring) pairs from installed Python sources."""
    import numpy as numpy_module

    pairs = []
    root = Path(numpy_module.__file__).parent
    for path in sorted(root.rglob("*.py")):
        if len(pairs) >= limit:
            break
        try:
            tree = ast.parse(path.read_text(encoding="utf-8", errors="ignore"))
        except SyntaxError:
            continue
        for node in ast.walk(tree):
            if len(pairs) >= limit:
                break
            if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                continue
            doc = ast.get_docstring(node)
            if not doc or len(doc.strip()) < 25:
                continue
            body = list(node.body)
            if (
                body
                and isinstance(body[0], ast.Expr)
                and isinstance(body[0].value, ast.Constant)
                and isinstance(body[0].value.value, str)
            ):
                body = body[1:]  # keep the docstring out of the code side
            if not body:
                continue
            try:
                code = "\n".join(ast.unparse(stmt) for stmt in body)
            except Exception:
                continue
            if not code.strip():
                continue
            pairs.append((doc.strip()[:max_chars], code.strip()[:max_chars]))
    return pairs


def test_mean_pooling_matches_manual_last_hidden_state(tiny_checkpoint, write_jsonl, tmp_path):
    from transformers import AutoModel, AutoTokenizer

    text = "return the element-wise square of the input array"
    corpus = write_jsonl([{"id": "probe", "text": text, "field": "comment"}])
    extract(ExtractionSpec(model=str(tiny_checkpoint), input_path=corpus, output_dir=tmp_path / "out"))
    emitted = np.load(tmp_path / "out" / "comments.npy")[0]

    tokenizer = AutoTokenizer.from_pretrained(str(tiny_checkpoint))
    model = AutoModel.from_pretrained(str(tiny_checkpoint))
    model.eval()
    encoded = tokenizer(text, truncation=True, max_length=256, return_tensors="pt")
    with torch.no_grad():
        tokens = model(**encoded).last_hidden_state[0]
    manual = tokens.mean(dim=0).numpy()
    deviation = float(np.max(np.abs(emitted - manual)))
    assert deviation <= 1e-5
    _passed(f"mean pooling matches manual token average (max deviation {deviation:.2e})")


@pytest.mark.slow
def test_end_to_end_extraction_feeds_the_evaluation_pipeline(tiny_checkpoint, tmp_path):
    pairs = mine_code_comment_pairs(limit=1000)
    assert len(pairs) == 1000

    lines = []
    for i, (comment, code) in enumerate(pairs):
        rid = f"pair-{i:05d}"
        lines.append(json.dumps({"id": rid, "text": code, "field": "code"}))
        lines.append(json.dumps({"id": rid, "text": comment, "field": "comment"}))
    corpus = tmp_path / "real_pairs.jsonl"
    corpus.write_text("\n".join(lines) + "\n", encoding="utf-8")

    out = tmp_path / "embeddings"
    assert cli_main([
        "--model", str(tiny_checkpoint),
        "--input", str(corpus),
        "--out", str(out),
        "--pooling", "mean_last_hidden",
        "--max-tokens", "256",
    ]) == 0
    assert np.load(out / "code.npy").shape == (1000, 32)
    assert np.load(out / "comments.npy").shape == (1000, 32)

    report_dir = tmp_path / "report"
    result = subprocess.run(
        [
            sys.executable, "-m", "softzca", "eval",
            "--code", str(out / "code.npy"),
            "--comments", str(out / "comments.npy"),
            "--manifest", str(out / "manifest.json"),
            "--method", "soft-zca",
            "--epsilon", "0.01",
            "--out", str(report_dir),
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    payload = json.loads((report_dir / "eval.json").read_text(encoding="utf-8"))
    assert payload["delta_mrr"] is not None
    assert payload["whitened"]["mrr"] > 0
    _passed(
        "end-to-end run on 1000 real pairs: baseline mrr "
        f"{payload['baseline']['mrr']:.4f}, whitened mrr {payload['whitened']['mrr']:.4f}, "
        f"delta {payload['delta_mrr']:+.4f}"
    )
