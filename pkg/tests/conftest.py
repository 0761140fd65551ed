import json

import pytest

from softzca import generate_paired_corpus
from softzca.storage import save_npy


@pytest.fixture(scope="session")
def corpus_files(tmp_path_factory):
    """Seeded paired corpus persisted as NPY files plus a pair manifest."""
    root = tmp_path_factory.mktemp("corpus")
    corpus = generate_paired_corpus(seed=7, n=500, signal_dim=8, nuisance_dim=56)
    code = root / "code.npy"
    comments = root / "comments.npy"
    manifest = root / "manifest.json"
    save_npy(code, corpus.documents.data)
    save_npy(comments, corpus.queries.data)
    ids = [f"pair-{i:04d}" for i in range(corpus.size)]
    manifest.write_text(json.dumps({"count": corpus.size, "ids": ids}), encoding="utf-8")
    return {"code": code, "comments": comments, "manifest": manifest, "corpus": corpus, "ids": ids}
