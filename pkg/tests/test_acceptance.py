"""Acceptance suite: one test per release criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside the pytest verdicts.
"""

import time

import numpy as np
import pytest

from softzca import (
    EmbeddingSet,
    Method,
    PairedCorpus,
    WhiteningTransform,
    apply_transform,
    build_transform,
    eigendecompose,
    evaluate,
    fit_statistics,
    generate_anisotropic_gaussian,
    generate_paired_corpus,
    isoscore,
    reciprocal_ranks,
)
from softzca.pipeline import MODE_COMBINED, RunConfig, cmd_eval, cmd_fit, cmd_sweep
from softzca.storage import load_npy, load_transform, save_npy, save_transform


def _passed(name):
    print(f"[acceptance] PASS {name}")


@pytest.fixture(scope="module")
def whitened_gaussian():
    """Seeded anisotropic Gaussian, zca at eps 0, plus the fit byproducts."""
    start = time.perf_counter()
    cloud = generate_anisotropic_gaussian(seed=1, n=2000, spectrum=np.geomspace(100.0, 0.01, 64))
    stats = fit_statistics(cloud)
    decomposition = eigendecompose(stats)
    transform = build_transform(stats, Method.ZCA, 0.0, eig=decomposition)
    whitened = apply_transform(transform, cloud)
    elapsed = time.perf_counter() - start
    return cloud, decomposition, transform, whitened, elapsed


def test_whitening_condition_on_anisotropic_gaussian(whitened_gaussian):
    _, decomposition, transform, _, elapsed = whitened_gaussian
    fitted_covariance = decomposition.reconstruct()
    deviation = np.max(np.abs(transform.matrix @ fitted_covariance @ transform.matrix.T - np.eye(64)))
    assert deviation <= 1e-6
    assert elapsed < 5.0
    _passed(f"whitening condition: max deviation {deviation:.2e}, {elapsed:.2f}s")


def test_whitened_set_is_nearly_perfectly_isotropic(whitened_gaussian):
    _, _, _, whitened, _ = whitened_gaussian
    score = isoscore(whitened).score
    assert score >= 0.999
    _passed(f"perfect isotropy after full whitening: isoscore {score:.6f}")


def test_analytic_soft_zca_matrices():
    from softzca import FitStatistics

    diag_stats = FitStatistics(mean=np.zeros(2), covariance=np.diag([4.0, 1.0]), sample_count=100)
    soft = build_transform(diag_stats, Method.SOFT_ZCA, 0.01)
    np.testing.assert_allclose(soft.matrix, np.diag([0.49938, 0.99504]), atol=1e-5)

    coupled_stats = FitStatistics(
        mean=np.zeros(2), covariance=np.array([[2.0, 1.0], [1.0, 2.0]]), sample_count=100
    )
    zca = build_transform(coupled_stats, Method.ZCA, 0.0)
    np.testing.assert_allclose(zca.matrix, [[0.78868, -0.21132], [-0.21132, 0.78868]], atol=1e-5)
    _passed("analytic soft-zca matrices within 1e-5")


def test_isoscore_anchor_values():
    eye = np.eye(6)
    uniform = isoscore(EmbeddingSet(np.concatenate([eye, -eye], axis=0))).score
    assert abs(uniform - 1.0) <= 1e-12

    direction = np.arange(1.0, 7.0)
    collinear = isoscore(EmbeddingSet(np.linspace(-2, 2, 10)[:, None] * direction)).score
    assert abs(collinear) <= 1e-12

    a = np.sqrt(2.0)
    lopsided = isoscore(EmbeddingSet([(2 * a, 0), (-2 * a, 0), (0, a), (0, -a)])).score
    assert abs(lopsided - 0.4706) <= 1e-3
    _passed(
        f"isoscore anchors: uniform {uniform:.15f}, collinear {collinear:.2e}, "
        f"(4,1) profile {lopsided:.6f}"
    )


def test_epsilon_sweep_isoscore_monotonicity(corpus_files, tmp_path):
    grid = (0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)
    sweep = cmd_sweep(
        RunConfig(
            code_path=corpus_files["code"],
            comments_path=corpus_files["comments"],
            epsilon_grid=grid,
            out=tmp_path,
        )
    )
    lines = (tmp_path / "sweep.csv").read_text(encoding="utf-8").strip().splitlines()
    assert len(lines) == 1 + len(grid)
    code_scores = [row.isoscore_code for row in sweep.rows]
    comment_scores = [row.isoscore_comment for row in sweep.rows]
    assert all(b <= a + 1e-3 for a, b in zip(code_scores, code_scores[1:]))
    assert all(b <= a + 1e-3 for a, b in zip(comment_scores, comment_scores[1:]))
    _passed(f"epsilon sweep: isoscore columns non-increasing over {len(grid)} grid rows")


def test_reciprocal_ranks_match_full_sort_oracle():
    rng = np.random.default_rng(123)
    checked = 0
    for _ in range(100):
        sim = rng.standard_normal((50, 50))
        rr = reciprocal_ranks(sim)
        for i in range(50):
            row = sim[i]
            order = sorted(range(50), key=lambda j: (-row[j], j != i))
            assert rr[i] == 1.0 / (order.index(i) + 1)
        checked += 1

    side = EmbeddingSet(rng.standard_normal((40, 8)))
    perfect = evaluate(PairedCorpus(queries=side, documents=side))
    assert perfect.mrr == 1.0
    _passed(f"reciprocal ranks match the sort oracle on {checked} matrices; self-paired mrr 1.0")


def test_soft_zca_improves_mrr_on_synthetic_corpus(corpus_files, tmp_path):
    outcome = cmd_eval(
        RunConfig(
            method=Method.SOFT_ZCA,
            epsilon=1e-2,
            code_path=corpus_files["code"],
            comments_path=corpus_files["comments"],
            out=tmp_path,
        )
    )
    assert outcome.delta_mrr is not None
    assert outcome.delta_mrr > 0
    _passed(
        f"directional mrr gain: baseline {outcome.baseline.mrr:.4f} -> "
        f"whitened {outcome.whitened.mrr:.4f} (delta {outcome.delta_mrr:+.4f})"
    )


def test_separate_and_combined_modes(corpus_files, tmp_path):
    separate = cmd_fit(
        RunConfig(
            code_path=corpus_files["code"],
            comments_path=corpus_files["comments"],
            out=tmp_path / "separate",
        )
    )
    combined = cmd_fit(
        RunConfig(
            code_path=corpus_files["code"],
            comments_path=corpus_files["comments"],
            mode=MODE_COMBINED,
            out=tmp_path / "combined",
        )
    )
    t_code = load_transform(separate["code"])
    t_comment = load_transform(separate["comment"])
    t_combined = load_transform(combined["combined"])
    assert not np.array_equal(t_code.matrix, t_comment.matrix)
    assert not np.array_equal(t_code.matrix, t_combined.matrix)

    duplicate = cmd_fit(
        RunConfig(
            code_path=corpus_files["code"],
            comments_path=corpus_files["code"],
            mode=MODE_COMBINED,
            out=tmp_path / "dup",
        )
    )
    single = cmd_fit(
        RunConfig(
            code_path=corpus_files["code"],
            comments_path=corpus_files["code"],
            out=tmp_path / "single",
        )
    )
    t_dup = load_transform(duplicate["combined"])
    t_single = load_transform(single["code"])
    gap = max(
        np.max(np.abs(t_dup.matrix - t_single.matrix)),
        np.max(np.abs(t_dup.mean - t_single.mean)),
    )
    assert gap <= 1e-12
    _passed(f"separate vs combined modes complete; duplicate-stack gap {gap:.2e}")


def test_huge_epsilon_matches_centering_only_ranking(corpus_files):
    corpus = corpus_files["corpus"]
    code_stats = fit_statistics(corpus.documents)
    comment_stats = fit_statistics(corpus.queries)
    big = evaluate(
        corpus,
        build_transform(code_stats, Method.SOFT_ZCA, 1e12),
        build_transform(comment_stats, Method.SOFT_ZCA, 1e12),
    )
    d = corpus.queries.dim
    centered = evaluate(
        corpus,
        WhiteningTransform(Method.SOFT_ZCA, 0.0, code_stats.mean, np.eye(d)),
        WhiteningTransform(Method.SOFT_ZCA, 0.0, comment_stats.mean, np.eye(d)),
    )
    np.testing.assert_array_equal(big.reciprocal_ranks, centered.reciprocal_ranks)
    _passed("epsilon 1e12 ranking equals centering-only ranking in every rank")


def test_storage_round_trips_are_bit_exact(tmp_path):
    rng = np.random.default_rng(9)
    matrix = rng.standard_normal((31, 7))
    first = tmp_path / "a.npy"
    second = tmp_path / "b.npy"
    save_npy(first, matrix)
    loaded = load_npy(first)
    assert loaded.tobytes() == matrix.tobytes()
    save_npy(second, loaded)
    assert first.read_bytes() == second.read_bytes()

    stats = fit_statistics(EmbeddingSet(rng.standard_normal((60, 7))))
    transform = build_transform(stats, Method.SOFT_ZCA, 1e-3)
    t_first = tmp_path / "a.szt"
    t_second = tmp_path / "b.szt"
    save_transform(t_first, transform)
    restored = load_transform(t_first)
    assert restored.mean.tobytes() == transform.mean.tobytes()
    assert restored.matrix.tobytes() == transform.matrix.tobytes()
    assert restored.epsilon == transform.epsilon
    assert restored.method is transform.method
    save_transform(t_second, restored)
    assert t_first.read_bytes() == t_second.read_bytes()
    _passed("matrix and transform containers round-trip bit-exact")
