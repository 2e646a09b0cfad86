"""Acceptance suite: one test per criterion, printing a pass line for each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; every tolerance and runtime budget is asserted, not just reported.
"""
import hashlib
import json
import random
import time

import numpy as np

from case_fixtures import ALL_CASES
from helpers import (
    pk_oracle,
    positions_to_intervals,
    weighted_jaccard_oracle,
    window_diff_oracle,
)
from lecseg.boundary import topic_boundaries
from lecseg.cli import EXIT_OK, main
from lecseg.corpus import TimedTranscript
from lecseg.embedding import fallback_embedder
from lecseg.evaluation import boundary_f1, match_topics, mean_otr, otr, pk, window_diff
from lecseg.fixtures import generate_fixture, write_fixture
from lecseg.fusion import FusionConfig, fuse, fuse_detailed
from lecseg.pipeline import (
    PipelineConfig,
    edge_weight_dictionary,
    semantic_pipeline,
    structural_pipeline,
)
from lecseg.segments import TopicBoundaryList
from lecseg.slide_graph import SlideGraph, concept_change_score
from lecseg.structural import AttentionParams, attention_compose, relation_features, weighted_bce


def passline(name: str) -> None:
    print(f"[PASS] {name}")


def random_tf(rng: random.Random, vocab: list[str]) -> dict[str, int]:
    size = rng.randint(1, 20)
    return {v: rng.randint(1, 10) for v in rng.sample(vocab, size)}


def test_ccs_oracle_equivalence():
    """1,000 random slide-graph pairs match the brute-force weighted Jaccard exactly."""
    rng = random.Random(20240817)
    vocab = [f"c{i}" for i in range(30)]
    started = time.perf_counter()
    for trial in range(1000):
        tf1 = random_tf(rng, vocab)
        if rng.random() < 0.15:
            tf2 = dict(tf1)  # force the identical case often enough
        elif rng.random() < 0.2:
            others = [v for v in vocab if v not in tf1]
            tf2 = {v: rng.randint(1, 10) for v in rng.sample(others, min(5, len(others)))}
        else:
            tf2 = random_tf(rng, vocab)
        g1 = SlideGraph(("a",), (0.0, 1.0), tf1, {})
        g2 = SlideGraph(("b",), (1.0, 2.0), tf2, {})
        score = concept_change_score(g1, g2)
        assert score == weighted_jaccard_oracle(tf1, tf2)
        if tf1 == tf2:
            assert score == 1.0
        if not set(tf1) & set(tf2):
            assert score == 0.0
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"CCS oracle run took {elapsed:.2f}s"
    passline(f"CCS oracle equivalence (1000 pairs, {elapsed:.2f}s)")


def test_algorithm_case_suite():
    """Seven hand-built centroid triples decide per their case description."""
    for case in ALL_CASES:
        fixture = case()
        for strictness in ("verbatim", "strict"):
            result = topic_boundaries(fixture.centroids, fixture.kg, fixture.sim, strictness)
            assert result.segments == fixture.expected_segments, (
                f"{fixture.name} under {strictness}: {fixture.description}"
            )
    # all seven fixtures were built to agree across readings; none diverge
    passline("Algorithm case suite (7 fixtures, both density readings)")


def test_planted_topic_end_to_end():
    """50 seeded videos: semantic pipeline scores mean OTR >= 0.90, Pk <= 0.10."""
    started = time.perf_counter()
    otrs = []
    pks = []
    for seed in range(50):
        fixture = generate_fixture(seed)
        provider = fallback_embedder(fixture.transcript)
        sim = edge_weight_dictionary(fixture.transcript, fixture.lexicon, provider)
        segments = semantic_pipeline(
            fixture.transcript, fixture.timeline, fixture.lexicon, fixture.kg, sim
        )
        truth_intervals = [(t.start, t.end) for t in fixture.ground_truth.topics]
        otrs.append(mean_otr(fixture.ground_truth, list(segments.segments)))
        pks.append(pk(truth_intervals, list(segments.segments)))
    elapsed = time.perf_counter() - started
    mean_otr_all = sum(otrs) / len(otrs)
    mean_pk_all = sum(pks) / len(pks)
    assert mean_otr_all >= 0.90, f"mean OTR {mean_otr_all:.4f}"
    assert mean_pk_all <= 0.10, f"mean Pk {mean_pk_all:.4f}"
    assert elapsed < 60.0, f"end-to-end run took {elapsed:.1f}s"
    passline(
        "Planted-topic end-to-end (50 instances, "
        f"OTR {mean_otr_all:.3f}, Pk {mean_pk_all:.3f}, {elapsed:.1f}s)"
    )


def test_duration_strata_trend():
    """Structural accuracy decays with topic duration; semantic stays flat."""
    strata = [(600.0, 900.0), (900.0, 1200.0), (1200.0, 1500.0), (1500.0, 1920.0)]
    config = PipelineConfig()
    structural_means = []
    semantic_means = []
    for stratum_idx, duration_range in enumerate(strata):
        s_scores = []
        m_scores = []
        for rep in range(4):
            fixture = generate_fixture(
                9000 + stratum_idx * 10 + rep, topics=4, topic_duration=duration_range
            )
            provider = fallback_embedder(fixture.transcript)
            sim = edge_weight_dictionary(fixture.transcript, fixture.lexicon, provider)
            semantic = semantic_pipeline(
                fixture.transcript, fixture.timeline, fixture.lexicon, fixture.kg, sim
            )
            structural = structural_pipeline(fixture.transcript, provider, config)
            s_scores += [s for _, s in match_topics(fixture.ground_truth, list(structural.segments))]
            m_scores += [s for _, s in match_topics(fixture.ground_truth, list(semantic.segments))]
        structural_means.append(sum(s_scores) / len(s_scores))
        semantic_means.append(sum(m_scores) / len(m_scores))
    for left, right in zip(structural_means, structural_means[1:]):
        assert left >= right, f"structural means not non-increasing: {structural_means}"
    spread = max(semantic_means) - min(semantic_means)
    assert spread < 0.05, f"semantic spread {spread:.4f} across strata {semantic_means}"
    passline(
        "Duration-strata trend (structural "
        + " >= ".join(f"{m:.2f}" for m in structural_means)
        + f"; semantic spread {spread:.3f})"
    )


def test_metric_hand_examples_and_oracles():
    """pk / window_diff match exhaustive enumeration; otr matches hand arithmetic."""
    rng = random.Random(77)
    for _ in range(200):
        n = rng.randint(10, 1000)
        ref_pos = sorted(rng.sample(range(1, n), rng.randint(0, min(8, n - 1))))
        hyp_pos = sorted(rng.sample(range(1, n), rng.randint(0, min(8, n - 1))))
        k = rng.randint(1, n - 1)
        ref = positions_to_intervals(ref_pos, n)
        hyp = positions_to_intervals(hyp_pos, n)
        assert pk(ref, hyp, k=k) == pk_oracle(ref_pos, hyp_pos, n, k)
        assert window_diff(ref, hyp, k=k) == window_diff_oracle(ref_pos, hyp_pos, n, k)

    assert abs(otr((0.0, 10.0), (5.0, 15.0)) - 1.0 / 3.0) < 1e-12
    assert otr((2.0, 8.0), (2.0, 8.0)) == 1.0
    assert otr((0.0, 5.0), (10.0, 11.0)) == 0.0

    same = positions_to_intervals([100, 400], 1000)
    assert pk(same, same) == 0.0
    assert window_diff(same, same) == 0.0
    assert boundary_f1([100.0, 400.0], [100.0, 400.0]) == (1.0, 1.0, 1.0)
    passline("Metric oracles (200 random spans <= 1000 units, hand examples)")


def test_mapping_and_fusion_laws():
    """Token-time mapping and fusion honour their structural laws."""
    rng = random.Random(123)
    for _ in range(1000):
        n = rng.randint(2, 80)
        k = rng.randint(1, min(6, n))
        indices = sorted(rng.sample(range(n), k))
        times = sorted(rng.uniform(0.0, 900.0) for _ in range(k))
        times = [t + i * 1e-3 for i, t in enumerate(times)]
        transcript = TimedTranscript(
            tuple(f"t{i}" for i in range(n)), tuple(zip(indices, times))
        )
        for idx, expected in zip(indices, times):
            assert transcript.time_at(idx) == expected
        previous = None
        for i in range(n):
            t = transcript.time_at(i)
            if previous is not None:
                assert t >= previous
            previous = t

    span = 2400.0
    for trial in range(40):
        def partition():
            cuts = sorted(rng.uniform(60.0, span - 60.0) for _ in range(rng.randint(1, 6)))
            edges = [0.0] + cuts + [span]
            return TopicBoundaryList(tuple(zip(edges[:-1], edges[1:])))

        semantic, structural = partition(), partition()
        fused, pairings = fuse_detailed(structural, semantic)
        assert fused.segments[0][0] == 0.0
        assert fused.segments[-1][1] == span
        for left, right in zip(fused.segments, fused.segments[1:]):
            assert left[1] == right[0]
        for p in pairings:
            if p.structural is None:
                assert p.emitted == p.semantic
            else:
                for side in (0, 1):
                    lo = min(p.semantic[side], p.structural[side])
                    hi = max(p.semantic[side], p.structural[side])
                    assert lo - 1e-9 <= p.emitted[side] <= hi + 1e-9

    for duration, averaged in ((899.0, True), (900.0, True), (901.0, False)):
        end = 1600.0 + duration
        semantic = TopicBoundaryList(
            ((0.0, 800.0), (800.0, 800.0 + duration), (800.0 + duration, end))
        )
        structural = TopicBoundaryList(
            ((0.0, 860.0), (860.0, 740.0 + duration), (740.0 + duration, end))
        )
        fused = fuse(structural, semantic, FusionConfig(900.0))
        if averaged:
            assert (830.0, 770.0 + duration) in fused.segments
        else:
            assert (800.0, 800.0 + duration) in fused.segments
    passline("Mapping and fusion laws (1000 transcripts, tiling, 899/900/901 s)")


def test_attention_and_feature_math():
    """Attention weights, relation features and the loss match scalar oracles."""
    import math

    rng = np.random.default_rng(5)
    for _ in range(50):
        k, d = int(rng.integers(2, 8)), int(rng.integers(2, 10))
        H = rng.normal(size=(k, d))
        params = AttentionParams(
            W=rng.normal(size=(d, 1)), b=rng.normal(size=k), Zs=rng.normal(size=1)
        )
        _, alpha = attention_compose(H, params, return_weights=True)
        assert np.all(alpha >= 0)
        assert abs(alpha.sum() - 1.0) <= 1e-12

    H = np.array([[1.0, 2.0], [3.0, 4.0]])
    params = AttentionParams(
        W=np.array([[0.5], [-0.25]]), b=np.array([0.1, -0.2]), Zs=np.array([0.7])
    )
    v, alpha = attention_compose(H, params, return_weights=True)
    e1 = 1.0 * 0.5 + 2.0 * (-0.25) + 0.1
    e2 = 3.0 * 0.5 + 4.0 * (-0.25) - 0.2
    a1, a2 = math.exp(math.tanh(e1 * 0.7)), math.exp(math.tanh(e2 * 0.7))
    alpha1, alpha2 = a1 / (a1 + a2), a2 / (a1 + a2)
    assert abs(alpha[0] - alpha1) <= 1e-12 and abs(alpha[1] - alpha2) <= 1e-12
    assert abs(v[0] - (alpha1 + 3 * alpha2)) <= 1e-12
    assert abs(v[1] - (2 * alpha1 + 4 * alpha2)) <= 1e-12

    out = relation_features(np.array([1.0, 2.0]), np.array([3.0, 4.0]), np.array([5.0, 6.0]))
    assert out.tolist() == [1, 2, 3, 4, 5, 6, 3, 8, 15, 24, 5, 12]

    rng_py = random.Random(9)
    for _ in range(50):
        n = rng_py.randint(1, 30)
        targets = [float(rng_py.randint(0, 1)) for _ in range(n)]
        probs = [rng_py.uniform(1e-6, 1 - 1e-6) for _ in range(n)]
        w0, w1 = rng_py.uniform(0.1, 4.0), rng_py.uniform(0.1, 4.0)
        expected = -sum(
            (w1 if t == 1.0 else w0) * (t * math.log(o) + (1 - t) * math.log(1 - o))
            for t, o in zip(targets, probs)
        ) / n
        assert abs(weighted_bce(targets, probs, (w0, w1)) - expected) <= 1e-10
    passline("Attention, relation-feature and loss math (scalar oracles)")


def test_pipeline_determinism(tmp_path):
    """Running the full CLI pipeline twice yields byte-identical outputs."""
    fixture = generate_fixture(seed=31, topics=4)
    paths = write_fixture(fixture, tmp_path / "video")
    config = {name: str(path) for name, path in paths.items()}
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")

    digests = []
    for run in ("first", "second"):
        out_dir = tmp_path / run
        code = main(
            [
                "pipeline",
                "--config", str(config_path),
                "--out-dir", str(out_dir),
                "--fallback-embedder",
            ]
        )
        assert code == EXIT_OK
        tree = {}
        for path in sorted(out_dir.rglob("*")):
            if path.is_file():
                tree[str(path.relative_to(out_dir))] = hashlib.sha256(
                    path.read_bytes()
                ).hexdigest()
        digests.append(tree)
    assert digests[0] == digests[1]
    assert len(digests[0]) >= 8
    passline(f"Pipeline determinism ({len(digests[0])} byte-identical artifacts)")
