"""Fusing the two boundary lists and naming segments from the syllabus.

Fusion trusts the knowledge-graph segmentation outright for long segments and
averages endpoints with the best-overlapping structural segment for short
ones.  Naming walks the segments chronologically, scoring each remaining
syllabus entry against the slide titles shown inside the segment with a
relaxed word-mover distance, and retires a name once assigned.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import SlideTimeline, normalize_word
from .embedding import EmbeddingProvider
from .segments import AnnotatedSegment, TopicBoundaryList

STOP_WORDS = frozenset(
    """a an and are as at be but by for from has have if in into is it its of on
    or such that the their then there these this to was were will with""".split()
)


@dataclass(frozen=True)
class FusionConfig:
    """Duration cutoff (seconds) above which only the semantic result counts."""

    duration_threshold: float = 900.0
    pairing_min_overlap: float = 1e-9

    def __post_init__(self) -> None:
        if self.duration_threshold <= 0:
            raise ValueError("duration_threshold must be positive")
        if not (0.0 < self.pairing_min_overlap <= 1.0):
            raise ValueError("pairing_min_overlap must be in (0, 1]")


@dataclass(frozen=True)
class FusedPairing:
    """Provenance of one emitted segment: its inputs and the averaging result."""

    semantic: tuple[float, float]
    structural: tuple[float, float] | None  # None: emitted verbatim
    emitted: tuple[float, float]
    protected: bool  # long-segment rule: endpoints must survive repair


def _iou(a: tuple[float, float], b: tuple[float, float]) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter <= 0:
        return 0.0
    union = max(a[1], b[1]) - min(a[0], b[0])
    return inter / union


def fuse_detailed(
    structural: TopicBoundaryList,
    semantic: TopicBoundaryList,
    cfg: FusionConfig | None = None,
) -> tuple[TopicBoundaryList, list[FusedPairing]]:
    """`fuse` plus the per-segment pairing provenance (for inspection/tests)."""
    cfg = cfg or FusionConfig()
    if (
        abs(structural.span[0] - semantic.span[0]) > 1e-6
        or abs(structural.span[1] - semantic.span[1]) > 1e-6
    ):
        raise ValueError(
            f"span mismatch: structural {structural.span} vs semantic {semantic.span}"
        )
    span = semantic.span
    pairings: list[FusedPairing] = []
    for seg in semantic.segments:
        duration = seg[1] - seg[0]
        best = max(structural.segments, key=lambda s: (_iou(seg, s), -s[0]))
        best_iou = _iou(seg, best)
        if duration > cfg.duration_threshold:
            pairings.append(FusedPairing(seg, None, seg, protected=True))
        elif best_iou < cfg.pairing_min_overlap:
            pairings.append(FusedPairing(seg, None, seg, protected=False))
        else:
            emitted = ((seg[0] + best[0]) / 2.0, (seg[1] + best[1]) / 2.0)
            pairings.append(FusedPairing(seg, best, emitted, protected=False))

    pairings.sort(key=lambda p: p.emitted)
    times = [span[0]]
    for left, right in zip(pairings, pairings[1:]):
        if left.protected and not right.protected:
            joint = left.emitted[1]
        elif right.protected and not left.protected:
            joint = right.emitted[0]
        else:
            # protected neighbours share an exact semantic boundary already
            joint = (left.emitted[1] + right.emitted[0]) / 2.0
        times.append(max(joint, times[-1]))
    times.append(max(span[1], times[-1]))
    segments = tuple((s, e) for s, e in zip(times[:-1], times[1:]) if e > s)
    return TopicBoundaryList(segments), pairings


def fuse(
    structural: TopicBoundaryList,
    semantic: TopicBoundaryList,
    cfg: FusionConfig | None = None,
) -> TopicBoundaryList:
    """Merge the two segmentations of one video into the final boundary list.

    Each semantic segment pairs with the structural segment of maximal
    temporal intersection-over-union.  Segments longer than the duration
    threshold (and unpaired ones) pass through verbatim; paired short
    segments average both endpoints.  Mismatched joints are repaired at their
    midpoint, except against a long segment whose boundary always wins, so
    the output tiles the span again.
    """
    segments, _ = fuse_detailed(structural, semantic, cfg)
    return segments


def preprocess_words(words: list[str] | str) -> list[str]:
    """Normalize and drop stop words; shared by distance and title handling."""
    if isinstance(words, str):
        words = words.split()
    out = []
    for w in words:
        n = normalize_word(w)
        if n and n not in STOP_WORDS:
            out.append(n)
    return out


def _directional_bound(
    weights_from: np.ndarray,
    weights_into: dict[str, float],
    vocab_from: list[str],
    cost: np.ndarray,
    same_word_col: dict[str, int],
) -> float:
    """Nearest-neighbour transport lower bound for one direction.

    Mass on a word shared with the target document may stay in place only up
    to the target's own weight; the surplus must travel at least to the
    nearest other word.  Words absent from the target send everything to
    their nearest neighbour.
    """
    total = 0.0
    for i, word in enumerate(vocab_from):
        nearest_any = cost[i].min()
        col = same_word_col.get(word)
        capacity = weights_into.get(word, 0.0)
        surplus = max(0.0, weights_from[i] - capacity)
        if col is None:
            total += weights_from[i] * nearest_any
            continue
        others = np.delete(cost[i], col)
        nearest_other = others.min() if others.size else 0.0
        total += (weights_from[i] - surplus) * nearest_any + surplus * nearest_other
    return total


def wmd(
    doc_a: list[str] | str,
    doc_b: list[str] | str,
    provider: EmbeddingProvider,
) -> float:
    """Relaxed word-mover distance between two small documents.

    Both directional nearest-neighbour transport lower bounds are computed
    over normalized bag-of-words weights and global-embedding Euclidean
    distances, and the larger one is returned.  Deterministic, solver-free,
    never above the exact transport cost, and zero exactly when the
    normalized bags coincide (given injective embeddings).
    """
    words_a = preprocess_words(doc_a)
    words_b = preprocess_words(doc_b)
    if not words_a or not words_b:
        raise ValueError("empty document after preprocessing")
    bag_a = Counter(words_a)
    bag_b = Counter(words_b)
    vocab_a = sorted(bag_a)
    vocab_b = sorted(bag_b)
    va = np.stack([np.asarray(provider.embed_global(w), dtype=float) for w in vocab_a])
    vb = np.stack([np.asarray(provider.embed_global(w), dtype=float) for w in vocab_b])
    cost = np.linalg.norm(va[:, None, :] - vb[None, :, :], axis=2)
    wa = np.array([bag_a[w] for w in vocab_a], dtype=float)
    wa /= wa.sum()
    wb = np.array([bag_b[w] for w in vocab_b], dtype=float)
    wb /= wb.sum()
    weights_a = {w: wa[i] for i, w in enumerate(vocab_a)}
    weights_b = {w: wb[j] for j, w in enumerate(vocab_b)}
    col_b = {w: j for j, w in enumerate(vocab_b)}
    col_a = {w: i for i, w in enumerate(vocab_a)}
    forward = _directional_bound(wa, weights_b, vocab_a, cost, col_b)
    backward = _directional_bound(wb, weights_a, vocab_b, cost.T, col_a)
    return max(forward, backward)


def _slide_titles_per_segment(
    segments: list[tuple[float, float]], timeline: SlideTimeline
) -> list[list[str]]:
    """Deduplicated normalized titles of the slides inside each segment.

    A slide belongs to the segment containing its interval midpoint, so no
    title is counted for two segments.
    """
    titles: list[list[str]] = [[] for _ in segments]
    for entry in timeline.entries:
        mid = (entry.start + entry.end) / 2.0
        for idx, (s, e) in enumerate(segments):
            if s <= mid < e:
                for raw in entry.titles:
                    words = preprocess_words(raw)
                    if words and words not in titles[idx]:
                        titles[idx].append(words)
                break
    return titles


def annotate(
    segments: TopicBoundaryList,
    timeline: SlideTimeline,
    syllabus: tuple[str, ...],
    provider: EmbeddingProvider,
) -> list[AnnotatedSegment]:
    """Assign each segment the syllabus name closest to its slide titles.

    Segments are processed chronologically; per segment, every remaining name
    accumulates sum(1 / (1 + wmd(name, title))) over the segment's titles, the
    best-scoring name is assigned and removed from the pool.  Segments without
    titles stay unassigned.
    """
    if not syllabus:
        raise ValueError("syllabus must not be empty")
    seg_list = list(segments.segments)
    titles = _slide_titles_per_segment(seg_list, timeline)
    pool = list(dict.fromkeys(syllabus))
    out: list[AnnotatedSegment] = []
    for (start, end), seg_titles in zip(seg_list, titles):
        if not seg_titles or not pool:
            out.append(AnnotatedSegment(start, end, None))
            continue
        best_name = None
        best_score = float("-inf")
        for name in pool:
            name_words = preprocess_words(name)
            if not name_words:
                continue
            score = 0.0
            for title_words in seg_titles:
                score += 1.0 / (1.0 + wmd(name_words, title_words, provider))
            if score > best_score:
                best_name, best_score = name, score
        if best_name is None:
            out.append(AnnotatedSegment(start, end, None))
            continue
        pool.remove(best_name)
        out.append(AnnotatedSegment(start, end, best_name))
    return out
