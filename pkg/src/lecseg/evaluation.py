"""Segmentation scoring: interval overlap, Pk, WindowDiff and boundary F1."""
from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import GroundTruth
from .segments import AnnotatedSegment


def otr(gr: tuple[float, float], sys: tuple[float, float]) -> float:
    """Overlapping time ratio of two intervals (interval Jaccard, floored at 0)."""
    (s1, e1), (s2, e2) = gr, sys
    if s1 >= e1 or s2 >= e2:
        raise ValueError("intervals must satisfy start < end")
    union = max(e1, e2) - min(s1, s2)
    if union <= 0:
        raise ValueError("zero-length union")
    overlap = min(e1, e2) - max(s1, s2)
    return max(0.0, overlap / union)


def _segment_intervals(segments) -> list[tuple[float, float]]:
    out = []
    for seg in segments:
        if isinstance(seg, AnnotatedSegment):
            out.append((seg.start, seg.end))
        elif hasattr(seg, "segments"):
            out.extend(seg.segments)
        else:
            out.append((float(seg[0]), float(seg[1])))
    return out


def match_topics(
    gt: GroundTruth, segments: list[AnnotatedSegment] | list[tuple[float, float]]
) -> list[tuple[str, float]]:
    """Per-topic overlap after matching topics to segments.

    When every segment carries a topic name, matching is by name; otherwise
    greedy one-to-one matching in descending overlap order.  Unmatched topics
    score 0.
    """
    if not gt.topics:
        raise ValueError("empty ground truth")
    named = (
        bool(segments)
        and all(isinstance(s, AnnotatedSegment) and s.topic_name for s in segments)
    )
    intervals = _segment_intervals(segments)
    if named:
        by_name: dict[str, tuple[float, float]] = {}
        for seg in segments:
            by_name.setdefault(seg.topic_name, (seg.start, seg.end))
        return [
            (t.name, otr((t.start, t.end), by_name[t.name]) if t.name in by_name else 0.0)
            for t in gt.topics
        ]
    candidates = []
    for i, t in enumerate(gt.topics):
        for j, seg in enumerate(intervals):
            candidates.append((otr((t.start, t.end), seg), i, j))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    scores = [0.0] * len(gt.topics)
    used_topics: set[int] = set()
    used_segments: set[int] = set()
    for score, i, j in candidates:
        if score <= 0.0 or i in used_topics or j in used_segments:
            continue
        scores[i] = score
        used_topics.add(i)
        used_segments.add(j)
    return [(t.name, scores[i]) for i, t in enumerate(gt.topics)]


def mean_otr(gt: GroundTruth, segments) -> float:
    """Arithmetic mean of the matched per-topic overlap ratios."""
    per_topic = match_topics(gt, segments)
    return sum(score for _, score in per_topic) / len(per_topic)


def _discretize(
    intervals: list[tuple[float, float]], span: tuple[float, float], unit: float
) -> tuple[int, list[int]]:
    """Unit count and interior boundary positions (1..N-1) on the unit grid."""
    start, end = span
    n_units = max(1, int(round((end - start) / unit)))
    positions = []
    for s, _ in intervals[1:]:
        p = int(round((s - start) / unit))
        p = min(max(p, 1), n_units - 1) if n_units > 1 else 0
        if p >= 1 and (not positions or p != positions[-1]):
            positions.append(p)
    return n_units, positions


def _boundary_inputs(ref, hyp, unit: float):
    ref_intervals = _segment_intervals(ref)
    hyp_intervals = _segment_intervals(hyp)
    if not ref_intervals or not hyp_intervals:
        raise ValueError("need at least one segment on each side")
    # both sides share one grid spanning the hull of the two segmentations
    span = (
        min(ref_intervals[0][0], hyp_intervals[0][0]),
        max(ref_intervals[-1][1], hyp_intervals[-1][1]),
    )
    n_units, ref_pos = _discretize(ref_intervals, span, unit)
    _, hyp_pos = _discretize(hyp_intervals, span, unit)
    return n_units, ref_pos, hyp_pos, len(ref_intervals)


def _default_k(n_units: int, n_ref_segments: int) -> int:
    # half the mean reference segment length in units, rounded
    return max(1, int(round(n_units / (2.0 * n_ref_segments))))


def _segment_ids(n_units: int, positions: list[int]) -> list[int]:
    ids = [0] * n_units
    seg = 0
    pos = set(positions)
    for u in range(1, n_units):
        if u in pos:
            seg += 1
        ids[u] = seg
    return ids


def pk(ref, hyp, unit: float = 1.0, k: int | None = None) -> float:
    """Probability that two positions k apart are segmented inconsistently.

    Both segmentations are discretized to `unit`-second positions; every probe
    pair (i, i + k) votes on whether the two positions fall in the same
    segment, and the score is the fraction of probes where reference and
    hypothesis disagree.
    """
    n_units, ref_pos, hyp_pos, n_ref = _boundary_inputs(ref, hyp, unit)
    if k is None:
        k = _default_k(n_units, n_ref)
    if k < 1 or k >= n_units:
        raise ValueError(f"window k={k} does not fit a span of {n_units} units")
    ref_ids = _segment_ids(n_units, ref_pos)
    hyp_ids = _segment_ids(n_units, hyp_pos)
    disagreements = 0
    probes = n_units - k
    for i in range(probes):
        ref_same = ref_ids[i] == ref_ids[i + k]
        hyp_same = hyp_ids[i] == hyp_ids[i + k]
        if ref_same != hyp_same:
            disagreements += 1
    return disagreements / probes


def window_diff(ref, hyp, unit: float = 1.0, k: int | None = None) -> float:
    """Fraction of width-k windows whose boundary counts differ."""
    n_units, ref_pos, hyp_pos, n_ref = _boundary_inputs(ref, hyp, unit)
    if k is None:
        k = _default_k(n_units, n_ref)
    if k < 1 or k >= n_units:
        raise ValueError(f"window k={k} does not fit a span of {n_units} units")
    ref_set = sorted(ref_pos)
    hyp_set = sorted(hyp_pos)

    def count_in(positions: list[int], lo: int, hi: int) -> int:
        # boundaries p with lo < p <= hi
        return sum(1 for p in positions if lo < p <= hi)

    diffs = 0
    windows = n_units - k
    for i in range(windows):
        if count_in(ref_set, i, i + k) != count_in(hyp_set, i, i + k):
            diffs += 1
    return diffs / windows


def boundary_f1(
    ref_boundaries: list[float],
    hyp_boundaries: list[float],
    tolerance: float = 30.0,
) -> tuple[float, float, float]:
    """Precision/recall/F1 of boundary times under a matching tolerance.

    A hypothesis boundary is a true positive when it lies within `tolerance`
    seconds of a still-unmatched reference boundary; matching is greedy by
    ascending distance and one-to-one.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    ref = sorted(ref_boundaries)
    hyp = sorted(hyp_boundaries)
    if not ref and not hyp:
        return 1.0, 1.0, 1.0
    pairs = sorted(
        (abs(r - h), i, j) for i, r in enumerate(ref) for j, h in enumerate(hyp)
    )
    used_ref: set[int] = set()
    used_hyp: set[int] = set()
    tp = 0
    for dist, i, j in pairs:
        if dist > tolerance:
            break
        if i in used_ref or j in used_hyp:
            continue
        used_ref.add(i)
        used_hyp.add(j)
        tp += 1
    precision = tp / len(hyp) if hyp else 0.0
    recall = tp / len(ref) if ref else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class EvalReport:
    mean_otr: float
    pk: float
    window_diff: float
    precision: float
    recall: float
    f1: float
    per_topic: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "mean_otr": self.mean_otr,
            "pk": self.pk,
            "window_diff": self.window_diff,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_topic": [{"topic": name, "otr": score} for name, score in self.per_topic],
        }


def evaluate(
    gt: GroundTruth,
    segments,
    unit: float = 1.0,
    k: int | None = None,
    tolerance: float = 30.0,
) -> EvalReport:
    """Full report of one system segmentation against the ground truth."""
    per_topic = match_topics(gt, segments)
    gt_intervals = [(t.start, t.end) for t in gt.topics]
    sys_intervals = _segment_intervals(segments)
    score_pk = pk(gt_intervals, sys_intervals, unit=unit, k=k)
    score_wd = window_diff(gt_intervals, sys_intervals, unit=unit, k=k)
    ref_b = [s for s, _ in gt_intervals[1:]]
    hyp_b = [s for s, _ in sys_intervals[1:]]
    precision, recall, f1 = boundary_f1(ref_b, hyp_b, tolerance)
    return EvalReport(
        mean_otr=sum(s for _, s in per_topic) / len(per_topic),
        pk=score_pk,
        window_diff=score_wd,
        precision=precision,
        recall=recall,
        f1=f1,
        per_topic=tuple(per_topic),
    )
