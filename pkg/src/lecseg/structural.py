"""Sentence-window segmentation of the transcript.

The transcript is cut into fixed-length pseudo-sentences, each sentence gets
an encoding vector, and a scorer decides per sentence whether it begins a new
segment.  Two scorers ship: a deterministic depth-valley baseline, and a
weights-file path that composes attention contexts, relation features and a
logistic head (the math of a trained classifier without the training).
Boundary sentences map back to video time through the transcript anchors.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import InputError, TimedTranscript
from .embedding import EmbeddingProvider, cosine
from .segments import TopicBoundaryList


@dataclass(frozen=True)
class SentenceSequence:
    """Fixed-length token windows with their start indices and encodings."""

    sentences: tuple[tuple[str, ...], ...]
    start_indices: tuple[int, ...]
    encodings: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.sentences)

    def with_encodings(self, encodings: np.ndarray) -> "SentenceSequence":
        encodings = np.asarray(encodings, dtype=float)
        if encodings.ndim != 2 or encodings.shape[0] != len(self.sentences):
            raise ValueError(
                f"need one encoding per sentence: got {encodings.shape} for {len(self)} sentences"
            )
        return SentenceSequence(self.sentences, self.start_indices, encodings)


def window_sentences(transcript: TimedTranscript, length: int = 20) -> SentenceSequence:
    """Cut tokens into consecutive windows of `length`; the last may be short."""
    if length < 1:
        raise ValueError("sentence length must be >= 1")
    tokens = transcript.tokens
    sentences = []
    starts = []
    for i in range(0, len(tokens), length):
        sentences.append(tuple(tokens[i : i + length]))
        starts.append(i)
    return SentenceSequence(tuple(sentences), tuple(starts))


def encode_sentences(sequence: SentenceSequence, provider: EmbeddingProvider) -> SentenceSequence:
    """Attach provider encodings (whole sentence as the target span)."""
    vectors = [
        provider.embed_in_context(list(s), (0, len(s))) for s in sequence.sentences
    ]
    return sequence.with_encodings(np.stack(vectors))


def load_sentence_encodings(path: str | Path, count: int) -> np.ndarray:
    """Read sentence vectors from a JSON Lines file keyed by sentence index."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    vectors: dict[int, np.ndarray] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if "key" not in obj or "vector" not in obj:
            continue
        vectors[int(obj["key"])] = np.asarray(obj["vector"], dtype=float)
    missing = [i for i in range(count) if i not in vectors]
    if missing:
        raise InputError(f"{path}: missing encodings for sentences {missing[:5]}...")
    return np.stack([vectors[i] for i in range(count)])


@dataclass(frozen=True)
class AttentionParams:
    """Learned context-composition parameters: e = H W + b, score = tanh(e) . Zs."""

    W: np.ndarray  # (d, m)
    b: np.ndarray  # (K,) with m == 1, or (m,)
    Zs: np.ndarray  # (m,)

    def __post_init__(self) -> None:
        for name, arr in (("W", self.W), ("b", self.b), ("Zs", self.Zs)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"attention parameter {name} has non-finite entries")

    @classmethod
    def from_dict(cls, data: Mapping) -> "AttentionParams":
        return cls(
            W=np.asarray(data["W"], dtype=float),
            b=np.asarray(data["b"], dtype=float),
            Zs=np.asarray(data["Zs"], dtype=float),
        )


def attention_compose(
    H: np.ndarray, params: AttentionParams, return_weights: bool = False
):
    """Soft-attention context vector over the rows of H.

    e = H W + b, a_i = exp(tanh(e_i . Zs)), alpha = a / sum(a), v = sum alpha_i H_i.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2:
        raise ValueError("H must be a K x d matrix")
    k, d = H.shape
    W = params.W if params.W.ndim == 2 else params.W.reshape(-1, 1)
    if W.shape[0] != d:
        raise ValueError(f"W rows ({W.shape[0]}) must match encoding dimension ({d})")
    m = W.shape[1]
    b = params.b
    if b.ndim == 1 and b.size == k and m == 1:
        b = b.reshape(k, 1)
    e = H @ W + b
    if e.shape != (k, m):
        raise ValueError(f"bias shape {params.b.shape} incompatible with ({k}, {m})")
    if params.Zs.size != m:
        raise ValueError(f"Zs must have {m} entries, got {params.Zs.size}")
    scores = np.tanh(e @ params.Zs.reshape(m))
    a = np.exp(scores)
    alpha = a / a.sum()
    v = alpha @ H
    if return_weights:
        return v, alpha
    return v


def relation_features(c_left: np.ndarray, middle: np.ndarray, c_right: np.ndarray) -> np.ndarray:
    """Concatenate the three context vectors and their pairwise products (6d)."""
    c_left = np.asarray(c_left, dtype=float)
    middle = np.asarray(middle, dtype=float)
    c_right = np.asarray(c_right, dtype=float)
    if not (c_left.shape == middle.shape == c_right.shape) or c_left.ndim != 1:
        raise ValueError("relation_features needs three equal-length vectors")
    return np.concatenate(
        [c_left, middle, c_right, c_left * middle, middle * c_right, c_right * c_left]
    )


def weighted_bce(
    targets: Sequence[float],
    probs: Sequence[float],
    class_weights: Mapping[int, float] | Sequence[float],
) -> float:
    """Class-weighted binary cross entropy averaged over samples.

    Probabilities are clamped to [1e-12, 1 - 1e-12] before the logs; each
    sample's weight is looked up by its class label.
    """
    t = np.asarray(targets, dtype=float)
    o = np.asarray(probs, dtype=float)
    if t.shape != o.shape or t.ndim != 1 or t.size == 0:
        raise ValueError("targets and probs must be equal-length non-empty vectors")
    w0, w1 = float(class_weights[0]), float(class_weights[1])
    if w0 <= 0 or w1 <= 0:
        raise ValueError("class weights must be positive")
    eps = 1e-12
    o = np.clip(o, eps, 1.0 - eps)
    w = np.where(t > 0.5, w1, w0)
    per_sample = w * (t * np.log(o) + (1.0 - t) * np.log(1.0 - o))
    return float(-per_sample.mean())


def map_token_time(transcript: TimedTranscript, token_index: int) -> float:
    """Video time of a token, interpolated between its surrounding anchors."""
    return transcript.time_at(token_index)


class DepthBoundaryScorer:
    """Deterministic boundary scorer built on encoding-similarity valleys.

    A sentence scores high when it is much closer to its K right neighbours
    than to its K left ones.  Sentences that are strict local maxima of that
    depth and exceed mean + `sigma_factor` * stddev come out above the 0.5
    decision threshold; everything else stays below it.
    """

    def __init__(self, sigma_factor: float = 0.5):
        self.sigma_factor = sigma_factor

    def score_sequence(self, sequence: SentenceSequence, context: int = 10) -> np.ndarray:
        if sequence.encodings is None:
            raise ValueError("sequence has no encodings")
        enc = sequence.encodings
        n = len(sequence)
        probs = np.zeros(n)
        if n < 2 * context + 1:
            return probs
        depth = np.full(n, -np.inf)
        for i in range(1, n - 1):
            left = range(max(0, i - context), i)
            right = range(i + 1, min(n, i + 1 + context))
            left_sim = sum(cosine(enc[j], enc[i]) for j in left) / len(left)
            right_sim = sum(cosine(enc[i], enc[j]) for j in right) / len(right)
            depth[i] = right_sim - left_sim
        interior = depth[1 : n - 1]
        norm = (interior + 2.0) / 4.0  # raw depth lies in [-2, 2]
        threshold = norm.mean() + self.sigma_factor * norm.std()
        for i in range(1, n - 1):
            d = (depth[i] + 2.0) / 4.0
            left_d = depth[i - 1] if i - 1 >= 1 else -np.inf
            right_d = depth[i + 1] if i + 1 <= n - 2 else -np.inf
            is_peak = depth[i] > left_d and depth[i] > right_d
            if is_peak and d > threshold:
                probs[i] = 0.5 + 0.5 * min(1.0, max(0.0, d))
            else:
                probs[i] = 0.5 * min(1.0, max(0.0, d))
        return probs


def baseline_scorer(sequence: SentenceSequence, context: int = 10) -> np.ndarray:
    """Per-sentence boundary probabilities from the depth-valley baseline."""
    return DepthBoundaryScorer().score_sequence(sequence, context)


class LogisticBoundaryScorer:
    """Attention + relation features + affine-logistic head, loaded from a file.

    File shape: {"W": [[...]], "b": [...], "Zs": [...], "head_w": [...],
    "head_b": x}.  `score` fulfils the boundary-scorer contract (features in,
    probability out); `score_sequence` builds the features per sentence with
    zero-padded K-sentence contexts.
    """

    def __init__(self, attention: AttentionParams, head_w: np.ndarray, head_b: float):
        self.attention = attention
        self.head_w = np.asarray(head_w, dtype=float)
        self.head_b = float(head_b)

    @classmethod
    def from_file(cls, path: str | Path) -> "LogisticBoundaryScorer":
        path = Path(path)
        if not path.exists():
            raise InputError(f"no such file: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return cls(
                AttentionParams.from_dict(data),
                np.asarray(data["head_w"], dtype=float),
                float(data["head_b"]),
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: bad classifier weights file ({exc})") from exc

    def score(self, features: np.ndarray) -> float:
        features = np.asarray(features, dtype=float)
        if features.shape != self.head_w.shape:
            raise ValueError(
                f"feature dimension {features.shape} != head dimension {self.head_w.shape}"
            )
        z = float(self.head_w @ features) + self.head_b
        return 1.0 / (1.0 + math.exp(-z))

    def _context(self, enc: np.ndarray, lo: int, hi: int, k: int, pad_left: bool) -> np.ndarray:
        rows = enc[max(0, lo) : hi]
        if len(rows) == k:
            return rows
        pad = np.zeros((k - len(rows), enc.shape[1]))
        return np.vstack([pad, rows]) if pad_left else np.vstack([rows, pad])

    def score_sequence(self, sequence: SentenceSequence, context: int = 10) -> np.ndarray:
        if sequence.encodings is None:
            raise ValueError("sequence has no encodings")
        enc = sequence.encodings
        n = len(sequence)
        probs = np.zeros(n)
        for i in range(n):
            h_left = self._context(enc, i - context, i, context, pad_left=True)
            h_right = self._context(enc, i + 1, i + 1 + context, context, pad_left=False)
            c_l = attention_compose(h_left, self.attention)
            c_r = attention_compose(h_right, self.attention)
            probs[i] = self.score(relation_features(c_l, enc[i], c_r))
        return probs


def structural_segments(
    transcript: TimedTranscript,
    scorer: DepthBoundaryScorer | LogisticBoundaryScorer | None = None,
    context: int = 10,
    sentence_length: int = 20,
    provider: EmbeddingProvider | None = None,
    encodings: np.ndarray | None = None,
    threshold: float = 0.5,
) -> TopicBoundaryList:
    """Segment the video by classifying sentence windows as boundaries.

    Sentences scoring above `threshold` map to the video time of their first
    token; together with the video start and end these times tile the video.
    """
    sequence = window_sentences(transcript, sentence_length)
    if encodings is not None:
        sequence = sequence.with_encodings(encodings)
    elif provider is not None:
        sequence = encode_sentences(sequence, provider)
    else:
        raise ValueError("structural segmentation needs sentence encodings or a provider")
    if scorer is None:
        scorer = DepthBoundaryScorer()
    probs = scorer.score_sequence(sequence, context)
    duration = transcript.duration
    times = [0.0]
    for i, p in enumerate(probs):
        if p > threshold:
            t = map_token_time(transcript, sequence.start_indices[i])
            if 0.0 < t < duration:
                times.append(t)
    times.append(duration)
    stamps = sorted(set(times))
    return TopicBoundaryList(tuple(zip(stamps[:-1], stamps[1:])))
