"""Contextual-similarity edge weights between concept pairs.

Every concept pair that appears in a transcript receives one score: the mean
cosine similarity of the two concepts' in-context embeddings over all their
co-occurrences, or the cosine of their global embeddings when they never
co-occur.  Embedding vectors come from a pluggable provider; a deterministic
PPMI co-occurrence provider is built in so the pipeline runs without any
pretrained model.
"""
from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence, runtime_checkable

import numpy as np

from .corpus import InputError, TimedTranscript, normalize_word


class ProviderError(RuntimeError):
    """An embedding provider failed to produce a vector."""


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Contract: deterministic fixed-dimension vectors for words in and out of context."""

    dimension: int

    def embed_in_context(self, chunk: Sequence[str], target_span: tuple[int, int]) -> np.ndarray:
        ...

    def embed_global(self, concept: str) -> np.ndarray:
        ...


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; 0.0 for a degenerate all-zero vector."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(min(1.0, max(-1.0, float(u @ v) / (nu * nv))))


def pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass
class SimilarityDictionary:
    """Symmetric concept-pair -> similarity map (scores kept unclamped)."""

    scores: dict[tuple[str, str], float] = field(default_factory=dict)

    def set(self, a: str, b: str, score: float) -> None:
        if not np.isfinite(score):
            raise ValueError(f"non-finite similarity for ({a!r}, {b!r})")
        self.scores[pair_key(a, b)] = float(score)

    def get(self, a: str, b: str, default: float = 0.0) -> float:
        return self.scores.get(pair_key(a, b), default)

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair_key(*pair) in self.scores

    def __len__(self) -> int:
        return len(self.scores)

    def items(self) -> list[tuple[tuple[str, str], float]]:
        return sorted(self.scores.items())

    def save_tsv(self, path: str | Path) -> None:
        lines = [f"{a}\t{b}\t{score:.12g}" for (a, b), score in self.items()]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

    @classmethod
    def load_tsv(cls, path: str | Path) -> "SimilarityDictionary":
        path = Path(path)
        if not path.exists():
            raise InputError(f"no such file: {path}")
        out = cls()
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise InputError(f"{path}:{lineno}: expected 'a<TAB>b<TAB>score'")
            try:
                out.set(parts[0], parts[1], float(parts[2]))
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
        return out


@dataclass(frozen=True)
class MentionSpan:
    concept: str
    start: int
    length: int

    @property
    def end(self) -> int:
        return self.start + self.length


def _mention_spans(mentions: Iterable[tuple[str, int]]) -> dict[str, list[MentionSpan]]:
    spans: dict[str, list[MentionSpan]] = {}
    for concept, index in mentions:
        spans.setdefault(concept, []).append(
            MentionSpan(concept, index, max(1, len(concept.split())))
        )
    for lst in spans.values():
        lst.sort(key=lambda m: m.start)
    return spans


def co_occurrence_chunk(
    tokens: Sequence[str], a: MentionSpan, b: MentionSpan, margin: int = 10
) -> tuple[list[str], tuple[int, int], tuple[int, int]]:
    """Minimal token span covering both mentions plus `margin` tokens each side.

    Returns (chunk tokens, span of `a` in the chunk, span of `b` in the chunk).
    """
    lo = max(0, min(a.start, b.start) - margin)
    hi = min(len(tokens), max(a.end, b.end) + margin)
    chunk = list(tokens[lo:hi])
    return chunk, (a.start - lo, a.end - lo), (b.start - lo, b.end - lo)


def build_similarity_dictionary(
    transcript: TimedTranscript,
    mentions: Sequence[tuple[str, int]],
    provider: EmbeddingProvider,
    window: int = 100,
    margin: int = 10,
) -> SimilarityDictionary:
    """Score every concept pair present in the transcript.

    A co-occurrence is a pair of mentions whose start indices are within
    `window` tokens.  Pairs with at least one co-occurrence average the cosine
    of the two in-context embeddings over all of them; pairs without any fall
    back to the cosine of the global embeddings.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    tokens = transcript.tokens
    spans = _mention_spans(mentions)
    concepts = sorted(spans)
    out = SimilarityDictionary()
    for i, a in enumerate(concepts):
        for b in concepts[i + 1 :]:
            cooc = [
                (ma, mb)
                for ma in spans[a]
                for mb in spans[b]
                if abs(ma.start - mb.start) <= window
            ]
            try:
                if cooc:
                    sims = []
                    for ma, mb in cooc:
                        chunk, span_a, span_b = co_occurrence_chunk(tokens, ma, mb, margin)
                        va = provider.embed_in_context(chunk, span_a)
                        vb = provider.embed_in_context(chunk, span_b)
                        sims.append(cosine(va, vb))
                    # canonical summation order keeps the mean independent of
                    # how co-occurrences were enumerated
                    score = sum(sorted(sims)) / len(sims)
                else:
                    score = cosine(provider.embed_global(a), provider.embed_global(b))
            except ProviderError:
                raise
            except Exception as exc:
                raise ProviderError(f"provider failed for pair ({a!r}, {b!r}): {exc}") from exc
            out.set(a, b, score)
    return out


class PpmiEmbedder:
    """Deterministic embedding provider from transcript co-occurrence statistics.

    One positive-PMI vector per normalized token over a symmetric 10-token
    window; the feature space is the vocabulary itself, hashed down to at most
    `max_features` columns.  In-context embeddings average the vectors of the
    target-span tokens, global embeddings average over a concept's words.
    """

    window = 10

    def __init__(self, corpus: Sequence[str] | TimedTranscript, max_features: int = 1024):
        if isinstance(corpus, TimedTranscript):
            tokens = corpus.tokens
        else:
            tokens = tuple(corpus)
        norm = [normalize_word(t) for t in tokens]
        norm = [w for w in norm if w]
        if not norm:
            raise ValueError("empty corpus")
        vocab = sorted(set(norm))
        self._row = {w: i for i, w in enumerate(vocab)}
        if len(vocab) <= max_features:
            self.dimension = len(vocab)
            col = {w: i for i, w in enumerate(vocab)}
            feat = np.array([col[w] for w in norm], dtype=np.intp)
        else:
            self.dimension = max_features
            feat = np.array(
                [zlib.crc32(w.encode("utf-8")) % max_features for w in norm], dtype=np.intp
            )
        rows = np.array([self._row[w] for w in norm], dtype=np.intp)
        counts = np.zeros((len(vocab), self.dimension), dtype=np.float64)
        for off in range(1, self.window + 1):
            if off >= len(norm):
                break
            np.add.at(counts, (rows[:-off], feat[off:]), 1.0)
            np.add.at(counts, (rows[off:], feat[:-off]), 1.0)
        self._vectors = self._ppmi(counts)

    @staticmethod
    def _ppmi(counts: np.ndarray) -> np.ndarray:
        total = counts.sum()
        if total == 0:
            return counts
        row_p = counts.sum(axis=1, keepdims=True) / total
        col_p = counts.sum(axis=0, keepdims=True) / total
        expected = row_p @ col_p
        with np.errstate(divide="ignore", invalid="ignore"):
            pmi = np.log((counts / total) / expected)
        pmi[~np.isfinite(pmi)] = 0.0
        np.maximum(pmi, 0.0, out=pmi)
        return pmi

    def _vector(self, word: str) -> np.ndarray:
        idx = self._row.get(normalize_word(word))
        if idx is None:
            return np.zeros(self.dimension)
        return self._vectors[idx]

    def embed_in_context(self, chunk: Sequence[str], target_span: tuple[int, int]) -> np.ndarray:
        lo, hi = target_span
        if not (0 <= lo < hi <= len(chunk)):
            raise ValueError(f"target span {target_span} outside chunk of {len(chunk)} tokens")
        return np.mean([self._vector(w) for w in chunk[lo:hi]], axis=0)

    def embed_global(self, concept: str) -> np.ndarray:
        words = concept.split()
        if not words:
            return np.zeros(self.dimension)
        return np.mean([self._vector(w) for w in words], axis=0)


def fallback_embedder(
    corpus: Sequence[str] | TimedTranscript, max_features: int = 1024
) -> PpmiEmbedder:
    """Build the deterministic PPMI provider used when no model vectors exist."""
    return PpmiEmbedder(corpus, max_features=max_features)


def context_key(chunk: Sequence[str], target_span: tuple[int, int]) -> str:
    """Stable lookup key for a chunk/span pair in an embedding file."""
    digest = hashlib.sha1(
        (" ".join(chunk) + "\x1f" + f"{target_span[0]}:{target_span[1]}").encode("utf-8")
    ).hexdigest()
    return f"ctx:{digest}"


class FileVectorProvider:
    """Provider backed by a JSON Lines file of {"key": ..., "vector": [...]}.

    Lines without a key/vector pair (e.g. a {"dimension": d} header) are
    skipped.  In-context lookups use `context_key`, global lookups use the
    concept itself.
    """

    def __init__(self, path: str | Path):
        path = Path(path)
        if not path.exists():
            raise InputError(f"no such file: {path}")
        self._vectors: dict[str, np.ndarray] = {}
        self.dimension = 0
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: not valid JSON ({exc})") from exc
            if "key" not in obj or "vector" not in obj:
                continue
            vec = np.asarray(obj["vector"], dtype=np.float64)
            if vec.ndim != 1 or vec.size == 0:
                raise InputError(f"{path}:{lineno}: vector must be a non-empty flat list")
            if self.dimension == 0:
                self.dimension = int(vec.size)
            elif vec.size != self.dimension:
                raise InputError(
                    f"{path}:{lineno}: vector dimension {vec.size} != {self.dimension}"
                )
            self._vectors[str(obj["key"])] = vec
        if not self._vectors:
            raise InputError(f"{path}: no vectors found")

    def _lookup(self, key: str) -> np.ndarray:
        try:
            return self._vectors[key]
        except KeyError:
            raise ProviderError(f"no vector for key {key!r}") from None

    def embed_in_context(self, chunk: Sequence[str], target_span: tuple[int, int]) -> np.ndarray:
        return self._lookup(context_key(chunk, target_span))

    def embed_global(self, concept: str) -> np.ndarray:
        return self._lookup(concept)


def iter_embedding_requests(
    transcript: TimedTranscript,
    mentions: Sequence[tuple[str, int]],
    window: int = 100,
    margin: int = 10,
) -> list[dict]:
    """Enumerate every vector the dictionary builder will ask a provider for.

    Each request is {"key", "tokens", "span"}; global-concept requests carry a
    null span.  Feeding the resulting file through any extraction tool yields
    an embedding file `FileVectorProvider` can serve.
    """
    tokens = transcript.tokens
    spans = _mention_spans(mentions)
    concepts = sorted(spans)
    requests: dict[str, dict] = {}
    for concept in concepts:
        requests[concept] = {"key": concept, "tokens": concept.split(), "span": None}
    for i, a in enumerate(concepts):
        for b in concepts[i + 1 :]:
            for ma in spans[a]:
                for mb in spans[b]:
                    if abs(ma.start - mb.start) > window:
                        continue
                    chunk, span_a, span_b = co_occurrence_chunk(tokens, ma, mb, margin)
                    for span in (span_a, span_b):
                        key = context_key(chunk, span)
                        if key not in requests:
                            requests[key] = {
                                "key": key,
                                "tokens": chunk,
                                "span": list(span),
                            }
    return list(requests.values())


def write_embedding_requests(path: str | Path, requests: Sequence[dict]) -> None:
    lines = [json.dumps(req, sort_keys=True) for req in requests]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
