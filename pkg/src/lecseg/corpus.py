"""Domain types and file ingestion for the segmentation pipeline.

Inputs are plain files: a token/anchor transcript (JSON), a slide timeline
(JSON), a concept lexicon (JSON list), a knowledge-graph edge list (TSV) and
syllabus / ground-truth files (JSON).  Everything loaded here is immutable and
validated up front; all time values are float seconds from video start.
"""
from __future__ import annotations

import json
import string
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class InputError(ValueError):
    """A file is missing, malformed, or violates a documented invariant."""


_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_SUFFIXES = ("ing", "es", "s")


def normalize_word(word: str) -> str:
    """Canonical matching form: lower-case, punctuation-free, suffix-stripped.

    Suffixes "-ing", "-es", "-s" are removed only when the remaining stem has
    at least 4 characters, so "string" and "is" survive untouched.
    """
    w = word.lower().translate(_PUNCT_TABLE)
    for suffix in _SUFFIXES:
        if w.endswith(suffix) and len(w) - len(suffix) >= 4:
            return w[: -len(suffix)]
    return w


def normalize_phrase(phrase: str) -> tuple[str, ...]:
    """Whitespace-tokenize a phrase and normalize each word (empties dropped)."""
    return tuple(w for w in (normalize_word(p) for p in phrase.split()) if w)


def _read_json(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc


@dataclass(frozen=True)
class TimedTranscript:
    """Word-token stream interleaved with sparse (token_index, seconds) anchors.

    Anchors must be strictly increasing in both fields.  Token times between
    anchors are linearly interpolated; tokens beyond the last anchor follow
    the last inter-anchor rate, tokens before the first anchor extrapolate
    backwards (clamped at 0).
    """

    tokens: tuple[str, ...]
    anchors: tuple[tuple[int, float], ...]
    explicit_duration: float | None = None
    _anchor_indices: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.tokens:
            raise InputError("empty transcript")
        if not self.anchors:
            raise InputError("transcript has no time anchors")
        prev_i, prev_t = None, None
        for i, t in self.anchors:
            if not (0 <= i < len(self.tokens)):
                raise InputError(f"anchor token_index {i} out of range")
            if prev_i is not None and (i <= prev_i or t <= prev_t):
                raise InputError("anchors must be strictly increasing in index and time")
            prev_i, prev_t = i, t
        object.__setattr__(self, "_anchor_indices", tuple(i for i, _ in self.anchors))
        if self.explicit_duration is not None:
            if self.explicit_duration <= self.time_at(len(self.tokens) - 1):
                raise InputError("duration does not cover the final token")

    def _rate(self, left: int) -> float:
        # seconds per token around anchor pair (left, left + 1); 1.0 if only one anchor
        if len(self.anchors) < 2:
            return 1.0
        left = min(max(left, 0), len(self.anchors) - 2)
        (i0, t0), (i1, t1) = self.anchors[left], self.anchors[left + 1]
        return (t1 - t0) / (i1 - i0)

    def time_at(self, token_index: int) -> float:
        """Video time of a token; index len(tokens) addresses the virtual end."""
        if not (0 <= token_index <= len(self.tokens)):
            raise IndexError(f"token index {token_index} out of range")
        pos = bisect_right(self._anchor_indices, token_index) - 1
        if pos < 0:
            i0, t0 = self.anchors[0]
            return max(0.0, t0 - (i0 - token_index) * self._rate(0))
        i_s, t_s = self.anchors[pos]
        if i_s == token_index:
            return t_s
        if pos + 1 < len(self.anchors):
            i_e, t_e = self.anchors[pos + 1]
            return t_s + (t_e - t_s) / (i_e - i_s) * (token_index - i_s)
        return t_s + (token_index - i_s) * self._rate(len(self.anchors) - 2)

    @property
    def duration(self) -> float:
        if self.explicit_duration is not None:
            return self.explicit_duration
        return self.time_at(len(self.tokens))


def load_transcript(path: str | Path) -> TimedTranscript:
    """Load and validate a transcript JSON file.

    Expected shape: {"tokens": [str, ...], "anchors": [[index, seconds], ...]}
    with an optional "duration" (seconds) key.
    """
    data = _read_json(path)
    if not isinstance(data, dict) or "tokens" not in data or "anchors" not in data:
        raise InputError(f"{path}: transcript needs 'tokens' and 'anchors'")
    tokens = data["tokens"]
    anchors = data["anchors"]
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise InputError(f"{path}: 'tokens' must be a list of strings")
    try:
        anchor_pairs = tuple((int(i), float(t)) for i, t in anchors)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: 'anchors' must be [index, seconds] pairs") from exc
    duration = data.get("duration")
    return TimedTranscript(
        tokens=tuple(tokens),
        anchors=anchor_pairs,
        explicit_duration=float(duration) if duration is not None else None,
    )


def slice_range(transcript: TimedTranscript, start: float, end: float) -> tuple[int, int]:
    """Token index range [i0, i1) whose interpolated times fall in [start, end)."""
    if start < 0 or start >= end:
        raise ValueError("require 0 <= start < end")
    n = len(transcript.tokens)
    i0 = bisect_left(range(n), start, key=transcript.time_at)
    i1 = bisect_left(range(n), end, key=transcript.time_at)
    return i0, i1


def slice_transcript(transcript: TimedTranscript, start: float, end: float) -> list[str]:
    """Tokens whose interpolated time lies in [start, end)."""
    i0, i1 = slice_range(transcript, start, end)
    return list(transcript.tokens[i0:i1])


@dataclass(frozen=True)
class ConceptLexicon:
    """Set of lower-cased concept phrases (graph node names)."""

    concepts: frozenset[str]

    def __post_init__(self) -> None:
        canon = {}
        for phrase in self.concepts:
            key = " ".join(phrase.lower().split())
            if not key:
                raise InputError("lexicon contains an empty phrase")
            if key in canon and canon[key] != phrase:
                raise InputError(f"duplicate lexicon phrase: {key!r}")
            canon[key] = phrase

    @classmethod
    def from_phrases(cls, phrases: Iterable[str]) -> "ConceptLexicon":
        return cls(frozenset(" ".join(p.lower().split()) for p in phrases))


def load_lexicon(path: str | Path) -> ConceptLexicon:
    """Load a lexicon file: a JSON list of concept phrases."""
    data = _read_json(path)
    if not isinstance(data, list) or not all(isinstance(p, str) for p in data):
        raise InputError(f"{path}: lexicon must be a JSON list of strings")
    if not data:
        raise InputError(f"{path}: empty lexicon")
    return ConceptLexicon.from_phrases(data)


def find_concept_mentions(
    tokens_or_transcript: TimedTranscript | Sequence[str],
    lexicon: ConceptLexicon,
) -> list[tuple[str, int]]:
    """Locate every lexicon phrase occurrence in a token stream.

    Matching is case-insensitive on normalized words, longest-match-first,
    left-to-right and non-overlapping; each mention is reported as
    (concept, index of its first token), sorted by index.
    """
    if isinstance(tokens_or_transcript, TimedTranscript):
        tokens = tokens_or_transcript.tokens
    else:
        tokens = tuple(tokens_or_transcript)
    norm = [normalize_word(t) for t in tokens]

    by_first: dict[str, list[tuple[tuple[str, ...], str]]] = {}
    for concept in sorted(lexicon.concepts):
        words = normalize_phrase(concept)
        if not words:
            continue
        by_first.setdefault(words[0], []).append((words, concept))
    for candidates in by_first.values():
        candidates.sort(key=lambda item: (-len(item[0]), item[1]))

    mentions: list[tuple[str, int]] = []
    i = 0
    while i < len(norm):
        matched = False
        for words, concept in by_first.get(norm[i], ()):
            j = i + len(words)
            if j <= len(norm) and tuple(norm[i:j]) == words:
                mentions.append((concept, i))
                i = j
                matched = True
                break
        if not matched:
            i += 1
    return mentions


@dataclass(frozen=True)
class KnowledgeGraph:
    """Undirected concept connectivity; direction information is discarded."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]  # each edge stored as a sorted pair

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if a == b:
                raise InputError(f"self-loop on {a!r}")
            if a not in self.nodes or b not in self.nodes:
                raise InputError(f"edge endpoint missing from nodes: ({a!r}, {b!r})")

    @classmethod
    def from_edges(cls, pairs: Iterable[tuple[str, str]]) -> "KnowledgeGraph":
        edges = set()
        nodes = set()
        for a, b in pairs:
            a, b = a.lower().strip(), b.lower().strip()
            if a == b:
                continue  # direction removal can surface self-loops; drop them
            edges.add((a, b) if a <= b else (b, a))
            nodes.update((a, b))
        return cls(frozenset(nodes), frozenset(edges))

    def has_edge(self, a: str, b: str) -> bool:
        return ((a, b) if a <= b else (b, a)) in self.edges

    def neighbors(self, node: str) -> set[str]:
        out = set()
        for a, b in self.edges:
            if a == node:
                out.add(b)
            elif b == node:
                out.add(a)
        return out


def load_knowledge_graph(path: str | Path) -> KnowledgeGraph:
    """Load a TSV edge list: one "conceptA<TAB>conceptB" per line, '#' comments."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    pairs = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise InputError(f"{path}:{lineno}: expected 'conceptA<TAB>conceptB'")
        pairs.append((parts[0], parts[1]))
    return KnowledgeGraph.from_edges(pairs)


@dataclass(frozen=True)
class SlideEntry:
    slide_id: str
    start: float
    end: float
    titles: tuple[str, ...] = ()


@dataclass(frozen=True)
class SlideTimeline:
    """Non-overlapping, sorted on-screen intervals of the unique slides."""

    entries: tuple[SlideEntry, ...]

    def __post_init__(self) -> None:
        seen = set()
        prev_end = None
        for e in self.entries:
            if e.start >= e.end:
                raise InputError(f"slide {e.slide_id!r}: start must precede end")
            if prev_end is not None and e.start < prev_end:
                raise InputError(f"slide {e.slide_id!r}: overlaps previous entry")
            if e.slide_id in seen:
                raise InputError(f"duplicate slide_id {e.slide_id!r}")
            seen.add(e.slide_id)
            prev_end = e.end

    @property
    def span(self) -> tuple[float, float]:
        return self.entries[0].start, self.entries[-1].end


def load_slide_timeline(path: str | Path) -> SlideTimeline:
    """Load a JSON list of {"slide_id", "start", "end", "titles": [...]}."""
    data = _read_json(path)
    if not isinstance(data, list):
        raise InputError(f"{path}: slide timeline must be a JSON list")
    entries = []
    for item in data:
        try:
            entries.append(
                SlideEntry(
                    slide_id=str(item["slide_id"]),
                    start=float(item["start"]),
                    end=float(item["end"]),
                    titles=tuple(str(t) for t in item.get("titles", [])),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: bad slide entry {item!r}") from exc
    return SlideTimeline(tuple(entries))


@dataclass(frozen=True)
class GroundTruthTopic:
    name: str
    start: float
    end: float


@dataclass(frozen=True)
class GroundTruth:
    """Reference (topic_name, start, end) intervals, sorted by start."""

    topics: tuple[GroundTruthTopic, ...]

    def __post_init__(self) -> None:
        prev = None
        for t in self.topics:
            if t.start >= t.end:
                raise InputError(f"ground-truth topic {t.name!r}: start must precede end")
            if prev is not None and t.start < prev:
                raise InputError("ground-truth intervals must be sorted by start")
            prev = t.start


def load_ground_truth(path: str | Path) -> GroundTruth:
    """Load a JSON list of {"topic", "start", "end"}."""
    data = _read_json(path)
    if not isinstance(data, list):
        raise InputError(f"{path}: ground truth must be a JSON list")
    topics = []
    for item in data:
        try:
            topics.append(
                GroundTruthTopic(str(item["topic"]), float(item["start"]), float(item["end"]))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: bad ground-truth entry {item!r}") from exc
    if not topics:
        raise InputError(f"{path}: empty ground truth")
    return GroundTruth(tuple(topics))


def load_syllabus(path: str | Path) -> tuple[str, ...]:
    """Load a syllabus: an ordered JSON list of topic names."""
    data = _read_json(path)
    if not isinstance(data, list) or not all(isinstance(s, str) for s in data):
        raise InputError(f"{path}: syllabus must be a JSON list of strings")
    return tuple(data)
