"""Segment lists: the pipeline's product type and its JSON wire format."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import InputError


def _round_ms(t: float) -> float:
    # exported times carry millisecond precision
    return round(t, 3)


@dataclass(frozen=True)
class TopicBoundaryList:
    """Ordered, non-overlapping (start, end) topic intervals in seconds."""

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        prev_end = None
        for start, end in self.segments:
            if start >= end:
                raise ValueError(f"segment ({start}, {end}): start must precede end")
            if prev_end is not None and start < prev_end - 1e-9:
                raise ValueError("segments overlap")
            prev_end = end

    @property
    def span(self) -> tuple[float, float]:
        return self.segments[0][0], self.segments[-1][1]

    def interior_boundaries(self) -> list[float]:
        return [s for s, _ in self.segments[1:]]

    def to_json(self) -> str:
        payload = [{"start": _round_ms(s), "end": _round_ms(e)} for s, e in self.segments]
        return json.dumps(payload, indent=2) + "\n"


@dataclass(frozen=True)
class AnnotatedSegment:
    start: float
    end: float
    topic_name: str | None = None


def annotated_to_json(segments: list[AnnotatedSegment]) -> str:
    payload = [
        {"topic": seg.topic_name, "start": _round_ms(seg.start), "end": _round_ms(seg.end)}
        for seg in segments
    ]
    return json.dumps(payload, indent=2) + "\n"


def load_segments(path: str | Path) -> list[AnnotatedSegment]:
    """Read a segmentation file; entries may or may not carry topic names."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, list):
        raise InputError(f"{path}: segmentation must be a JSON list")
    out = []
    for item in data:
        try:
            out.append(
                AnnotatedSegment(
                    start=float(item["start"]),
                    end=float(item["end"]),
                    topic_name=item.get("topic"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: bad segment entry {item!r}") from exc
    return out


def boundary_list(segments: list[AnnotatedSegment]) -> TopicBoundaryList:
    return TopicBoundaryList(tuple((s.start, s.end) for s in segments))
