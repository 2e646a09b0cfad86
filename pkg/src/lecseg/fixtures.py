"""Seedable synthetic lecture generator for pipeline tests and demos.

A planted video has T topics with disjoint concept vocabularies, a
block-diagonal knowledge graph, four slides per topic and a transcript whose
filler vocabulary rotates every few minutes.  Each topic alternates two
emphasis slides (every concept mentioned several times) with two recap slides
(every concept mentioned once), so the slide-merging stage produces exactly
two clusters per topic with identical concept sets at different frequencies.
The filler rotation gives the sentence-window baseline mid-topic similarity
valleys whose number grows with topic duration.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import (
    ConceptLexicon,
    GroundTruth,
    GroundTruthTopic,
    KnowledgeGraph,
    SlideEntry,
    SlideTimeline,
    TimedTranscript,
    normalize_word,
)

_CONSONANTS = "bcdfgklmnprtvz"
_VOWELS = "aeiou"


class _WordMint:
    """Pseudo-word factory; every word is unique after normalization."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.seen: set[str] = set()

    def word(self, syllables: int = 3) -> str:
        while True:
            w = "".join(
                self.rng.choice(_CONSONANTS) + self.rng.choice(_VOWELS)
                for _ in range(syllables)
            )
            key = normalize_word(w)
            if key and key not in self.seen:
                self.seen.add(key)
                return w


@dataclass(frozen=True)
class PlantedFixture:
    transcript: TimedTranscript
    timeline: SlideTimeline
    lexicon: ConceptLexicon
    kg: KnowledgeGraph
    syllabus: tuple[str, ...]
    ground_truth: GroundTruth
    seed: int


def generate_fixture(
    seed: int,
    topics: int | None = None,
    topic_duration: tuple[float, float] = (600.0, 1500.0),
    concepts_per_topic: int = 6,
    emphasis_mentions: int = 4,
    recap_mentions: int = 1,
    token_rate: float = 0.45,
    era_seconds: float = 360.0,
    filler_pool_size: int = 24,
) -> PlantedFixture:
    """Plant `topics` coherent topics (3..8 when unspecified) into one video."""
    rng = random.Random(seed)
    mint = _WordMint(rng)
    n_topics = topics if topics is not None else rng.randint(3, 8)
    if n_topics < 2:
        raise ValueError("need at least 2 topics")

    topic_concepts = [
        [mint.word() for _ in range(concepts_per_topic)] for _ in range(n_topics)
    ]
    topic_names = [f"{mint.word(4).capitalize()} overview" for _ in range(n_topics)]
    durations = [rng.uniform(*topic_duration) for _ in range(n_topics)]

    filler_pools: dict[tuple[int, int], list[str]] = {}

    def filler_word(topic_idx: int, era_idx: int) -> str:
        pool = filler_pools.get((topic_idx, era_idx))
        if pool is None:
            pool = [mint.word() for _ in range(filler_pool_size)]
            filler_pools[(topic_idx, era_idx)] = pool
        return rng.choice(pool)

    tokens: list[str] = []
    anchors: list[tuple[int, float]] = []
    slides: list[SlideEntry] = []
    gt: list[GroundTruthTopic] = []

    video_t = 0.0
    slide_counter = 0
    for t_idx in range(n_topics):
        t_start = video_t
        t_end = t_start + durations[t_idx]
        gt.append(GroundTruthTopic(topic_names[t_idx], t_start, t_end))
        concepts = topic_concepts[t_idx]
        slide_duration = durations[t_idx] / 4.0
        # shared edge values keep consecutive slides exactly abutting
        edges = [t_start + k * slide_duration for k in range(4)] + [t_end]
        # two emphasis slides then two recap slides
        for s_idx, mentions in enumerate(
            (emphasis_mentions, emphasis_mentions, recap_mentions, recap_mentions)
        ):
            s_start = edges[s_idx]
            s_end = edges[s_idx + 1]
            n_tokens = max(
                mentions * len(concepts) + 12, int(round(slide_duration * token_rate))
            )
            units: list[str | None] = [None] * (n_tokens - mentions * len(concepts))
            for c in concepts:
                units.extend([c] * mentions)
            rng.shuffle(units)
            anchors.append((len(tokens), s_start))
            for pos, unit in enumerate(units):
                if unit is None:
                    token_time = s_start + (pos + 0.5) * slide_duration / len(units)
                    era = int((token_time - t_start) // era_seconds)
                    tokens.append(filler_word(t_idx, era))
                else:
                    tokens.append(unit)
            slides.append(
                SlideEntry(
                    slide_id=f"slide-{slide_counter:03d}",
                    start=s_start,
                    end=s_end,
                    titles=(topic_names[t_idx],),
                )
            )
            slide_counter += 1
        video_t = t_end

    transcript = TimedTranscript(
        tokens=tuple(tokens),
        anchors=tuple(anchors),
        explicit_duration=video_t,
    )
    lexicon = ConceptLexicon.from_phrases(
        [c for concepts in topic_concepts for c in concepts]
    )
    kg_pairs = [
        (a, b)
        for concepts in topic_concepts
        for i, a in enumerate(concepts)
        for b in concepts[i + 1 :]
    ]
    return PlantedFixture(
        transcript=transcript,
        timeline=SlideTimeline(tuple(slides)),
        lexicon=lexicon,
        kg=KnowledgeGraph.from_edges(kg_pairs),
        syllabus=tuple(topic_names),
        ground_truth=GroundTruth(tuple(gt)),
        seed=seed,
    )


def write_fixture(fixture: PlantedFixture, out_dir: str | Path) -> dict[str, Path]:
    """Write a fixture as the pipeline's input files; returns the path map."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "transcript": out_dir / "transcript.json",
        "timeline": out_dir / "slides.json",
        "lexicon": out_dir / "lexicon.json",
        "kg": out_dir / "kg.tsv",
        "syllabus": out_dir / "syllabus.json",
        "ground_truth": out_dir / "ground_truth.json",
    }
    paths["transcript"].write_text(
        json.dumps(
            {
                "tokens": list(fixture.transcript.tokens),
                "anchors": [[i, t] for i, t in fixture.transcript.anchors],
                "duration": fixture.transcript.explicit_duration,
            }
        )
        + "\n",
        encoding="utf-8",
    )
    paths["timeline"].write_text(
        json.dumps(
            [
                {
                    "slide_id": e.slide_id,
                    "start": e.start,
                    "end": e.end,
                    "titles": list(e.titles),
                }
                for e in fixture.timeline.entries
            ],
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    paths["lexicon"].write_text(
        json.dumps(sorted(fixture.lexicon.concepts), indent=2) + "\n", encoding="utf-8"
    )
    paths["kg"].write_text(
        "# one undirected edge per line\n"
        + "\n".join(f"{a}\t{b}" for a, b in sorted(fixture.kg.edges))
        + "\n",
        encoding="utf-8",
    )
    paths["syllabus"].write_text(
        json.dumps(list(fixture.syllabus), indent=2) + "\n", encoding="utf-8"
    )
    paths["ground_truth"].write_text(
        json.dumps(
            [
                {"topic": t.name, "start": t.start, "end": t.end}
                for t in fixture.ground_truth.topics
            ],
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return paths
