"""End-to-end wiring of the segmentation stages behind one config object."""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .boundary import CaseCStrictness, make_centroid, topic_boundaries
from .corpus import (
    ConceptLexicon,
    InputError,
    KnowledgeGraph,
    SlideTimeline,
    TimedTranscript,
    find_concept_mentions,
)
from .embedding import (
    EmbeddingProvider,
    FileVectorProvider,
    SimilarityDictionary,
    build_similarity_dictionary,
    fallback_embedder,
)
from .fusion import FusionConfig, fuse
from .segments import TopicBoundaryList
from .slide_graph import build_slide_graph, drop_empty_slides, mark_and_merge
from .structural import structural_segments


@dataclass(frozen=True)
class PipelineConfig:
    """File paths plus every tunable parameter, with its default value."""

    transcript: str | None = None
    timeline: str | None = None
    kg: str | None = None
    lexicon: str | None = None
    syllabus: str | None = None
    embeddings: str | None = None
    ground_truth: str | None = None

    sentence_length: int = 20
    context_size: int = 10
    primary_fraction: float = 0.70
    fusion_threshold: float = 900.0
    co_occurrence_window: int = 100
    case_c_strictness: CaseCStrictness = "verbatim"
    eval_tolerance: float = 30.0
    boundary_threshold: float = 0.5
    eval_unit: float = 1.0

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise InputError(f"no such file: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON ({exc})") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**data)

    def override(self, **kwargs) -> "PipelineConfig":
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **updates)


def make_provider(
    config: PipelineConfig, transcript: TimedTranscript, use_fallback: bool
) -> EmbeddingProvider:
    """File-backed vectors when configured, else the deterministic built-in."""
    if config.embeddings and not use_fallback:
        return FileVectorProvider(config.embeddings)
    return fallback_embedder(transcript)


def edge_weight_dictionary(
    transcript: TimedTranscript,
    lexicon: ConceptLexicon,
    provider: EmbeddingProvider,
    window: int = 100,
) -> SimilarityDictionary:
    mentions = find_concept_mentions(transcript, lexicon)
    return build_similarity_dictionary(transcript, mentions, provider, window=window)


def semantic_pipeline(
    transcript: TimedTranscript,
    timeline: SlideTimeline,
    lexicon: ConceptLexicon,
    kg: KnowledgeGraph,
    sim_dict: SimilarityDictionary,
    primary_fraction: float = 0.70,
    case_c_strictness: CaseCStrictness = "verbatim",
    dump_graphs: str | Path | None = None,
) -> TopicBoundaryList:
    """Slide graphs -> merged clusters -> centroids -> boundary list.

    `dump_graphs` writes the per-slide graphs and the merged clusters as
    JSON Lines for inspection and test fixtures.
    """
    graphs = [
        build_slide_graph(entry, transcript, lexicon, kg, sim_dict)
        for entry in timeline.entries
    ]
    graphs = drop_empty_slides(graphs)
    if not graphs:
        raise ValueError("no slide produced a non-empty concept graph")
    clusters, _ = mark_and_merge(graphs, sim_dict)
    if dump_graphs is not None:
        lines = []
        for stage, items in (("slide", graphs), ("cluster", clusters)):
            for g in items:
                lines.append(json.dumps({"stage": stage, **g.to_debug_dict()}, sort_keys=True))
        Path(dump_graphs).write_text("\n".join(lines) + "\n", encoding="utf-8")
    centroids = [make_centroid(c, primary_fraction) for c in clusters]
    return topic_boundaries(centroids, kg, sim_dict, case_c_strictness)


def structural_pipeline(
    transcript: TimedTranscript,
    provider: EmbeddingProvider,
    config: PipelineConfig,
    scorer=None,
    encodings=None,
) -> TopicBoundaryList:
    return structural_segments(
        transcript,
        scorer=scorer,
        context=config.context_size,
        sentence_length=config.sentence_length,
        provider=None if encodings is not None else provider,
        encodings=encodings,
        threshold=config.boundary_threshold,
    )


def fused_pipeline(
    structural: TopicBoundaryList,
    semantic: TopicBoundaryList,
    config: PipelineConfig,
) -> TopicBoundaryList:
    return fuse(structural, semantic, FusionConfig(config.fusion_threshold))


class PipelineInputs:
    """Loaded input objects for one video, resolved from a config.

    The embedding provider is built lazily: runs that only consume a prebuilt
    dictionary or encoding file never pay for it.
    """

    def __init__(self, transcript: TimedTranscript, provider_factory):
        self.transcript = transcript
        self.timeline: SlideTimeline | None = None
        self.lexicon: ConceptLexicon | None = None
        self.kg: KnowledgeGraph | None = None
        self.syllabus: tuple[str, ...] | None = None
        self.ground_truth = None
        self._provider_factory = provider_factory
        self._provider: EmbeddingProvider | None = None

    @property
    def provider(self) -> EmbeddingProvider:
        if self._provider is None:
            self._provider = self._provider_factory()
        return self._provider


def load_inputs(config: PipelineConfig, use_fallback: bool = False) -> PipelineInputs:
    from . import corpus

    if not config.transcript:
        raise InputError("config is missing the transcript path")
    transcript = corpus.load_transcript(config.transcript)
    inputs = PipelineInputs(
        transcript, lambda: make_provider(config, transcript, use_fallback)
    )
    if config.timeline:
        inputs.timeline = corpus.load_slide_timeline(config.timeline)
    if config.lexicon:
        inputs.lexicon = corpus.load_lexicon(config.lexicon)
    if config.kg:
        inputs.kg = corpus.load_knowledge_graph(config.kg)
    if config.syllabus:
        inputs.syllabus = corpus.load_syllabus(config.syllabus)
    if config.ground_truth:
        inputs.ground_truth = corpus.load_ground_truth(config.ground_truth)
    return inputs
