"""Topic segmentation of long lecture recordings.

Two segmenters over one timed transcript: a sentence-window structural pass
and a knowledge-graph semantic pass, fused and annotated with syllabus names,
plus the metrics to score the result against a ground truth.
"""

from .corpus import (
    ConceptLexicon,
    GroundTruth,
    InputError,
    KnowledgeGraph,
    SlideTimeline,
    TimedTranscript,
    find_concept_mentions,
    load_ground_truth,
    load_knowledge_graph,
    load_lexicon,
    load_slide_timeline,
    load_syllabus,
    load_transcript,
    slice_transcript,
)
from .embedding import (
    EmbeddingProvider,
    FileVectorProvider,
    SimilarityDictionary,
    build_similarity_dictionary,
    cosine,
    fallback_embedder,
)
from .slide_graph import SlideGraph, build_slide_graph, concept_change_score, mark_and_merge
from .boundary import ClusterCentroid, combine, density, make_centroid, topic_boundaries
from .structural import (
    AttentionParams,
    attention_compose,
    baseline_scorer,
    map_token_time,
    relation_features,
    structural_segments,
    weighted_bce,
    window_sentences,
)
from .fusion import FusionConfig, annotate, fuse, wmd
from .evaluation import EvalReport, boundary_f1, evaluate, mean_otr, otr, pk, window_diff
from .segments import AnnotatedSegment, TopicBoundaryList
from .pipeline import PipelineConfig, semantic_pipeline, structural_pipeline
from .fixtures import PlantedFixture, generate_fixture, write_fixture

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
