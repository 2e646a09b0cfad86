"""Per-slide concept graphlets, the concept-change score, and slide merging.

Each slide maps to a small weighted graph: vertices are the lexicon concepts
mentioned while the slide was on screen (weighted by term frequency), edges
are knowledge-graph links weighted by contextual similarity.  Consecutive
slides whose concept overlap stays above the video's average are merged into
one cluster; the transitions that survive are the potential topic boundaries.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from collections import Counter

from .corpus import ConceptLexicon, KnowledgeGraph, SlideEntry, TimedTranscript
from .corpus import find_concept_mentions, slice_range
from .embedding import SimilarityDictionary, pair_key

PairKey = tuple[str, str]


@dataclass(frozen=True)
class SlideGraph:
    """Weighted undirected concept graph for one slide (or a merged group)."""

    slide_ids: tuple[str, ...]
    interval: tuple[float, float]
    vertices: dict[str, int]
    edges: dict[PairKey, float]

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def total_tf(self) -> int:
        return sum(self.vertices.values())

    def to_debug_dict(self) -> dict:
        return {
            "slide_ids": list(self.slide_ids),
            "interval": list(self.interval),
            "vertices": dict(sorted(self.vertices.items())),
            "edges": [[a, b, w] for (a, b), w in sorted(self.edges.items())],
        }

    def to_debug_json(self) -> str:
        return json.dumps(self.to_debug_dict(), sort_keys=True) + "\n"


def _components(vertices: set[str], edges: dict[PairKey, float]) -> list[set[str]]:
    adjacency: dict[str, set[str]] = {v: set() for v in vertices}
    for a, b in edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    remaining = set(vertices)
    components = []
    while remaining:
        seed = min(remaining)
        comp = {seed}
        frontier = [seed]
        while frontier:
            node = frontier.pop()
            for nxt in adjacency[node]:
                if nxt not in comp:
                    comp.add(nxt)
                    frontier.append(nxt)
        remaining -= comp
        components.append(comp)
    return components


def repair_connectivity(
    vertices: dict[str, int],
    edges: dict[PairKey, float],
    sim_dict: SimilarityDictionary | None,
) -> dict[PairKey, float]:
    """Add max-weight dictionary edges until the graph is connected.

    While more than one component remains, the single highest-weight candidate
    edge between any two components is added; missing dictionary entries count
    as weight 0 and ties break on the lexicographically smallest pair.
    """
    edges = dict(edges)
    components = _components(set(vertices), edges)
    while len(components) > 1:
        best: tuple[float, PairKey] | None = None
        for i, comp_a in enumerate(components):
            for comp_b in components[i + 1 :]:
                for a in sorted(comp_a):
                    for b in sorted(comp_b):
                        key = pair_key(a, b)
                        w = sim_dict.get(a, b, 0.0) if sim_dict is not None else 0.0
                        if best is None or (-w, key) < (-best[0], best[1]):
                            best = (w, key)
        assert best is not None
        edges[best[1]] = best[0]
        components = _components(set(vertices), edges)
    return edges


def build_slide_graph(
    slide: SlideEntry,
    transcript: TimedTranscript,
    lexicon: ConceptLexicon,
    kg: KnowledgeGraph,
    sim_dict: SimilarityDictionary,
) -> SlideGraph:
    """Concept graphlet for one slide's transcript span.

    Slides in whose span no lexicon concept occurs yield an empty graph, to be
    dropped (and their time absorbed) before change scoring.
    """
    i0, i1 = slice_range(transcript, slide.start, slide.end)
    mentions = find_concept_mentions(transcript.tokens[i0:i1], lexicon)
    tf = Counter(concept for concept, _ in mentions)
    if not tf:
        return SlideGraph((slide.slide_id,), (slide.start, slide.end), {}, {})
    present = sorted(tf)
    edges: dict[PairKey, float] = {}
    for i, a in enumerate(present):
        for b in present[i + 1 :]:
            if kg.has_edge(a, b):
                edges[pair_key(a, b)] = sim_dict.get(a, b, 0.0)
    vertices = dict(sorted(tf.items()))
    edges = repair_connectivity(vertices, edges, sim_dict)
    return SlideGraph((slide.slide_id,), (slide.start, slide.end), vertices, edges)


def concept_change_score(g1: SlideGraph, g2: SlideGraph) -> float:
    """Weighted-Jaccard overlap of the term-frequency-weighted vertex sets.

    1.0 for identical graphs, 0.0 for disjoint vertex sets; absent vertices
    count as frequency 0 on their side.
    """
    if g1.is_empty or g2.is_empty:
        raise ValueError("concept_change_score requires non-empty graphs")
    v1, v2 = g1.vertices, g2.vertices
    union = sorted(set(v1) | set(v2))
    if not (set(v1) & set(v2)):
        return 0.0
    min_sum = sum(min(v1.get(v, 0), v2.get(v, 0)) for v in union)
    max_sum = sum(max(v1.get(v, 0), v2.get(v, 0)) for v in union)
    return min_sum / max_sum


@dataclass(frozen=True)
class CcsMarking:
    """Change scores over the original consecutive pairs and the marked transitions."""

    scores: tuple[float, ...]
    mean: float
    potential_boundaries: frozenset[int]


def drop_empty_slides(graphs: list[SlideGraph]) -> list[SlideGraph]:
    """Remove concept-free slides, folding their spans into a neighbour.

    An empty slide's interval extends the preceding graph's end; leading empty
    slides extend the first non-empty graph's start instead.
    """
    out: list[SlideGraph] = []
    pending_start: float | None = None
    for g in graphs:
        if g.is_empty:
            if out:
                prev = out[-1]
                out[-1] = replace(prev, interval=(prev.interval[0], g.interval[1]))
            elif pending_start is None:
                pending_start = g.interval[0]
            continue
        if pending_start is not None:
            g = replace(g, interval=(pending_start, g.interval[1]))
            pending_start = None
        out.append(g)
    return out


def merge_graphs(
    group: list[SlideGraph], sim_dict: SimilarityDictionary | None = None
) -> SlideGraph:
    """Merge consecutive graphs: term frequencies sum, edge sets union.

    A duplicated edge keeps its dictionary weight (edge weights never sum).
    """
    if len(group) == 1:
        return group[0]
    ids: list[str] = []
    tf: Counter = Counter()
    edges: dict[PairKey, float] = {}
    for g in group:
        ids.extend(g.slide_ids)
        tf.update(g.vertices)
        for key, w in sorted(g.edges.items()):
            edges.setdefault(key, w)
    vertices = dict(sorted(tf.items()))
    edges = repair_connectivity(vertices, edges, sim_dict)
    return SlideGraph(
        tuple(ids),
        (group[0].interval[0], group[-1].interval[1]),
        vertices,
        edges,
    )


def mark_and_merge(
    graphs: list[SlideGraph],
    sim_dict: SimilarityDictionary | None = None,
) -> tuple[list[SlideGraph], CcsMarking]:
    """Mark below-average transitions as potential boundaries, merge the rest.

    Scores are computed once on the original consecutive pairs; maximal runs
    of transitions at or above the mean collapse left-to-right into single
    clusters.  A transition scoring exactly the mean merges (conservative
    boundary set).
    """
    if len(graphs) < 2:
        return list(graphs), CcsMarking((), 0.0, frozenset())
    scores = tuple(
        concept_change_score(graphs[i], graphs[i + 1]) for i in range(len(graphs) - 1)
    )
    mean = sum(scores) / len(scores)
    boundaries = frozenset(j for j, s in enumerate(scores) if s < mean)
    clusters: list[SlideGraph] = []
    group = [graphs[0]]
    for j, score in enumerate(scores):
        if score >= mean:
            group.append(graphs[j + 1])
        else:
            clusters.append(merge_graphs(group, sim_dict))
            group = [graphs[j + 1]]
    clusters.append(merge_graphs(group, sim_dict))
    return clusters, CcsMarking(scores, mean, boundaries)
