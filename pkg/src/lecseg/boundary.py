"""Primary-concept centroids and the density-comparison boundary search.

Clusters are pruned to their high-frequency core concepts, then a sliding
three-centroid window decides, transition by transition, whether a topic
boundary falls between clusters: disjoint neighbours split immediately, and
otherwise the densities of the pairwise / three-way combined graphs arbitrate
between a gradual topic change and a digression inside one topic.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import ceil
from typing import Literal, Sequence

from .corpus import KnowledgeGraph
from .embedding import SimilarityDictionary, pair_key
from .segments import TopicBoundaryList
from .slide_graph import PairKey, SlideGraph

CaseCStrictness = Literal["verbatim", "strict"]


@dataclass(frozen=True)
class ClusterCentroid:
    """Top-fraction primary concepts of a cluster and their interconnections."""

    interval: tuple[float, float]
    vertices: dict[str, int]
    edges: dict[PairKey, float]

    @property
    def start(self) -> float:
        return self.interval[0]

    @property
    def end(self) -> float:
        return self.interval[1]


def incident_weight_sums(
    vertices: Sequence[str], edges: dict[PairKey, float]
) -> dict[str, float]:
    sums = {v: 0.0 for v in vertices}
    for (a, b), w in sorted(edges.items()):
        if a in sums:
            sums[a] += w
        if b in sums:
            sums[b] += w
    return sums


def make_centroid(cluster: SlideGraph, primary_fraction: float = 0.70) -> ClusterCentroid:
    """Keep the ceil(fraction * N) top concepts of a cluster plus their edges.

    Ranking is by term frequency, then total incident edge weight, then name.
    """
    if cluster.is_empty:
        raise ValueError("cannot build a centroid from an empty cluster")
    if not (0.0 < primary_fraction <= 1.0):
        raise ValueError("primary_fraction must be in (0, 1]")
    keep = ceil(primary_fraction * len(cluster.vertices))
    weights = incident_weight_sums(sorted(cluster.vertices), cluster.edges)
    ranked = sorted(
        cluster.vertices,
        key=lambda v: (-cluster.vertices[v], -weights[v], v),
    )
    kept = set(ranked[:keep])
    vertices = {v: cluster.vertices[v] for v in sorted(kept)}
    edges = {k: w for k, w in sorted(cluster.edges.items()) if k[0] in kept and k[1] in kept}
    return ClusterCentroid(cluster.interval, vertices, edges)


def density(graph: ClusterCentroid | SlideGraph) -> float:
    """Sum of edge weights over N(N-1); graphs with fewer than 2 vertices score 0."""
    n = len(graph.vertices)
    if n < 2:
        return 0.0
    total = sum(w for _, w in sorted(graph.edges.items()))
    return total / (n * (n - 1))


def combine(
    centroids: Sequence[ClusterCentroid],
    kg: KnowledgeGraph,
    sim_dict: SimilarityDictionary,
) -> ClusterCentroid:
    """Union of centroids, completed with every knowledge-graph edge between them.

    Vertex frequencies sum; an edge present in several inputs keeps its first
    (dictionary) weight; knowledge-graph edges absent from all inputs are added
    with their dictionary weight (0 when unscored).
    """
    if not centroids:
        raise ValueError("combine requires at least one centroid")
    tf: Counter = Counter()
    edges: dict[PairKey, float] = {}
    for c in centroids:
        tf.update(c.vertices)
        for key, w in sorted(c.edges.items()):
            edges.setdefault(key, w)
    names = sorted(tf)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            key = pair_key(a, b)
            if key not in edges and kg.has_edge(a, b):
                edges[key] = sim_dict.get(a, b, 0.0)
    interval = (min(c.start for c in centroids), max(c.end for c in centroids))
    return ClusterCentroid(interval, dict(sorted(tf.items())), edges)


def _disjoint(a: ClusterCentroid, b: ClusterCentroid) -> bool:
    return not (set(a.vertices) & set(b.vertices))


def topic_boundaries(
    centroids: Sequence[ClusterCentroid],
    kg: KnowledgeGraph,
    sim_dict: SimilarityDictionary,
    case_c_strictness: CaseCStrictness = "verbatim",
) -> TopicBoundaryList:
    """Walk the centroid list three at a time and emit topic segments.

    For the window (c0, c1, c2) the first matching rule wins:

    * both adjacent vertex intersections empty -> boundary after c0, step 1;
    * the c0+c2 combination is strictly densest -> no boundary, step 2
      (c1 was a digression, c0 and c2 share the topic);
    * the three-way combination out-densifies the pairwise ones -> no
      boundary, step 2 (all three share the topic).  "verbatim" fires when it
      beats any single pairwise density, "strict" only when it beats all;
    * c0+c1 denser than c1+c2 -> boundary after c1, step 2;
    * c1+c2 denser than c0+c1 -> boundary after c0, step 1;
    * everything equal -> no boundary, step 1.

    The final segment always closes at the last centroid's end, and any gap
    between consecutive cluster intervals extends the earlier segment.
    """
    if not centroids:
        raise ValueError("topic_boundaries requires at least one centroid")
    if case_c_strictness not in ("verbatim", "strict"):
        raise ValueError(f"unknown case_c_strictness: {case_c_strictness!r}")
    if len(centroids) == 1:
        return TopicBoundaryList(((centroids[0].start, centroids[0].end),))

    segments: list[tuple[float, float]] = []
    start_time = centroids[0].start
    i = 0
    n = len(centroids)
    while i < n - 2:
        c0, c1, c2 = centroids[i], centroids[i + 1], centroids[i + 2]
        if _disjoint(c0, c1) and _disjoint(c1, c2):
            segments.append((start_time, c0.end))
            start_time = c1.start
            i += 1
            continue
        d01 = density(combine((c0, c1), kg, sim_dict))
        d02 = density(combine((c0, c2), kg, sim_dict))
        d12 = density(combine((c1, c2), kg, sim_dict))
        d012 = density(combine((c0, c1, c2), kg, sim_dict))
        if d02 > d01 and d02 > d12:
            i += 2
        elif (
            (d012 > d01 or d012 > d12 or d012 > d02)
            if case_c_strictness == "verbatim"
            else (d012 > d01 and d012 > d12 and d012 > d02)
        ):
            i += 2
        elif d01 > d12:
            segments.append((start_time, c1.end))
            start_time = c2.start
            i += 2
        elif d12 > d01:
            segments.append((start_time, c0.end))
            start_time = c1.start
            i += 1
        else:
            i += 1
    segments.append((start_time, centroids[-1].end))

    # dropped-slide gaps between clusters belong to the earlier segment
    tiled: list[tuple[float, float]] = []
    for j, (s, e) in enumerate(segments):
        if j + 1 < len(segments) and e < segments[j + 1][0]:
            e = segments[j + 1][0]
        tiled.append((s, e))
    return TopicBoundaryList(tuple(tiled))
