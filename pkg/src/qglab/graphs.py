"""Metric graph data model: vertices with coupling strengths, edges with
lengths and potentials, validation, classification, and the JSON codec.

Edges carry a local coordinate running from 0 at ``source`` to ``length``
at ``target``.  Graphs are immutable after construction; all derived
structure (degrees, incidence lists) is precomputed.

JSON schema::

    { "vertices": [ { "id": "v1", "sigma": 0.0 }, ... ],
      "edges":    [ { "id": "e1", "from": "v1", "to": "v2",
                      "length": 1.0,
                      "potential": { "kind": "constant", "value": 0.0 }
                            | { "kind": "expr", "expr": "2/(1+x)^2" }
                            | { "kind": "samples", "values": [...] } },
                    ... ] }

Sample values are uniformly spaced over [0, length] including both ends.
"""

import enum
import json
import math
from dataclasses import dataclass

from .errors import (DanglingEndpoint, DisconnectedGraph, DuplicateId,
                     GraphValidationError, NonPositiveLength, SelfLoopEdge)
from .potentials import (Constant, Potential, potential_from_json,
                         potential_to_json, scale_potential)

__all__ = [
    "Vertex", "Edge", "MetricGraph", "GraphClass",
    "build_graph", "load_graph", "graph_to_json", "save_graph",
    "scale_graph", "free_version",
]

SOURCE_END = 0
TARGET_END = 1


@dataclass(frozen=True)
class Vertex:
    id: str
    sigma: float = 0.0


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    length: float
    potential: Potential


class GraphClass(enum.Enum):
    LINE = "line"        # every degree in {1, 2}
    LOOP = "loop"        # every degree exactly 2
    GENERAL = "general"


class MetricGraph:
    """Validated, connected, self-loop-free metric graph.

    Vertices and edges are kept sorted by id; that order fixes the
    deterministic DOF and matching-matrix layouts downstream.
    """

    def __init__(self, vertices, edges):
        vs = sorted(vertices, key=lambda v: v.id)
        es = sorted(edges, key=lambda e: e.id)
        if not es:
            raise GraphValidationError("graph needs at least one edge")

        seen = set()
        for v in vs:
            if not isinstance(v.id, str) or not v.id:
                raise GraphValidationError(
                    "vertex id must be a non-empty string: %r" % (v.id,))
            if v.id in seen:
                raise DuplicateId("duplicate vertex id %r" % v.id)
            seen.add(v.id)
            if not math.isfinite(v.sigma):
                raise GraphValidationError(
                    "sigma at vertex %r must be finite" % v.id)

        vid_index = {v.id: i for i, v in enumerate(vs)}
        seen = set()
        for e in es:
            if not isinstance(e.id, str) or not e.id:
                raise GraphValidationError(
                    "edge id must be a non-empty string: %r" % (e.id,))
            if e.id in seen:
                raise DuplicateId("duplicate edge id %r" % e.id)
            seen.add(e.id)
            for end in (e.source, e.target):
                if end not in vid_index:
                    raise DanglingEndpoint(
                        "edge %r references missing vertex %r" % (e.id, end))
            if e.source == e.target:
                raise SelfLoopEdge("edge %r is a self-loop" % e.id)
            if not (isinstance(e.length, (int, float))
                    and math.isfinite(e.length) and e.length > 0):
                raise NonPositiveLength(
                    "edge %r needs a positive finite length" % e.id)
            if not isinstance(e.potential, Potential):
                raise GraphValidationError(
                    "edge %r carries no potential" % e.id)

        self.vertices = tuple(vs)
        self.edges = tuple(es)
        self._vid_index = vid_index

        incidence = {v.id: [] for v in vs}
        for i, e in enumerate(es):
            incidence[e.source].append((i, SOURCE_END))
            incidence[e.target].append((i, TARGET_END))
        self._incidence = {vid: tuple(ends) for vid, ends in
                           incidence.items()}
        self._degree = {vid: len(ends) for vid, ends in incidence.items()}

        # connectivity (edges are undirected for this purpose)
        reached = {vs[0].id}
        frontier = [vs[0].id]
        while frontier:
            vid = frontier.pop()
            for i, _end in self._incidence[vid]:
                e = es[i]
                for nb in (e.source, e.target):
                    if nb not in reached:
                        reached.add(nb)
                        frontier.append(nb)
        if len(reached) != len(vs):
            missing = sorted(set(vid_index) - reached)
            raise DisconnectedGraph(
                "vertices unreachable from %r: %r" % (vs[0].id, missing))

    def vertex(self, vid):
        return self.vertices[self._vid_index[vid]]

    def incidence(self, vid):
        """Tuple of (edge_index, end) pairs at a vertex, ordered by edge."""
        return self._incidence[vid]

    def degree(self, vid):
        return self._degree[vid]

    def min_degree(self):
        return min(self._degree.values())

    def total_length(self):
        return sum(e.length for e in self.edges)

    def classify(self):
        degs = set(self._degree.values())
        if degs == {2}:
            return GraphClass.LOOP
        if degs <= {1, 2}:
            return GraphClass.LINE
        return GraphClass.GENERAL

    def __repr__(self):
        return "MetricGraph(|V|=%d, |E|=%d, L=%g)" % (
            len(self.vertices), len(self.edges), self.total_length())


def build_graph(obj):
    """Construct a MetricGraph from a parsed JSON object."""
    if not isinstance(obj, dict):
        raise GraphValidationError("graph description must be an object")
    raw_vs = obj.get("vertices")
    raw_es = obj.get("edges")
    if not isinstance(raw_vs, list) or not isinstance(raw_es, list):
        raise GraphValidationError(
            "graph description needs 'vertices' and 'edges' lists")
    vertices = []
    for rv in raw_vs:
        if not isinstance(rv, dict) or "id" not in rv:
            raise GraphValidationError("vertex entries need an 'id'")
        vertices.append(Vertex(id=rv["id"],
                               sigma=float(rv.get("sigma", 0.0))))
    edges = []
    for re_ in raw_es:
        if not isinstance(re_, dict):
            raise GraphValidationError("edge entries must be objects")
        for key in ("id", "from", "to", "length"):
            if key not in re_:
                raise GraphValidationError(
                    "edge entry missing %r: %r" % (key, re_))
        pot = re_.get("potential", {"kind": "constant", "value": 0.0})
        edges.append(Edge(id=re_["id"], source=re_["from"],
                          target=re_["to"], length=float(re_["length"]),
                          potential=potential_from_json(pot)))
    return MetricGraph(vertices, edges)


def load_graph(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphValidationError(
                "invalid JSON in %s: %s" % (path, exc)) from exc
    return build_graph(obj)


def graph_to_json(g):
    return {
        "vertices": [{"id": v.id, "sigma": v.sigma} for v in g.vertices],
        "edges": [{"id": e.id, "from": e.source, "to": e.target,
                   "length": e.length,
                   "potential": potential_to_json(e.potential)}
                  for e in g.edges],
    }


def save_graph(g, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_json(g), fh, indent=2)
        fh.write("\n")


def scale_graph(g, tau):
    """Same graph with potentials tau*q and couplings tau*sigma."""
    tau = float(tau)
    vs = [Vertex(v.id, tau * v.sigma) for v in g.vertices]
    es = [Edge(e.id, e.source, e.target, e.length,
               scale_potential(e.potential, tau)) for e in g.edges]
    return MetricGraph(vs, es)


def free_version(g):
    """The comparison operator on the same graph: q = 0, sigma = 0."""
    vs = [Vertex(v.id, 0.0) for v in g.vertices]
    es = [Edge(e.id, e.source, e.target, e.length, Constant(0.0))
          for e in g.edges]
    return MetricGraph(vs, es)
