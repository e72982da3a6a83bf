"""Weighted digraphs, parsing, reachability, spanning trees and Laplacians.

Edge ``(u, v, w)`` means agent ``v`` receives ``u``'s state with gain ``w``:
the protocol term of ``v`` is ``w * (x_u - x_v)``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np


class GraphError(ValueError):
    """Base class for invalid graph documents or graphs."""


class MalformedGraphError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class NonPositiveWeightError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


class Edge(NamedTuple):
    src: int
    dst: int
    w: float = 1.0

    @property
    def pair(self) -> tuple[int, int]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class DiGraph:
    """Immutable weighted digraph.

    Parsed graphs use the dense vertex ids ``1..n``. Subgraphs keep the ids of
    their host graph, so ``vertices`` is stored explicitly.
    """

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    _succ: dict = field(init=False, repr=False, compare=False)
    _pred: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertices = tuple(sorted(set(self.vertices)))
        if len(vertices) != len(self.vertices):
            raise MalformedGraphError(f"repeated vertex ids in {self.vertices}")
        vset = set(vertices)
        seen = set()
        edges = []
        for e in self.edges:
            e = Edge(int(e[0]), int(e[1]), float(e[2]) if len(e) > 2 else 1.0)
            if e.src not in vset or e.dst not in vset:
                raise MalformedGraphError(f"edge {e.src}->{e.dst} references an unknown vertex")
            if e.src == e.dst:
                raise SelfLoopError(f"self-loop at vertex {e.src}")
            if not (e.w > 0 and np.isfinite(e.w)):
                raise NonPositiveWeightError(f"edge {e.src}->{e.dst} has weight {e.w}; weights must be positive")
            if e.pair in seen:
                raise DuplicateEdgeError(f"duplicate edge {e.src}->{e.dst}")
            seen.add(e.pair)
            edges.append(e)
        edges.sort()
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", tuple(edges))
        succ = {v: [] for v in vertices}
        pred = {v: [] for v in vertices}
        for e in edges:
            succ[e.src].append(e.dst)
            pred[e.dst].append(e.src)
        object.__setattr__(self, "_succ", {v: tuple(sorted(s)) for v, s in succ.items()})
        object.__setattr__(self, "_pred", {v: tuple(sorted(p)) for v, p in pred.items()})

    @classmethod
    def dense(cls, n: int, edges: Iterable = ()) -> "DiGraph":
        """Graph on vertices ``1..n``; edges given as ``(src, dst)`` or ``(src, dst, w)``."""
        if n < 1:
            raise MalformedGraphError(f"vertex count must be >= 1, got {n}")
        return cls(tuple(range(1, n + 1)), tuple(edges))

    @property
    def n(self) -> int:
        return len(self.vertices)

    def successors(self, v: int) -> tuple[int, ...]:
        return self._succ[v]

    def predecessors(self, v: int) -> tuple[int, ...]:
        """In-neighbourhood of ``v``: the agents whose states ``v`` receives."""
        return self._pred[v]

    def weight(self, src: int, dst: int) -> float:
        for e in self.edges:
            if e.src == src and e.dst == dst:
                return e.w
        raise KeyError((src, dst))

    def pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(e.pair for e in self.edges)

    def subgraph(self, vertices: Iterable[int]) -> "DiGraph":
        """Induced subgraph on ``vertices`` (host ids preserved)."""
        keep = set(vertices)
        return DiGraph(tuple(keep), tuple(e for e in self.edges if e.src in keep and e.dst in keep))

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [{"src": e.src, "dst": e.dst, "w": e.w} for e in self.edges]}


# --------------------------------------------------------------------------
# parsing


def parse_graph(text: str, format: str = "json") -> DiGraph:
    if format == "json":
        return _parse_json(text)
    if format == "dot":
        return _parse_dot(text)
    raise MalformedGraphError(f"unknown graph format {format!r}")


def _parse_json(text: str) -> DiGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGraphError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "n" not in doc:
        raise MalformedGraphError('graph document must be an object with an "n" field')
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise MalformedGraphError(f'"n" must be a positive integer, got {n!r}')
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_edges, list):
        raise MalformedGraphError('"edges" must be a list')
    edges = []
    for i, item in enumerate(raw_edges):
        if not isinstance(item, dict) or "src" not in item or "dst" not in item:
            raise MalformedGraphError(f"edge #{i} must be an object with src and dst")
        src, dst = item["src"], item["dst"]
        w = item.get("w", 1.0)
        for name, val in (("src", src), ("dst", dst)):
            if not isinstance(val, int) or isinstance(val, bool) or not 1 <= val <= n:
                raise MalformedGraphError(f"edge #{i}: {name}={val!r} is not a vertex id in 1..{n}")
        if not isinstance(w, (int, float)) or isinstance(w, bool):
            raise MalformedGraphError(f"edge #{i}: weight {w!r} is not a number")
        edges.append((src, dst, float(w)))
    return DiGraph.dense(n, edges)


_DOT_DEFAULTS = {"node", "edge", "graph"}


def _parse_dot(text: str) -> DiGraph:
    import pydot

    try:
        graphs = pydot.graph_from_dot_data(text)
    except Exception as exc:  # pydot surfaces pyparsing errors of several kinds
        raise MalformedGraphError(f"invalid DOT: {exc}") from exc
    if not graphs:
        raise MalformedGraphError("no graph found in DOT document")
    dot = graphs[0]
    if dot.get_type() != "digraph":
        raise MalformedGraphError("only directed DOT graphs (digraph) are supported")

    def vid(name) -> int:
        name = str(name).strip('"')
        try:
            return int(name)
        except ValueError:
            raise MalformedGraphError(f"DOT node id {name!r} is not an integer") from None

    ids = {vid(nd.get_name()) for nd in dot.get_nodes() if nd.get_name().strip('"') not in _DOT_DEFAULTS}
    edges = []
    for e in dot.get_edges():
        src, dst = vid(e.get_source()), vid(e.get_destination())
        raw_w = e.get_attributes().get("weight", 1.0)
        try:
            w = float(str(raw_w).strip('"'))
        except ValueError:
            raise MalformedGraphError(f"edge {src}->{dst}: weight {raw_w!r} is not a number") from None
        ids.update((src, dst))
        edges.append((src, dst, w))
    if not ids:
        raise MalformedGraphError("DOT graph has no vertices")
    n = max(ids)
    if ids != set(range(1, n + 1)):
        raise MalformedGraphError(f"DOT vertex ids must be dense 1..{n}, missing {sorted(set(range(1, n + 1)) - ids)}")
    return DiGraph.dense(n, edges)


def serialize_graph(g: DiGraph) -> str:
    return json.dumps(g.to_dict())


def load_graph(path, format: str | None = None) -> DiGraph:
    path = str(path)
    if format is None:
        format = "dot" if path.endswith((".dot", ".gv")) else "json"
    with open(path) as fh:
        return parse_graph(fh.read(), format)


# --------------------------------------------------------------------------
# reachability


def reachable_from(g: DiGraph, start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in g.successors(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def spanning_roots(g: DiGraph) -> set[int]:
    """Vertices from which every vertex is reachable; empty iff no spanning tree."""
    everything = set(g.vertices)
    return {r for r in g.vertices if reachable_from(g, r) == everything}


# --------------------------------------------------------------------------
# spanning trees


@dataclass(frozen=True)
class SpanningTree:
    root: int
    parent: dict[int, int]
    order: tuple[int, ...]
    label: dict[int, tuple[int, int]]

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset((p, v) for v, p in self.parent.items())

    def children(self, v: int) -> list[int]:
        return sorted(c for c, p in self.parent.items() if p == v)

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "order": list(self.order),
            "parent": {str(v): p for v, p in sorted(self.parent.items())},
            "label": {str(v): list(lab) for v, lab in sorted(self.label.items())},
        }


def extract_spanning_tree(g: DiGraph, root: int | None = None) -> SpanningTree:
    """Level-synchronous BFS tree rooted at ``root`` (default: lowest-id spanning root).

    A vertex discovered at level ``i+1`` takes as parent its lowest-id in-neighbour
    on level ``i``. Within a level, vertices are ordered by parent position and then
    by id, and labelled ``(level, index)`` with the root at ``(1, 1)``.
    """
    roots = spanning_roots(g)
    if root is None:
        if not roots:
            raise GraphError("graph has no spanning tree")
        root = min(roots)
    if root not in roots:
        raise GraphError(f"vertex {root} is not the root of a spanning tree")

    parent: dict[int, int] = {}
    order = [root]
    label = {root: (1, 1)}
    discovered = {root}
    level, depth = [root], 1
    while level:
        rank = {v: i for i, v in enumerate(level)}
        fresh = {v for u in level for v in g.successors(u) if v not in discovered}
        for v in fresh:
            parent[v] = min(u for u in g.predecessors(v) if u in rank)
        nxt = sorted(fresh, key=lambda v: (rank[parent[v]], v))
        depth += 1
        for j, v in enumerate(nxt, start=1):
            label[v] = (depth, j)
        order.extend(nxt)
        discovered.update(fresh)
        level = nxt
    return SpanningTree(root=root, parent=parent, order=tuple(order), label=label)


# --------------------------------------------------------------------------
# Laplacian


def build_laplacian(g: DiGraph) -> np.ndarray:
    """Laplacian with ``l_ij = -w(j -> i)``; rows follow ``g.vertices``.

    The diagonal is the negated sum of the row's off-diagonals, so ``L @ 1`` is
    zero to rounding of that sum.
    """
    index = {v: i for i, v in enumerate(g.vertices)}
    lap = np.zeros((g.n, g.n))
    for e in g.edges:
        lap[index[e.dst], index[e.src]] = -e.w
    np.fill_diagonal(lap, 0.0)
    lap[np.diag_indices(g.n)] = -lap.sum(axis=1)
    return lap
