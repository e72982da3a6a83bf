"""Vertex-by-vertex reconstruction of a graph along a width-first spanning tree.

Each vertex is inserted in tree order together with every edge joining it to the
vertices already present. The insertion is classified as one of the three basic
structures: cascade (edges only into the new vertex), interconnected (the new
vertex also feeds back and reaches every vertex), or blended (it feeds back but
reaches only part of the graph).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .graph import DiGraph, Edge, GraphError, SpanningTree, reachable_from, spanning_roots


class StructureClass(str, enum.Enum):
    ROOT = "root"
    CASCADE = "cascade"
    INTERCONNECTED = "interconnected"
    BLENDED = "blended"


@dataclass(frozen=True)
class DecompositionStep:
    k: int
    vertex: int
    e_head: tuple[Edge, ...]
    """Edges from the existing graph into ``vertex``."""
    e_tail: tuple[Edge, ...]
    """Edges from ``vertex`` back into the existing graph."""
    structure: StructureClass
    residual_before: frozenset[tuple[int, int]]
    residual_after: frozenset[tuple[int, int]]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "vertex": self.vertex,
            "class": self.structure.value,
            "e_head": [[e.src, e.dst] for e in self.e_head],
            "e_tail": [[e.src, e.dst] for e in self.e_tail],
        }


@dataclass(frozen=True)
class Decomposition:
    tree: SpanningTree
    steps: tuple[DecompositionStep, ...]

    @property
    def classes(self) -> list[StructureClass]:
        return [s.structure for s in self.steps]

    def prefix_vertices(self, k: int) -> tuple[int, ...]:
        return tuple(s.vertex for s in self.steps[:k])

    def prefix_graph(self, k: int) -> DiGraph:
        """``G^k`` rebuilt from the edges consumed by the first ``k`` steps."""
        edges = [e for s in self.steps[:k] for e in s.e_head + s.e_tail]
        return DiGraph(self.prefix_vertices(k), tuple(edges))

    def to_dict(self) -> dict:
        return {"root": self.tree.root, "steps": [s.to_dict() for s in self.steps]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def classify_step(g_prefix: DiGraph, vertex: int, e_head, e_tail) -> StructureClass:
    """Classify the insertion of ``vertex`` that produced ``g_prefix`` (= ``G^k``)."""
    if g_prefix.n == 1:
        return StructureClass.ROOT
    if not e_tail:
        return StructureClass.CASCADE
    if reachable_from(g_prefix, vertex) == set(g_prefix.vertices):
        return StructureClass.INTERCONNECTED
    return StructureClass.BLENDED


def decompose(g: DiGraph, tree: SpanningTree) -> Decomposition:
    if sorted(tree.order) != list(g.vertices):
        raise GraphError("spanning tree does not cover the graph's vertices")
    pairs = g.pairs()
    if not tree.edges <= pairs:
        raise GraphError(f"tree edges {sorted(tree.edges - pairs)} are not edges of the graph")

    residual = pairs - tree.edges
    present: set[int] = set()
    steps = []
    for k, v in enumerate(tree.order, start=1):
        e_head = tuple(e for e in g.edges if e.dst == v and e.src in present)
        e_tail = tuple(e for e in g.edges if e.src == v and e.dst in present)
        present.add(v)
        consumed = {e.pair for e in e_head + e_tail} & residual
        after = residual - consumed
        structure = classify_step(g.subgraph(present), v, e_head, e_tail)
        steps.append(DecompositionStep(k, v, e_head, e_tail, structure, residual, after))
        residual = after
    return Decomposition(tree=tree, steps=tuple(steps))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def verify_decomposition(g: DiGraph, d: Decomposition) -> VerificationReport:
    """Re-check a decomposition against its host graph without trusting its construction."""
    checks = []
    order = [s.vertex for s in d.steps]

    ok = sorted(order) == list(g.vertices) and len(set(order)) == len(order)
    checks.append(CheckResult("vertex_coverage", ok, "" if ok else f"step vertices {order}"))

    problems = []
    present: set[int] = set()
    for s in d.steps:
        for e in s.e_head:
            if e.dst != s.vertex or e.src not in present:
                problems.append(f"step {s.k}: head edge {e.pair} does not enter the new vertex from G^{s.k - 1}")
        for e in s.e_tail:
            if e.src != s.vertex or e.dst not in present:
                problems.append(f"step {s.k}: tail edge {e.pair} does not leave the new vertex into G^{s.k - 1}")
        if {e.pair for e in s.e_head} & {e.pair for e in s.e_tail}:
            problems.append(f"step {s.k}: head and tail edge sets overlap")
        present.add(s.vertex)
    checks.append(CheckResult("edge_orientation", not problems, "; ".join(problems)))

    consumed = [e for s in d.steps for e in s.e_head + s.e_tail]
    consumed_pairs = [e.pair for e in consumed]
    missing = g.pairs() - set(consumed_pairs)
    extra = set(consumed_pairs) - g.pairs()
    dupes = len(consumed_pairs) - len(set(consumed_pairs))
    ok = not missing and not extra and dupes == 0
    checks.append(
        CheckResult(
            "edge_reconstruction",
            ok,
            "" if ok else f"missing {sorted(missing)}, extra {sorted(extra)}, duplicates {dupes}",
        )
    )

    bad = [s.k for s in d.steps[1:] if (d.tree.parent.get(s.vertex), s.vertex) not in {e.pair for e in s.e_head}]
    checks.append(CheckResult("tree_edge_in_head", not bad, f"steps {bad}" if bad else ""))

    no_tree = []
    for k in range(1, len(d.steps) + 1):
        try:
            prefix = d.prefix_graph(k)
        except GraphError as exc:
            no_tree.append(f"G^{k}: {exc}")
            continue
        if not spanning_roots(prefix):
            no_tree.append(f"G^{k}")
    checks.append(CheckResult("prefix_spanning_trees", not no_tree, ", ".join(no_tree)))

    problems = []
    expected = g.pairs() - d.tree.edges
    for s in d.steps:
        if s.residual_before != expected:
            problems.append(f"step {s.k}: residual_before does not continue the previous step")
        tree_pair = (d.tree.parent.get(s.vertex), s.vertex)
        used = {e.pair for e in s.e_head + s.e_tail} - {tree_pair}
        if s.residual_after != s.residual_before - used:
            problems.append(f"step {s.k}: residual_after is not residual_before minus consumed edges")
        if not s.residual_after <= s.residual_before:
            problems.append(f"step {s.k}: residual grew")
        expected = s.residual_after
    if d.steps and d.steps[-1].residual_after:
        problems.append(f"final residual not empty: {sorted(d.steps[-1].residual_after)}")
    checks.append(CheckResult("residual_bookkeeping", not problems, "; ".join(problems)))

    return VerificationReport(tuple(checks))
