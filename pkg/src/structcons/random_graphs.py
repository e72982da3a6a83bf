"""Seeded random instances for the property suites and experiment scripts."""

from __future__ import annotations

import numpy as np

from .graph import DiGraph, build_laplacian, reachable_from
from .spectral import PinnedMatrix


def _weight(rng, lo=0.5, hi=2.0) -> float:
    return float(rng.uniform(lo, hi))


def _tree_edges(rng, vertices) -> list[tuple[int, int, float]]:
    perm = list(rng.permutation(vertices))
    return [(int(perm[rng.integers(0, i)]), int(perm[i]), _weight(rng)) for i in range(1, len(perm))]


def _extra_edges(rng, candidates, existing, count) -> list[tuple[int, int, float]]:
    pool = [p for p in candidates if p not in existing]
    picks = rng.choice(len(pool), size=min(count, len(pool)), replace=False) if pool else []
    return [(pool[i][0], pool[i][1], _weight(rng)) for i in sorted(picks)]


def spanning_tree_graph(rng, n: int | None = None) -> DiGraph:
    """Random spanning tree on ``n`` vertices (default: 2..8) plus up to ``n`` extra edges."""
    n = int(rng.integers(2, 9)) if n is None else n
    vertices = list(range(1, n + 1))
    edges = _tree_edges(rng, vertices)
    existing = {(u, v) for u, v, _ in edges}
    candidates = [(u, v) for u in vertices for v in vertices if u != v]
    edges += _extra_edges(rng, candidates, existing, int(rng.integers(0, n + 1)))
    return DiGraph.dense(n, edges)


def multi_source_graph(rng, n: int | None = None) -> tuple[DiGraph, list[list[int]]]:
    """Graph whose condensation has at least two source components.

    Vertices are split into groups, each carrying its own spanning tree. Extra
    edges only run from a group to a later group and never into groups 0 and 1,
    which therefore stay separate sources. Returns the graph and the groups.
    """
    n = int(rng.integers(2, 9)) if n is None else n
    n_groups = int(rng.integers(2, n + 1))
    perm = [int(v) + 1 for v in rng.permutation(n)]
    cuts = sorted(rng.choice(np.arange(1, n), size=n_groups - 1, replace=False))
    groups = [list(part) for part in np.split(np.array(perm), cuts)]
    groups = [[int(v) for v in grp] for grp in groups]
    edges = []
    for grp in groups:
        edges += _tree_edges(rng, grp)
    existing = {(u, v) for u, v, _ in edges}
    candidates = [(u, v) for gi, src in enumerate(groups) for dst in groups[max(gi + 1, 2):] for u in src for v in dst]
    candidates += [(u, v) for grp in groups for u in grp for v in grp if u != v]
    edges += _extra_edges(rng, candidates, existing, int(rng.integers(0, n + 1)))
    return DiGraph.dense(n, edges), groups


def random_digraph(rng, n: int | None = None, p: float = 0.3) -> DiGraph:
    n = int(rng.integers(2, 9)) if n is None else n
    edges = [(u, v, _weight(rng)) for u in range(1, n + 1) for v in range(1, n + 1) if u != v and rng.random() < p]
    return DiGraph.dense(n, edges)


def pinned_system(rng, n: int | None = None, reach_all: bool = True) -> tuple[DiGraph, PinnedMatrix]:
    """Random graph with a pinned set; with ``reach_all`` the pinned set reaches every vertex."""
    g = random_digraph(rng, n)
    pinned = {int(v) for v in rng.choice(g.vertices, size=int(rng.integers(1, g.n + 1)), replace=False)}
    if reach_all:
        for v in g.vertices:
            if not any(v in reachable_from(g, p) for p in pinned):
                pinned.add(v)
    lam = {v - 1: -_weight(rng) for v in sorted(pinned)}
    return g, PinnedMatrix.from_laplacian(build_laplacian(g), lam)


def stable_matrix(rng, n: int) -> np.ndarray:
    """Random matrix with spectrum in the open left half plane (shifted Gaussian)."""
    m = rng.normal(size=(n, n)) / np.sqrt(n)
    shift = np.max(np.linalg.eigvals(m).real)
    return m - (shift + 0.5) * np.eye(n)
