import pytest
import networkx as nx

from structcons.graph import DiGraph


def path3():
    return DiGraph.dense(3, [(1, 2), (2, 3)])


def pair():
    return DiGraph.dense(2, [(1, 2), (2, 1)])


def back_edge():
    """1 -> 2 <-> 3: vertex 3 feeds back into 2 but cannot reach 1."""
    return DiGraph.dense(3, [(1, 2), (2, 3), (3, 2)])


def example_five():
    """Five-vertex fixture whose insertion classes are cascade, cascade, blended, interconnected."""
    return DiGraph.dense(5, [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (4, 2), (4, 5), (5, 1)])


def to_nx(g: DiGraph) -> nx.DiGraph:
    h = nx.DiGraph()
    h.add_nodes_from(g.vertices)
    h.add_weighted_edges_from(g.edges)
    return h


def brute_roots(g: DiGraph) -> set[int]:
    h = to_nx(g)
    return {v for v in g.vertices if nx.descendants(h, v) | {v} == set(g.vertices)}


# -- acceptance reporting

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        detail = self.detail if exc is None else f"{exc_type.__name__}: {exc}".splitlines()[0]
        _ACCEPTANCE[self.number] = (self.title, exc is None, detail)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} {'PASS' if passed else 'FAIL'} [{title}] {detail}")
