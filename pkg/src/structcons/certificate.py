"""Executable consensus certificate following the recursive structural argument.

The graph is rebuilt along a width-first spanning tree; every insertion step is
checked against the lemma for its structure and the full system is simulated to
compare the reached value with the left-null-vector prediction.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .decomposition import Decomposition, StructureClass, decompose, verify_decomposition
from .dynamics import DEFAULT_DT, DEFAULT_TOL, HORIZON_CAP, consensus_verdict, default_horizon, simulate_linear
from .graph import DiGraph, build_laplacian, extract_spanning_tree, reachable_from, spanning_roots
from .spectral import consensus_value_oracle, is_hurwitz

LEMMA_FOR = {
    StructureClass.ROOT: "Base",
    StructureClass.CASCADE: "Lemma1",
    StructureClass.INTERCONNECTED: "Lemma3",
    StructureClass.BLENDED: "Lemma4",
}


class PartitionError(ValueError):
    pass


class Conclusion(str, enum.Enum):
    CONSENSUS = "consensus"
    NO_SPANNING_TREE = "no_spanning_tree"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CertificateConfig:
    dt: float = DEFAULT_DT
    tol: float = DEFAULT_TOL
    horizon: float | None = None
    """Fixed simulation horizon; None derives ``40 / spectral gap`` per system."""
    horizon_cap: float = HORIZON_CAP
    seed: int = 0
    x0: tuple[float, ...] | None = None
    value_tol: float = 1e-4
    """Allowed gap between predicted and simulated consensus value."""

    def __post_init__(self):
        if not self.dt > 0 or not self.tol > 0:
            raise ValueError("dt and tol must be positive")
        if self.horizon is not None and not self.horizon > self.dt:
            raise ValueError("horizon must exceed dt")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    evidence: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "evidence": self.evidence}


def _ids(vs) -> list[int]:
    return sorted(int(v) for v in vs)


def _horizon(a: np.ndarray, cfg: CertificateConfig) -> float:
    if cfg.horizon is not None:
        return cfg.horizon
    return max(default_horizon(a, cfg.horizon_cap), 10 * cfg.dt)


def check_assumption1(g_prefix: DiGraph, cfg: CertificateConfig = CertificateConfig(), rng=None, x0=None) -> Check:
    """The subsystem has a spanning tree and its simulation reaches consensus."""
    if g_prefix.n == 0:
        return Check("assumption1", False, {"reason": "empty subsystem"})
    roots = spanning_roots(g_prefix)
    if x0 is None:
        rng = np.random.default_rng(cfg.seed) if rng is None else rng
        x0 = rng.uniform(0.0, 1.0, g_prefix.n)
    a = -build_laplacian(g_prefix)
    traj = simulate_linear(a, x0, cfg.dt, _horizon(a, cfg))
    verdict = consensus_verdict(traj, cfg.tol)
    return Check(
        "assumption1",
        bool(roots) and verdict.achieved,
        {"vertices": list(g_prefix.vertices), "spanning_roots": _ids(roots), "simulation": verdict.to_dict()},
    )


def check_assumption2(g_new: DiGraph, z: int) -> Check:
    """``z`` reaches every vertex of the interconnected system."""
    if z not in g_new.vertices:
        raise ValueError(f"vertex {z} is not in the graph")
    unreached = set(g_new.vertices) - reachable_from(g_new, z)
    return Check("assumption2", not unreached, {"root": z, "unreached": _ids(unreached)})


def driving_matrices(g: DiGraph, driven, drivers) -> tuple[np.ndarray, np.ndarray]:
    """``(A, B)`` with ``x_driven' = A x_driven + B x_drivers`` for the protocol on ``g``."""
    driven, drivers = _ids(driven), _ids(drivers)
    row = {v: i for i, v in enumerate(driven)}
    col = {v: i for i, v in enumerate(drivers)}
    a = -build_laplacian(g.subgraph(driven))
    b = np.zeros((len(driven), len(drivers)))
    for e in g.edges:
        if e.dst in row and e.src in col:
            b[row[e.dst], col[e.src]] += e.w
            a[row[e.dst], row[e.dst]] -= e.w
    return a, b


def check_assumption3(g_new: DiGraph, z: int, partition, cfg: CertificateConfig = CertificateConfig(), rng=None) -> Check:
    """Feeding sub-network reaches consensus, fed-back sub-network does on its own, and ``z`` roots it together with itself.

    ``partition = (feeding, fed_back)`` must cover every vertex except ``z`` and
    at least one edge must run from ``feeding`` into ``fed_back`` or ``z``.
    """
    feeding, fed_back = (set(p) for p in partition)
    others = set(g_new.vertices) - {z}
    if z not in g_new.vertices or feeding & fed_back or feeding | fed_back != others or not feeding or not fed_back:
        raise PartitionError(f"({_ids(feeding)}, {_ids(fed_back)}) is not a partition of {_ids(others)}")
    links = [e.pair for e in g_new.edges if e.src in feeding and (e.dst in fed_back or e.dst == z)]
    if not links:
        raise PartitionError("no edge from the feeding sub-network into the rest")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    sub = {
        "feeding_consensus": check_assumption1(g_new.subgraph(feeding), cfg, rng),
        "fed_back_isolated_consensus": check_assumption1(g_new.subgraph(fed_back), cfg, rng),
        "fed_back_rooted_at_new_vertex": check_assumption2(g_new.subgraph(fed_back | {z}), z),
    }
    return Check(
        "assumption3",
        all(sub.values()),
        {"feeding": _ids(feeding), "fed_back": _ids(fed_back), "links": [list(p) for p in links], "parts": {k: v.to_dict() for k, v in sub.items()}},
    )


def blended_partition(g_new: DiGraph, z: int) -> tuple[set[int], set[int]]:
    """``(feeding, fed_back)``: fed-back vertices are those reachable from ``z``."""
    fed_back = reachable_from(g_new, z) - {z}
    return set(g_new.vertices) - fed_back - {z}, fed_back


def _hurwitz_check(name: str, a: np.ndarray, extra: dict) -> Check:
    res = is_hurwitz(a)
    return Check(name, res.hurwitz, {**extra, "witness": [res.witness.real, res.witness.imag]})


@dataclass(frozen=True)
class StepVerdict:
    k: int
    vertex: int
    structure: StructureClass
    lemma: str
    assumption_checks: tuple[Check, ...]
    notes: dict = field(default_factory=dict)
    """Non-gating observations."""

    @property
    def passed(self) -> bool:
        return all(self.assumption_checks)

    def to_dict(self) -> dict:
        d = {
            "k": self.k,
            "vertex": self.vertex,
            "class": self.structure.value,
            "lemma": self.lemma,
            "passed": self.passed,
            "assumption_checks": [c.to_dict() for c in self.assumption_checks],
        }
        if self.notes:
            d["notes"] = self.notes
        return d


def verify_step(g: DiGraph, d: Decomposition, k: int, cfg: CertificateConfig) -> StepVerdict:
    step = d.steps[k - 1]
    z = step.vertex
    g_k = g.subgraph(d.prefix_vertices(k))
    prior = set(d.prefix_vertices(k - 1))
    rng = np.random.default_rng([cfg.seed, k])
    checks: list[Check] = []
    notes: dict = {}

    if step.structure is StructureClass.ROOT:
        checks.append(check_assumption1(g_k, cfg, rng))
    elif step.structure is StructureClass.CASCADE:
        checks.append(check_assumption1(g.subgraph(prior), cfg, rng))
    elif step.structure is StructureClass.INTERCONNECTED:
        checks.append(check_assumption2(g_k, z))
        # error dynamics of the existing agents relative to the new leader
        a, _ = driving_matrices(g_k, prior, [z])
        checks.append(_hurwitz_check("lemma2_error_system", a, {"pinned_by": z}))
    else:
        feeding, fed_back = blended_partition(g_k, z)
        a3 = check_assumption3(g_k, z, (feeding, fed_back), cfg, rng)
        parts = a3.evidence["parts"]
        checks.append(Check("assumption3_feeding_consensus", parts["feeding_consensus"]["passed"], parts["feeding_consensus"]["evidence"]))
        checks.append(
            Check(
                "assumption3_fed_back_rooted",
                parts["fed_back_rooted_at_new_vertex"]["passed"],
                parts["fed_back_rooted_at_new_vertex"]["evidence"],
            )
        )
        # the driven sub-network must be ISS w.r.t. the feeding one with unit DC gain
        a, b = driving_matrices(g_k, fed_back | {z}, feeding)
        hurwitz = _hurwitz_check("lemma2_driven_subnetwork", a, {"driven": _ids(fed_back | {z}), "drivers": _ids(feeding)})
        checks.append(hurwitz)
        if hurwitz:
            gain = np.linalg.solve(a, -b @ np.ones(b.shape[1]))
            err = float(np.max(np.abs(gain - 1.0)))
            checks.append(Check("lemma4_unit_gain", err <= 1e-9, {"max_abs_deviation": err}))
        notes["assumption3_literal"] = a3.passed
        notes["fed_back_isolated_consensus"] = parts["fed_back_isolated_consensus"]["passed"]
        notes["partition"] = {"feeding": _ids(feeding), "fed_back": _ids(fed_back)}
    return StepVerdict(k, z, step.structure, LEMMA_FOR[step.structure], tuple(checks), notes)


@dataclass(frozen=True)
class Certificate:
    n: int
    m: int
    roots: tuple[int, ...]
    decomposition: Decomposition | None
    steps: tuple[StepVerdict, ...]
    conclusion: Conclusion
    predicted_value: float | None
    simulated_value: float | None
    seed: int
    x0: tuple[float, ...] | None = None
    final_spread: float | None = None

    def to_dict(self) -> dict:
        return {
            "conclusion": self.conclusion.value,
            "predicted_value": self.predicted_value,
            "simulated_value": self.simulated_value,
            "seed": self.seed,
            "steps": [s.to_dict() for s in self.steps],
            "graph": {"n": self.n, "m": self.m, "spanning_roots": list(self.roots)},
            "decomposition": None if self.decomposition is None else self.decomposition.to_dict(),
            "x0": None if self.x0 is None else list(self.x0),
            "final_spread": self.final_spread,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def build_certificate(g: DiGraph, cfg: CertificateConfig = CertificateConfig()) -> Certificate:
    roots = tuple(sorted(spanning_roots(g)))
    if cfg.x0 is not None:
        if len(cfg.x0) != g.n:
            raise ValueError(f"x0 has {len(cfg.x0)} entries, graph has {g.n} vertices")
        x0 = np.asarray(cfg.x0, dtype=float)
    else:
        x0 = np.random.default_rng([cfg.seed, 0]).uniform(0.0, 1.0, g.n)
    if not roots:
        return Certificate(g.n, len(g.edges), roots, None, (), Conclusion.NO_SPANNING_TREE, None, None, cfg.seed, tuple(x0.tolist()))

    d = decompose(g, extract_spanning_tree(g, roots[0]))
    report = verify_decomposition(g, d)
    steps = tuple(verify_step(g, d, k, cfg) for k in range(1, g.n + 1))

    lap = build_laplacian(g)
    predicted = consensus_value_oracle(lap, x0)
    traj = simulate_linear(-lap, x0, cfg.dt, _horizon(-lap, cfg))
    verdict = consensus_verdict(traj, cfg.tol)
    ok = (
        report.passed
        and all(s.passed for s in steps)
        and verdict.achieved
        and predicted is not None
        and abs(predicted - verdict.value) <= cfg.value_tol
    )
    return Certificate(
        n=g.n,
        m=len(g.edges),
        roots=roots,
        decomposition=d,
        steps=steps,
        conclusion=Conclusion.CONSENSUS if ok else Conclusion.INCONCLUSIVE,
        predicted_value=predicted,
        simulated_value=verdict.value,
        seed=cfg.seed,
        x0=tuple(x0.tolist()),
        final_spread=verdict.final_spread,
    )
