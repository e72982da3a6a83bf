"""Certificates over seeded random spanning-tree graphs.

Reports the conclusion tally, the worst predicted/simulated value gap, the
structure-class histogram and how often blended steps fail the literal
isolated fed-back consensus check.
"""

import argparse
import json
import time
from collections import Counter
from dataclasses import asdict, dataclass

import numpy as np

from structcons.certificate import CertificateConfig, build_certificate
from structcons.decomposition import StructureClass
from structcons.random_graphs import spanning_tree_graph


@dataclass(frozen=True)
class SweepConfig:
    count: int = 200
    seed: int = 20240601
    dt: float = 1e-3


def run(cfg: SweepConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    conclusions, classes = Counter(), Counter()
    literal_failures = blended = 0
    worst_gap = 0.0
    start = time.perf_counter()
    for i in range(cfg.count):
        cert = build_certificate(spanning_tree_graph(rng), CertificateConfig(dt=cfg.dt, seed=i))
        conclusions[cert.conclusion.value] += 1
        if cert.predicted_value is not None and cert.simulated_value is not None:
            worst_gap = max(worst_gap, abs(cert.predicted_value - cert.simulated_value))
        for step in cert.steps:
            classes[step.structure.value] += 1
            if step.structure is StructureClass.BLENDED:
                blended += 1
                literal_failures += not step.notes["assumption3_literal"]
    return {
        "config": asdict(cfg),
        "conclusions": dict(conclusions),
        "worst_value_gap": worst_gap,
        "classes": dict(classes),
        "blended_steps": blended,
        "blended_literal_isolation_failures": literal_failures,
        "seconds": round(time.perf_counter() - start, 2),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=SweepConfig.count)
    parser.add_argument("--seed", type=int, default=SweepConfig.seed)
    parser.add_argument("--dt", type=float, default=SweepConfig.dt)
    args = parser.parse_args()
    print(json.dumps(run(SweepConfig(args.count, args.seed, args.dt)), indent=2))


if __name__ == "__main__":
    main()
