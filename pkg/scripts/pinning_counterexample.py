"""Pinned-Laplacian stability with and without full reachability from the pinned set.

A pinned component next to an unpinned isolated vertex keeps a zero
eigenvalue, so ``-L + Lambda`` is not Hurwitz even though ``Lambda != 0``.
The script prints the spectra and the time-domain behaviour of both cases.
"""

import json

import numpy as np

from structcons.dynamics import simulate_linear
from structcons.graph import DiGraph, build_laplacian
from structcons.spectral import PinnedMatrix, is_hurwitz, spectrum


def report(name: str, g: DiGraph, lam: dict[int, float]) -> dict:
    p = PinnedMatrix.from_laplacian(build_laplacian(g), lam)
    traj = simulate_linear(p.a, np.ones(g.n), dt=1e-2, horizon=50.0)
    return {
        "case": name,
        "hurwitz": is_hurwitz(p).hurwitz,
        "eigenvalues": spectrum(p.a).to_dict()["eigenvalues"],
        "final_state": traj.final.tolist(),
    }


def main():
    cases = [
        report("pinned pair plus isolated vertex", DiGraph.dense(3, [(1, 2), (2, 1)]), {0: -1.0}),
        report("pinned vertex reaches all", DiGraph.dense(3, [(1, 2), (2, 1), (2, 3)]), {0: -1.0}),
    ]
    for case in cases:
        print(json.dumps(case))


if __name__ == "__main__":
    main()
