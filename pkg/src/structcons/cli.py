"""Command-line front end.

Machine-readable results go to stdout (one JSON object per line, or CSV for
``simulate``); human-readable summaries go to stderr.

Exit codes: 0 success / consensus, 1 input error, 2 negative outcome (no
spanning tree, or a certificate that could not conclude consensus).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .certificate import CertificateConfig, Conclusion, build_certificate
from .decomposition import decompose
from .dynamics import DEFAULT_DT, DEFAULT_TOL, DivergenceError, consensus_verdict, default_horizon, simulate_linear
from .graph import GraphError, build_laplacian, extract_spanning_tree, load_graph, spanning_roots
from .isp import DEFAULT_GRID_N, DEFAULT_TOL as ISP_TOL, IspEvaluationError, candidate_from_table, check_isp, get_builtin
from .spectral import spectrum

SEED_ENV = "STRUCTCONS_SEED"
EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE = 0, 1, 2


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path | None = None
    format: str | None = None
    dt: float = DEFAULT_DT
    horizon: float | None = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    out: Path | None = None
    x0: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise InputError(f"--dt must be positive, got {self.dt}")
        if not self.tol > 0:
            raise InputError(f"--tol must be positive, got {self.tol}")
        if self.horizon is not None and not self.horizon > self.dt:
            raise InputError(f"--horizon ({self.horizon}) must exceed --dt ({self.dt})")


def _parse_x0(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.replace(" ", "").split(",") if tok)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--x0 expects comma-separated numbers, got {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _add_graph_args(p: argparse.ArgumentParser):
    p.add_argument("input", type=Path, help="graph file (JSON schema or DOT digraph)")
    p.add_argument("--format", choices=("json", "dot"), help="input format (default: from file extension, else json)")
    p.add_argument("--out", type=Path, help="write the main output here instead of stdout")


def _add_sim_args(p: argparse.ArgumentParser, x0: bool = True):
    p.add_argument("--dt", type=float, default=DEFAULT_DT, help=f"RK4 step size in seconds (default {DEFAULT_DT:g})")
    p.add_argument("--horizon", type=float, help="simulation horizon in seconds (default: 40 / spectral gap, capped at 1e4)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help=f"consensus spread tolerance (default {DEFAULT_TOL:g})")
    p.add_argument("--seed", type=int, help=f"seed for random initial states (default: ${SEED_ENV} or 0)")
    if x0:
        p.add_argument("--x0", type=_parse_x0, help="initial states as comma-separated values (default: seeded uniform in [0, 1])")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="structcons", description="Structural consensus analysis of weighted digraphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="rebuild the graph along a spanning tree and classify each step")
    _add_graph_args(p)

    p = sub.add_parser("analyze", help="emit a consensus certificate")
    _add_graph_args(p)
    _add_sim_args(p)

    p = sub.add_parser("simulate", help="simulate x' = -L x and write the trajectory as CSV")
    _add_graph_args(p)
    _add_sim_args(p)

    p = sub.add_parser("spectrum", help="eigenvalues of the graph Laplacian")
    _add_graph_args(p)

    p = sub.add_parser("check-isp", help="check input-state-pair properties of a coupling function")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--candidate", help="built-in candidate: linear, cubic, tan, tanh, neg_tanh")
    src.add_argument("--table", type=Path, help="CSV table with columns v, r, phi on a rectangular grid")
    p.add_argument("--grid-n", type=int, default=DEFAULT_GRID_N, help=f"grid resolution per axis, >= 16 (default {DEFAULT_GRID_N})")
    p.add_argument("--tol", type=float, default=ISP_TOL, help=f"numerical tolerance (default {ISP_TOL:g})")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    return parser


def _emit(obj, out: Path | None):
    text = json.dumps(obj)
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n")


def _config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        format=getattr(args, "format", None),
        dt=getattr(args, "dt", DEFAULT_DT),
        horizon=getattr(args, "horizon", None),
        tol=args.tol if hasattr(args, "tol") else DEFAULT_TOL,
        seed=args.seed if getattr(args, "seed", None) is not None else _default_seed(),
        out=args.out,
        x0=getattr(args, "x0", None),
    )


def _load(cfg: RunConfig):
    try:
        return load_graph(cfg.input, cfg.format)
    except OSError as exc:
        raise InputError(f"cannot read {cfg.input}: {exc}") from exc
    except GraphError as exc:
        raise InputError(f"{cfg.input}: {exc}") from exc


def cmd_decompose(cfg: RunConfig) -> int:
    g = _load(cfg)
    roots = spanning_roots(g)
    if not roots:
        print(f"no spanning tree: {g.n} vertices, no vertex reaches all others", file=sys.stderr)
        _emit({"error": "no_spanning_tree", "n": g.n}, cfg.out)
        return EXIT_NEGATIVE
    d = decompose(g, extract_spanning_tree(g, min(roots)))
    _emit(d.to_dict(), cfg.out)
    print("classes: " + ", ".join(c.value for c in d.classes), file=sys.stderr)
    return EXIT_OK


def cmd_analyze(cfg: RunConfig) -> int:
    g = _load(cfg)
    if cfg.x0 is not None and len(cfg.x0) != g.n:
        raise InputError(f"--x0 has {len(cfg.x0)} values, graph has {g.n} vertices")
    cert = build_certificate(g, CertificateConfig(dt=cfg.dt, tol=cfg.tol, horizon=cfg.horizon, seed=cfg.seed, x0=cfg.x0))
    _emit(cert.to_dict(), cfg.out)
    print(f"conclusion: {cert.conclusion.value}, predicted {cert.predicted_value}, simulated {cert.simulated_value}", file=sys.stderr)
    if cert.conclusion is Conclusion.CONSENSUS:
        return EXIT_OK
    return EXIT_NEGATIVE


def cmd_simulate(cfg: RunConfig) -> int:
    g = _load(cfg)
    if cfg.x0 is None:
        x0 = np.random.default_rng([cfg.seed, 0]).uniform(0.0, 1.0, g.n)
    elif len(cfg.x0) != g.n:
        raise InputError(f"--x0 has {len(cfg.x0)} values, graph has {g.n} vertices")
    else:
        x0 = np.asarray(cfg.x0)
    a = -build_laplacian(g)
    horizon = cfg.horizon if cfg.horizon is not None else max(default_horizon(a), 10 * cfg.dt)
    traj = simulate_linear(a, x0, cfg.dt, horizon)
    if cfg.out is None:
        traj.to_csv(sys.stdout)
    else:
        with open(cfg.out, "w") as fh:
            traj.to_csv(fh)
    verdict = consensus_verdict(traj, cfg.tol)
    print(json.dumps(verdict.to_dict()))
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    g = _load(cfg)
    _emit(spectrum(build_laplacian(g)).to_dict(), cfg.out)
    return EXIT_OK


def cmd_check_isp(args) -> int:
    if args.table is not None:
        try:
            cand = candidate_from_table(args.table.stem, args.table.read_text())
        except (OSError, ValueError) as exc:
            raise InputError(f"{args.table}: {exc}") from exc
    else:
        try:
            cand = get_builtin(args.candidate)
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
    try:
        report = check_isp(cand, args.grid_n, args.tol)
    except (IspEvaluationError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    _emit(report.to_dict(), args.out)
    failed = [k for k, v in report.properties.items() if not v.passed]
    print(f"{cand.name}: " + ("all properties hold" if not failed else f"properties {failed} fail"), file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "decompose": cmd_decompose,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are input errors here
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if args.command == "check-isp":
            return cmd_check_isp(args)
        return COMMANDS[args.command](_config(args))
    except (InputError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
