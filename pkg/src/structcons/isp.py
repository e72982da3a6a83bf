"""Grid-based checks of the input-state-pair properties of a coupling ``phi(v, r)``.

The four properties are:

1. ``phi`` is differentiable;
2. ``phi(v, r) == 0`` exactly when ``v == r``;
3. ``phi(v, r) == -phi(r, v)``;
4. ``(v - r) * phi(v, r) < 0`` whenever ``v != r``.

Differentiability cannot be observed from samples. Property 1 is checked as a
convergence-order test instead: on shared grid nodes the largest second
difference of a C^2 function shrinks about fourfold when the spacing halves,
while a kink gives roughly twofold and a jump either no shrinkage or an
unbounded ratio when the fine stencil misses it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

DEFAULT_DOMAIN = (-2.0, 2.0, -2.0, 2.0)
DEFAULT_GRID_N = 64
DEFAULT_TOL = 1e-9
# second differences below this (relative to max |phi|) count as an affine function
_AFFINE_FLOOR = 1e-8
_ORDER_RATIO_BAND = (3.0, 5.0)


class IspEvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class IspCandidate:
    name: str
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    domain: tuple[float, float, float, float] = DEFAULT_DOMAIN
    """``(v_lo, v_hi, r_lo, r_hi)``."""
    nodes: tuple[np.ndarray, np.ndarray] | None = field(default=None, compare=False)
    """Sample grid of a tabulated candidate; checks then run on these nodes."""

    def __post_init__(self):
        v_lo, v_hi, r_lo, r_hi = self.domain
        if not (v_lo < v_hi and r_lo < r_hi):
            raise ValueError(f"degenerate domain {self.domain} for candidate {self.name!r}")

    def __call__(self, v, r):
        return self.func(np.asarray(v, dtype=float), np.asarray(r, dtype=float))


@dataclass(frozen=True)
class PropertyVerdict:
    passed: bool
    witness: tuple[float, float] | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"passed": self.passed, "witness": None if self.witness is None else list(self.witness), "detail": self.detail}


@dataclass(frozen=True)
class IspReport:
    candidate: str
    properties: dict[int, PropertyVerdict]
    grid_n: int
    tol: float

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties.values())

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate,
            "passed": self.passed,
            "grid_n": self.grid_n,
            "tol": self.tol,
            "properties": {str(k): v.to_dict() for k, v in sorted(self.properties.items())},
        }


def builtin_candidates(gain: float = 1.0) -> list[IspCandidate]:
    tan_edge = 1.4  # stays clear of the poles at +-pi/2
    return [
        IspCandidate("linear", lambda v, r: -gain * v + gain * r),
        IspCandidate("cubic", lambda v, r: -(v**3) + r**3),
        IspCandidate("tan", lambda v, r: -np.tan(v) + np.tan(r), (-tan_edge, tan_edge, -tan_edge, tan_edge)),
        IspCandidate("tanh", lambda v, r: np.tanh(v - r)),
        IspCandidate("neg_tanh", lambda v, r: -np.tanh(v - r)),
    ]


def get_builtin(name: str) -> IspCandidate:
    for c in builtin_candidates():
        if c.name == name:
            return c
    raise KeyError(f"unknown built-in candidate {name!r}; choose from {[c.name for c in builtin_candidates()]}")


def candidate_from_table(name: str, text: str) -> IspCandidate:
    """Tabulated candidate from CSV with columns ``v, r, phi`` covering a full rectangular grid."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or not {"v", "r", "phi"} <= set(rows[0]):
        raise ValueError("table must have a header with columns v, r, phi")
    try:
        data = np.array([[float(row["v"]), float(row["r"]), float(row["phi"])] for row in rows])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"non-numeric table entry: {exc}") from exc
    vs, rs = np.unique(data[:, 0]), np.unique(data[:, 1])
    if len(vs) * len(rs) != len(data) or len(vs) < 3 or len(rs) < 3:
        raise ValueError("table must cover a full rectangular grid of at least 3x3 (v, r) samples")
    values = np.full((len(vs), len(rs)), np.nan)
    values[np.searchsorted(vs, data[:, 0]), np.searchsorted(rs, data[:, 1])] = data[:, 2]
    if np.isnan(values).any():
        raise ValueError("table has repeated (v, r) samples")
    interp = RegularGridInterpolator((vs, rs), values)

    def func(v, r):
        v, r = np.broadcast_arrays(v, r)
        return interp(np.stack([v.ravel(), r.ravel()], axis=-1)).reshape(v.shape)

    return IspCandidate(name, func, (vs[0], vs[-1], rs[0], rs[-1]), nodes=(vs, rs))


def _evaluate(c: IspCandidate, v, r) -> np.ndarray:
    with np.errstate(all="ignore"):
        phi = np.asarray(c(v, r), dtype=float)
    bad = ~np.isfinite(phi)
    if bad.any():
        i = np.argwhere(bad)[0]
        vv, rr = np.broadcast_arrays(v, r)
        raise IspEvaluationError(f"{c.name}: non-finite value at (v, r) = ({vv[tuple(i)]}, {rr[tuple(i)]})")
    return phi


def _second_differences(phi: np.ndarray, stride: int) -> np.ndarray:
    """``|second difference|`` with spacing ``stride``, centred on the even (coarse) nodes of both axes."""
    n_v, n_r = phi.shape
    cv = np.arange(2, n_v - 2, 2)
    cr = np.arange(2, n_r - 2, 2)
    d_v = np.abs(phi[cv - stride][:, cr] - 2 * phi[cv][:, cr] + phi[cv + stride][:, cr])
    d_r = np.abs(phi[cv][:, cr - stride] - 2 * phi[cv][:, cr] + phi[cv][:, cr + stride])
    return np.maximum(d_v, d_r)


def check_isp(c: IspCandidate, grid_n: int = DEFAULT_GRID_N, tol: float = DEFAULT_TOL) -> IspReport:
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    v_lo, v_hi, r_lo, r_hi = c.domain
    if c.nodes is not None:
        vs, rs = c.nodes
    else:
        # the fine grid halves the spacing of the grid_n grid
        vs = np.linspace(v_lo, v_hi, 2 * grid_n - 1)
        rs = np.linspace(r_lo, r_hi, 2 * grid_n - 1)
    V, R = np.meshgrid(vs, rs, indexing="ij")
    phi = _evaluate(c, V, R)
    props = {}

    # 1) smoothness via second-difference convergence order on shared centres
    coarse_d = _second_differences(phi, 2)
    fine_d = _second_differences(phi, 1)
    coarse, fine = coarse_d.max(initial=0.0), fine_d.max(initial=0.0)
    floor = _AFFINE_FLOOR * max(1.0, np.abs(phi).max())
    if coarse <= floor:
        props[1] = PropertyVerdict(True, detail="second differences vanish (affine on grid)")
    else:
        ratio = coarse / fine if fine > 0 else np.inf
        lo, hi = _ORDER_RATIO_BAND
        if lo <= ratio <= hi:
            props[1] = PropertyVerdict(True, detail=f"second-difference ratio {ratio:.3g}")
        else:
            i, j = np.unravel_index(np.argmax(coarse_d), coarse_d.shape)
            props[1] = PropertyVerdict(False, (float(vs[2 * i + 2]), float(rs[2 * j + 2])), f"second-difference ratio {ratio:.3g} outside [{lo:g}, {hi:g}]")

    # 2) zero set is exactly the diagonal
    lo, hi = max(v_lo, r_lo), min(v_hi, r_hi)
    diag = np.linspace(lo, hi, len(vs)) if lo < hi else np.array([])
    if c.nodes is not None:
        diag = np.intersect1d(vs, rs)
    on_diag = _evaluate(c, diag, diag) if len(diag) else np.array([])
    off = np.abs(V - R) > tol
    if len(on_diag) and np.abs(on_diag).max() > tol:
        i = int(np.argmax(np.abs(on_diag)))
        props[2] = PropertyVerdict(False, (float(diag[i]), float(diag[i])), f"phi(v, v) = {on_diag[i]:.3g}")
    elif np.any(off & (np.abs(phi) <= tol)):
        i, j = np.argwhere(off & (np.abs(phi) <= tol))[0]
        props[2] = PropertyVerdict(False, (float(vs[i]), float(rs[j])), "phi vanishes off the diagonal")
    else:
        props[2] = PropertyVerdict(True)

    # 3) antisymmetry, on points whose mirror lies in the domain
    mirror = (R >= v_lo) & (R <= v_hi) & (V >= r_lo) & (V <= r_hi)
    swapped = _evaluate(c, np.where(mirror, R, V), np.where(mirror, V, R))
    gap = np.where(mirror, np.abs(phi + swapped), 0.0)
    if gap.max(initial=0.0) > tol:
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        props[3] = PropertyVerdict(False, (float(vs[i]), float(rs[j])), f"|phi(v,r) + phi(r,v)| = {gap[i, j]:.3g}")
    else:
        props[3] = PropertyVerdict(True)

    # 4) restoring sign
    sign = np.where(off, (V - R) * phi, -np.inf)
    if sign.max() >= 0:
        i, j = np.unravel_index(np.argmax(sign), sign.shape)
        props[4] = PropertyVerdict(False, (float(vs[i]), float(rs[j])), f"(v - r) phi = {sign[i, j]:.3g} >= 0")
    else:
        props[4] = PropertyVerdict(True)

    return IspReport(c.name, props, grid_n, tol)
