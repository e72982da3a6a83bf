"""Fixed-step RK4 simulation of linear consensus dynamics and related checks."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import lfilter

from .spectral import spectrum

DEFAULT_DT = 1e-3
DEFAULT_TOL = 1e-6
HORIZON_CAP = 1e4
DIVERGENCE_LIMIT = 1e12
_BLOCK = 1024


class DivergenceError(RuntimeError):
    pass


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dt: float

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[0] != len(self.times):
            raise ValueError("states must have one row per timestamp")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def columns(self, idx) -> "Trajectory":
        return Trajectory(self.times, self.states[:, list(idx)], self.dt)

    def to_csv(self, fh=None) -> str | None:
        """Write ``t,x_1,...,x_n`` rows with 17 significant digits; returns the text if ``fh`` is None."""
        out = io.StringIO() if fh is None else fh
        n = self.states.shape[1]
        out.write(",".join(["t"] + [f"x_{i}" for i in range(1, n + 1)]) + "\n")
        for t, row in zip(self.times, self.states):
            out.write(",".join(f"{v:.17g}" for v in (t, *row)) + "\n")
        return out.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        times = data[:, 0]
        dt = float(times[1] - times[0]) if len(times) > 1 else 0.0
        return cls(times, data[:, 1:], dt)


def time_grid(dt: float, horizon: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not horizon > dt:
        raise ValueError(f"horizon ({horizon}) must exceed dt ({dt})")
    steps = int(round(horizon / dt))
    return dt * np.arange(steps + 1)


def rk4_increment(a: np.ndarray, dt: float) -> np.ndarray:
    """``D`` with one classical RK4 step of ``x' = a x`` equal to ``x + D x``."""
    ha = dt * a
    eye = np.eye(a.shape[0])
    return ha @ (eye + ha @ (eye / 2 + ha @ (eye / 6 + ha / 24)))


def rk4_propagator(a: np.ndarray, dt: float) -> np.ndarray:
    return np.eye(a.shape[0]) + rk4_increment(a, dt)


def _guard(states: np.ndarray, t: float):
    if not np.all(np.isfinite(states)) or np.max(np.abs(states), initial=0.0) > DIVERGENCE_LIMIT:
        raise DivergenceError(f"state magnitude exceeded {DIVERGENCE_LIMIT:g} by t={t:g}")


def simulate_linear(a, x0, dt: float = DEFAULT_DT, horizon: float = 10.0, b=None, u: Trajectory | None = None) -> Trajectory:
    """Integrate ``x' = a x (+ b u(t))`` with classical RK4 on a fixed grid.

    Without input the RK4 step is the fixed linear map ``x + D x``; it is applied
    in blocks of precomputed powers, which is the same recursion up to rounding.
    With input, ``u`` must live on the output grid; its values at the
    half steps come from a cubic spline through the grid samples.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    x0 = np.asarray(x0, dtype=float).ravel()
    n = a.shape[0]
    if a.shape != (n, n) or x0.shape != (n,):
        raise ValueError(f"shape mismatch: a is {a.shape}, x0 has {x0.shape[0]} entries")
    times = time_grid(dt, horizon)
    if b is None:
        return Trajectory(times, _propagate(rk4_increment(a, dt), x0, len(times), times), dt)

    b = np.atleast_2d(np.asarray(b, dtype=float))
    if u is None:
        raise ValueError("an input trajectory is required when b is given")
    if b.shape[0] != n or u.states.shape[1] != b.shape[1]:
        raise ValueError(f"input shape mismatch: b is {b.shape}, u has {u.states.shape[1]} columns")
    if len(u.times) != len(times) or not np.allclose(u.times, times, rtol=0, atol=1e-9 * max(1.0, horizon)):
        raise GridMismatchError("input trajectory does not cover the simulation grid")
    drive = u.states @ b.T
    drive_mid = CubicSpline(times, drive, axis=0)(times[:-1] + dt / 2) if len(times) > 3 else 0.5 * (drive[:-1] + drive[1:])
    states = np.empty((len(times), n))
    states[0] = x = x0
    for k in range(len(times) - 1):
        k1 = a @ x + drive[k]
        k2 = a @ (x + dt / 2 * k1) + drive_mid[k]
        k3 = a @ (x + dt / 2 * k2) + drive_mid[k]
        k4 = a @ (x + dt * k3) + drive[k + 1]
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[k + 1] = x
        if k % _BLOCK == 0:
            _guard(x, times[k + 1])
    _guard(states, times[-1])
    return Trajectory(times, states, dt)


def _propagate(d: np.ndarray, x0: np.ndarray, count: int, times: np.ndarray) -> np.ndarray:
    # increments E_k = M^k - I keep x + E_k x exact on fixed points such as the consensus line
    n = len(x0)
    block = min(_BLOCK, count)
    # E_{j+k} = E_j + E_k + E_k E_j, filled by doubling so rounding depth is log2(block)
    incs = np.zeros((block, n, n))
    step, filled = d, 1
    while filled < block:
        take = min(filled, block - filled)
        incs[filled:filled + take] = incs[:take] + step + step @ incs[:take]
        step = step + step + step @ step
        filled += take
    jump = incs[-1] + d + d @ incs[-1]
    states = np.empty((count, n))
    states[:block] = x0 + incs @ x0
    _guard(states[:block], times[block - 1])
    for start in range(block, count, block):
        stop = min(start + block, count)
        prev = states[start - block:stop - block]
        states[start:stop] = prev + prev @ jump.T
        _guard(states[start:stop], times[stop - 1])
    return states


def integrate_rk4(rhs: Callable[[float, np.ndarray], np.ndarray], x0, dt: float = DEFAULT_DT, horizon: float = 10.0) -> Trajectory:
    """Classical RK4 for a general right-hand side ``rhs(t, x)``."""
    times = time_grid(dt, horizon)
    x = np.asarray(x0, dtype=float).ravel()
    states = np.empty((len(times), len(x)))
    states[0] = x
    for k, t in enumerate(times[:-1]):
        k1 = rhs(t, x)
        k2 = rhs(t + dt / 2, x + dt / 2 * k1)
        k3 = rhs(t + dt / 2, x + dt / 2 * k2)
        k4 = rhs(t + dt, x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[k + 1] = x
    _guard(states, times[-1])
    return Trajectory(times, states, dt)


def default_horizon(a, cap: float = HORIZON_CAP) -> float:
    """``40 / gap`` where gap is the slowest nonzero decay rate of ``x' = a x``, capped at ``cap``."""
    rate = spectrum(a).max_real_part_nonzero
    if rate is None:
        return 10.0
    if rate >= 0 or 40.0 / -rate > cap:
        return cap
    return 40.0 / -rate


def spread(states) -> float:
    states = np.asarray(states, dtype=float)
    return float(states.max() - states.min())


@dataclass(frozen=True)
class ConsensusVerdict:
    achieved: bool
    value: float | None
    final_spread: float
    time_to_tolerance: float | None
    """First time after which the spread stays within tolerance; None if never."""

    def to_dict(self) -> dict:
        return {
            "achieved": self.achieved,
            "value": self.value,
            "final_spread": self.final_spread,
            "time_to_tolerance": self.time_to_tolerance,
        }


def consensus_verdict(traj: Trajectory, tol: float = DEFAULT_TOL) -> ConsensusVerdict:
    spreads = np.ptp(traj.states, axis=1)
    final = float(spreads[-1])
    achieved = final <= tol
    if not achieved:
        return ConsensusVerdict(False, None, final, None)
    outside = np.flatnonzero(spreads > tol)
    first = 0 if len(outside) == 0 else outside[-1] + 1
    return ConsensusVerdict(True, float(traj.final.mean()), final, float(traj.times[first]))


def cascade_closed_form(z0: float, gains: dict[int, float], sources: Trajectory) -> Trajectory:
    """Follower ``z`` of a cascade from its variation-of-constants formula.

    ``z(t) = exp(-K t) z0 + int_0^t exp(-K (t - s)) sum_p K_p x_p(s) ds`` with
    ``K = sum_p K_p``; ``gains`` maps 1-based source columns to ``K_p``. The
    convolution is evaluated by the composite trapezoidal rule on the grid of
    ``sources``, using the exact one-step recursion of that rule.
    """
    if not gains:
        raise ValueError("a cascade follower needs at least one source")
    n_src = sources.states.shape[1]
    for p, k in gains.items():
        if not 1 <= p <= n_src:
            raise GridMismatchError(f"source {p} is not a column of the source trajectory")
        if not k > 0:
            raise ValueError(f"gain for source {p} must be positive")
    steps = np.diff(sources.times)
    if len(steps) and not np.allclose(steps, sources.dt, rtol=1e-9, atol=0):
        raise GridMismatchError("source trajectory is not on a uniform grid")
    h = sources.dt
    total = sum(gains.values())
    f = sum(k * sources.states[:, p - 1] for p, k in gains.items())
    decay = np.exp(-total * h)
    conv = lfilter([h / 2, decay * h / 2], [1.0, -decay], f, zi=[-h / 2 * f[0]])[0]
    z = np.exp(-total * sources.times) * z0 + conv
    return Trajectory(sources.times, z[:, None], h)


def spectral_envelope(lap, x0) -> tuple[float, float, float]:
    """``(limit, c, lam)`` such that ``|x(t) - limit| <= c exp(-lam t)`` for ``x' = -L x``.

    ``lam`` is the smallest nonzero real part of L's spectrum and ``c`` is the
    eigenvector condition number times the initial distance to the limit. Valid
    for diagonalizable L.
    """
    from .spectral import consensus_value_oracle

    lap = np.asarray(lap, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    limit = consensus_value_oracle(lap, x0)
    if limit is None:
        raise ValueError("Laplacian has no unique consensus value")
    lam = -spectrum(-lap).max_real_part_nonzero if lap.shape[0] > 1 else 1.0
    _, vecs = np.linalg.eig(lap)
    c = float(np.linalg.cond(vecs) * np.linalg.norm(x0 - limit))
    return limit, c, lam


def envelope_check(traj: Trajectory, limit, c: float, lam: float, eps_num: float = 1e-9) -> bool:
    """True iff ``max_i |x_i(t) - limit| <= c exp(-lam t) + eps_num`` at every grid point."""
    if c < 0 or not lam > 0:
        raise ValueError("envelope needs c >= 0 and lam > 0")
    dev = np.max(np.abs(traj.states - np.asarray(limit, dtype=float)), axis=1)
    return bool(np.all(dev <= c * np.exp(-lam * traj.times) + eps_num))
