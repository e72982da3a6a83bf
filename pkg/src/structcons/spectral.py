"""Spectra of Laplacians and pinned matrices, Hurwitz test, consensus-value oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

EPS_ZERO = 1e-9
EPS_HURWITZ = 1e-9


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: tuple[complex, ...]
    zero_multiplicity: int
    max_real_part_nonzero: float | None
    """Largest real part outside the zero cluster; ``None`` if every eigenvalue is zero."""

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "zero_multiplicity": self.zero_multiplicity,
            "max_real_part_nonzero": self.max_real_part_nonzero,
        }


def spectrum(m, eps_zero: float = EPS_ZERO) -> SpectrumReport:
    """All eigenvalues of ``m``, sorted by descending real part (then imaginary part)."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    # np.linalg.eigvals raises LinAlgError when the QR iteration does not converge
    eig = np.linalg.eigvals(m)
    eig = sorted((complex(z) for z in eig), key=lambda z: (-z.real, -z.imag))
    zero = [abs(z) <= eps_zero for z in eig]
    rest = [z.real for z, is_zero in zip(eig, zero) if not is_zero]
    return SpectrumReport(
        eigenvalues=tuple(eig),
        zero_multiplicity=sum(zero),
        max_real_part_nonzero=max(rest) if rest else None,
    )


@dataclass(frozen=True)
class PinnedMatrix:
    """``A = -L + diag(lambda)`` with negative ``lambda_i`` on the pinned indices (0-based)."""

    a: np.ndarray
    pinned: tuple[int, ...]
    lam: dict[int, float]

    @classmethod
    def from_laplacian(cls, lap, lam: dict[int, float]) -> "PinnedMatrix":
        lap = np.asarray(lap, dtype=float)
        if not lam:
            raise ValueError("at least one index must be pinned")
        for i, val in lam.items():
            if not 0 <= i < lap.shape[0]:
                raise ValueError(f"pinned index {i} out of range")
            if not val < 0:
                raise ValueError(f"pinning gain at index {i} must be negative, got {val}")
        a = -lap.copy()
        for i, val in lam.items():
            a[i, i] += val
        return cls(a=a, pinned=tuple(sorted(lam)), lam=dict(lam))


class HurwitzResult(NamedTuple):
    hurwitz: bool
    witness: complex
    """Eigenvalue with the largest real part."""

    def __bool__(self) -> bool:
        return self.hurwitz


def is_hurwitz(p, eps: float = EPS_HURWITZ) -> HurwitzResult:
    """True iff every eigenvalue has real part below ``-eps``. Accepts a PinnedMatrix or a raw matrix."""
    a = p.a if isinstance(p, PinnedMatrix) else np.asarray(p, dtype=float)
    witness = spectrum(a).eigenvalues[0]
    return HurwitzResult(witness.real < -eps, witness)


def left_null_vector(lap, eps_zero: float = EPS_ZERO) -> np.ndarray | None:
    """Left null vector ``w`` of ``lap`` with ``w @ 1 = 1``, or None if zero is not simple."""
    lap = np.asarray(lap, dtype=float)
    eig, vecs = np.linalg.eig(lap.T)
    zero = np.flatnonzero(np.abs(eig) <= eps_zero)
    if len(zero) != 1:
        return None
    w = np.real(vecs[:, zero[0]])
    total = w.sum()
    if abs(total) <= eps_zero:
        return None
    w = w / total
    # entries are nonnegative in exact arithmetic; clip solver noise
    w[np.abs(w) <= 1e-12] = 0.0
    return w


def consensus_value_oracle(lap, x0) -> float | None:
    """Predicted limit of ``x' = -L x`` from ``x0``; None when no unique value exists."""
    w = left_null_vector(lap)
    if w is None:
        return None
    return float(w @ np.asarray(x0, dtype=float))
