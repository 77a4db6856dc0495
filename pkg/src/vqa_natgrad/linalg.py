"""Symmetric-matrix helpers: spectral decomposition, cutoff pseudoinverse, rank, PSD tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_CUTOFF = 1e-4


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def symmetrize(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return 0.5 * (a + a.T)


def eigh(a) -> SpectralDecomposition:
    a = symmetrize(a)
    w, v = np.linalg.eigh(a)
    return SpectralDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def pinv_cutoff(a, cutoff: float = DEFAULT_CUTOFF) -> np.ndarray:
    """Moore-Penrose inverse keeping only eigenvalues above ``cutoff``."""
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    dec = eigh(a)
    if dec.eigenvalues.size and dec.eigenvalues[-1] < -1e-8:
        raise ValueError(f"matrix is not PSD (min eigenvalue {dec.eigenvalues[-1]:.3e})")
    keep = dec.eigenvalues > cutoff
    q = dec.eigenvectors[:, keep]
    return (q / dec.eigenvalues[keep]) @ q.T


def rank_tol(a, tol: float | None = None) -> int:
    """Number of eigenvalues strictly above ``tol``."""
    w = eigh(a).eigenvalues
    if tol is None:
        tol = 1e-8 * max(1.0, float(w[0]) if w.size else 0.0)
    if tol <= 0:
        raise ValueError("tol must be positive")
    return int(np.count_nonzero(w > tol))


def min_eigenvalue(a) -> float:
    w = eigh(a).eigenvalues
    return float(w[-1]) if w.size else 0.0


def is_psd(a, tol: float = 1e-8) -> bool:
    return min_eigenvalue(a) >= -tol
