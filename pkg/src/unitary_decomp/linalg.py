"""
Dense complex linear algebra for small operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The helpers here
cover the Hermitian / anti-Hermitian split, a Hermitian eigensolver with a
fixed phase convention, unitary exponentials built from that eigensolver and
tolerance-based structural checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STRUCTURE_TOL = 1e-10
UNITARY_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when operand shapes are incompatible."""


class StructureError(ValueError):
    """Raised when a matrix lacks a required structure (e.g. Hermiticity)."""


class ParameterError(ValueError):
    """Raised for out-of-range scalar parameters."""


def as_matrix(x) -> np.ndarray:
    """Coerce ``x`` to a finite square complex matrix."""
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def adjoint(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def max_abs(x: np.ndarray) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def hermitian_split(m) -> tuple[np.ndarray, np.ndarray]:
    """
    Split ``m`` into Hermitian and anti-Hermitian parts.

    Returns
    -------
    (S, A)
        ``S = (m + m^H) / 2`` and ``A = (m - m^H) / 2`` so that ``S + A == m``.
    """
    m = as_matrix(m)
    mh = adjoint(m)
    return (m + mh) / 2, (m - mh) / 2


@dataclass(frozen=True)
class HermitianEigenSystem:
    """Eigenvalues in ascending order and unitary eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ adjoint(v)

    def apply_function(self, f) -> np.ndarray:
        """Return ``V f(diag(lambda)) V^H`` for a scalar function ``f``."""
        v = self.eigenvectors
        return (v * f(self.eigenvalues)) @ adjoint(v)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude component made real-positive; first index wins ties
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        mags = np.abs(col)
        idx = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        out[:, k] = col * (np.conj(col[idx]) / mags[idx])
    return out


def eig_hermitian(h, tol: float = STRUCTURE_TOL) -> HermitianEigenSystem:
    """
    Diagonalise a Hermitian matrix.

    Eigenvalues come back ascending. Each eigenvector is rephased so that its
    largest-magnitude entry is real and positive, which makes serialized
    intermediates reproducible.

    Raises
    ------
    StructureError
        If ``max|h - h^H| > tol``.
    """
    h = as_matrix(h)
    resid = max_abs(h - adjoint(h))
    if resid > tol:
        raise StructureError(f"matrix is not Hermitian (residual {resid:.3e})")
    h = (h + adjoint(h)) / 2
    w, v = np.linalg.eigh(h)
    return HermitianEigenSystem(eigenvalues=w, eigenvectors=_fix_phases(v))


def unitary_exp(h, theta: float) -> np.ndarray:
    """Return ``exp(-i theta h)`` for Hermitian ``h``."""
    es = eig_hermitian(h)
    return es.apply_function(lambda lam: np.exp(-1j * theta * lam))


@dataclass(frozen=True)
class StructureFlags:
    is_hermitian: bool
    is_anti_hermitian: bool
    is_unitary: bool
    is_zero: bool


def structure_checks(x, tol: float = STRUCTURE_TOL) -> StructureFlags:
    x = as_matrix(x)
    xh = adjoint(x)
    eye = np.eye(x.shape[0])
    return StructureFlags(
        is_hermitian=max_abs(x - xh) <= tol,
        is_anti_hermitian=max_abs(x + xh) <= tol,
        is_unitary=max_abs(xh @ x - eye) <= tol,
        is_zero=max_abs(x) <= tol,
    )


def unitarity_residual(u) -> float:
    u = as_matrix(u)
    return max_abs(adjoint(u) @ u - np.eye(u.shape[0]))


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    return unitarity_residual(u) <= tol
