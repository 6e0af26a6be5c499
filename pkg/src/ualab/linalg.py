"""Dense eigensystem and singular value routines with explicit accuracy contracts.

Unitary matrices go through a complex Schur decomposition: for a normal
matrix the Schur form is diagonal up to rounding, and the transformation
columns are orthonormal by construction, which is exactly the guarantee the
rest of the package leans on. General matrices use the standard dense
eigensolver, optionally with left eigenvectors normalized bi-orthogonally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateNormalization, NonConvergence, NotUnitary

DEFAULT_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues with optional unit-norm eigenvectors and per-pair residuals.

    ``right_vectors`` and ``left_vectors`` store one eigenvector per column,
    aligned with ``eigenvalues``. When both are present the pairs satisfy
    ``left_vectors[:, j].conj() @ right_vectors[:, j] == 1``.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray | None
    left_vectors: np.ndarray | None
    residuals: np.ndarray


def unitarity_defect(u: np.ndarray) -> float:
    """Max-entry deviation of U*U from the identity."""
    n = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(n))))


def _sort_by_argument(values: np.ndarray) -> np.ndarray:
    """Indices sorting complex values by argument in [0, 2*pi)."""
    ang = np.mod(np.angle(values), 2.0 * np.pi)
    return np.argsort(ang, kind="stable")


def _sort_by_modulus_argument(values: np.ndarray) -> np.ndarray:
    """Indices sorting by modulus, then argument in [0, 2*pi)."""
    ang = np.mod(np.angle(values), 2.0 * np.pi)
    return np.lexsort((ang, np.abs(values)))


def unitary_eigensystem(u: np.ndarray, unitary_tol: float = 1e-10,
                        residual_tol: float = DEFAULT_RESIDUAL_TOL) -> EigenSystem:
    """Eigendecomposition of a unitary matrix via complex Schur form.

    Eigenvalues come back sorted by argument in [0, 2*pi). The eigenvector
    matrix is unitary to machine precision, so overlap sums downstream are
    trustworthy even for close eigenvalue pairs.

    Raises
    ------
    NotUnitary
        If ``max|U*U - I|`` exceeds ``unitary_tol``.
    NonConvergence
        If the backend fails or residuals exceed ``residual_tol``.
    """
    u = np.asarray(u, dtype=complex)
    defect = unitarity_defect(u)
    if defect > unitary_tol:
        raise NotUnitary(f"max|U*U - I| = {defect:.3e} exceeds {unitary_tol:.1e}")
    try:
        t, z = scipy.linalg.schur(u, output="complex")
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NonConvergence(f"Schur decomposition failed: {exc}") from exc
    values = np.diagonal(t).copy()
    order = _sort_by_argument(values)
    values = values[order]
    vectors = z[:, order]
    resid = np.linalg.norm(u @ vectors - vectors * values, axis=0)
    if np.max(resid) > residual_tol:
        raise NonConvergence(
            f"max eigenpair residual {np.max(resid):.3e} exceeds {residual_tol:.1e}")
    return EigenSystem(eigenvalues=values, right_vectors=vectors,
                       left_vectors=vectors, residuals=resid)


def general_eigensystem(m: np.ndarray, want_left: bool = False,
                        degenerate_tol: float = 1e-12) -> EigenSystem:
    """Dense eigendecomposition with optional bi-orthogonal left vectors.

    Eigenvalues are sorted by modulus, then argument. With ``want_left`` the
    left vectors are rescaled so that ``<L_j|R_j> = 1``; a pair whose raw
    overlap is below ``degenerate_tol`` signals a near-defective matrix and
    raises ``DegenerateNormalization``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    try:
        if want_left:
            values, vl, vr = scipy.linalg.eig(m, left=True, right=True)
        else:
            values, vr = scipy.linalg.eig(m)
            vl = None
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NonConvergence(f"eigendecomposition failed: {exc}") from exc
    order = _sort_by_modulus_argument(values)
    values = values[order]
    vr = vr[:, order]
    resid = np.linalg.norm(m @ vr - vr * values, axis=0) / np.linalg.norm(vr, axis=0)
    if vl is not None:
        vl = vl[:, order]
        overlaps = np.sum(vl.conj() * vr, axis=0)
        small = np.abs(overlaps) < degenerate_tol
        if np.any(small):
            j = int(np.argmin(np.abs(overlaps)))
            raise DegenerateNormalization(
                f"left/right overlap {np.abs(overlaps[j]):.3e} for eigenvalue "
                f"{values[j]} is below {degenerate_tol:.1e}")
        vl = vl / overlaps.conj()
    return EigenSystem(eigenvalues=values, right_vectors=vr,
                       left_vectors=vl, residuals=resid)


def singular_values(m: np.ndarray) -> np.ndarray:
    """Singular values in descending order."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    try:
        return scipy.linalg.svd(m, compute_uv=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NonConvergence(f"SVD failed: {exc}") from exc
