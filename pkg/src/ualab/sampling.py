"""Samplers for the unitary group and related distributions."""

from __future__ import annotations

import numpy as np
import scipy.linalg


def sample_haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an n x n unitary matrix from Haar measure.

    Uses the Ginibre + QR construction: a complex Gaussian matrix is
    QR-factorized and Q is corrected by the phases of diag(R). Without the
    phase correction the QR output is not Haar distributed (Mezzadri,
    "How to generate random matrices from the classical compact groups",
    Notices of the AMS 54 (2007), arXiv:math-ph/0609050).

    Parameters
    ----------
    n : int
        Dimension, at least 1.
    rng : numpy.random.Generator
        Source of randomness.

    Returns
    -------
    numpy.ndarray
        Unitary matrix of shape (n, n), ``max|U*U - I| <= 1e-12``.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = scipy.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return q


def sample_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a uniformly distributed unit vector in C^n.

    A normalized complex Gaussian vector is rotation invariant, which is the
    defining property of the uniform law on the sphere.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    nrm = np.linalg.norm(z)
    while nrm == 0.0:  # pragma: no cover - probability zero
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        nrm = np.linalg.norm(z)
    return z / nrm


def sample_beta(a: float, b: float, rng: np.random.Generator) -> float:
    """Draw from Beta(a, b). Parameters must be positive."""
    if not (a > 0 and b > 0):
        raise ValueError(f"beta parameters must be positive, got a={a}, b={b}")
    return float(rng.beta(a, b))
