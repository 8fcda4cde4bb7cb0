"""Shared helpers for the test suite."""
from __future__ import annotations

import numpy as np


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    # fix the phase so the distribution is Haar
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_dpp_matrix(rng: np.random.Generator, n: int,
                      force_one: bool = False) -> np.ndarray:
    """Random valid kernel matrix: Haar eigenvectors, eigenvalues in [0, 1].

    force_one pins one eigenvalue at exactly 1 (projection direction),
    exercising the boundary the coupling theorem must still cover.
    """
    q = random_unitary(rng, n)
    lam = rng.uniform(0.0, 1.0, size=n)
    if force_one:
        lam[rng.integers(0, n)] = 1.0
    k = (q * lam) @ q.conj().T
    return 0.5 * (k + k.conj().T)


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (z + z.conj().T)
