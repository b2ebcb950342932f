"""Shift, Fourier and clock operators on the N-cycle.

Dense constructors are meant for verification and spectra (N <= 4096).
Evolution uses :func:`roll_cw` / :func:`roll_ccw`, which act in O(N).
"""

from __future__ import annotations

import numpy as np

from .hilbert import check_sites

MAX_DENSE = 4096


def _check_dense(n_sites) -> int:
    n = check_sites(n_sites)
    if n > MAX_DENSE:
        raise ValueError(f"dense operators are limited to N <= {MAX_DENSE}")
    return n


def shift_cw(n_sites: int) -> np.ndarray:
    """Permutation ``|s> -> |s+1 mod N>``."""
    n = _check_dense(n_sites)
    out = np.zeros((n, n), dtype=complex)
    out[(np.arange(n) + 1) % n, np.arange(n)] = 1.0
    return out


def shift_ccw(n_sites: int) -> np.ndarray:
    """Permutation ``|s> -> |s-1 mod N>``."""
    n = _check_dense(n_sites)
    out = np.zeros((n, n), dtype=complex)
    out[(np.arange(n) - 1) % n, np.arange(n)] = 1.0
    return out


def qft(n_sites: int) -> np.ndarray:
    n = _check_dense(n_sites)
    return _fourier(n)


def _fourier(n: int) -> np.ndarray:
    s = np.arange(n)
    return np.exp(2j * np.pi * np.outer(s, s) / n) / np.sqrt(n)


def clock(n_sites: int) -> np.ndarray:
    n = _check_dense(n_sites)
    return np.diag(clock_phases(n))


def clock_phases(n_sites: int) -> np.ndarray:
    """Diagonal of the clock operator, ``exp(-2 pi i s / N)``."""
    return np.exp(-2j * np.pi * np.arange(n_sites) / n_sites)


def roll_cw(values: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.roll(values, 1, axis=axis)


def roll_ccw(values: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.roll(values, -1, axis=axis)


def is_unitary(matrix: np.ndarray, atol: float = 1e-12) -> bool:
    matrix = np.asarray(matrix)
    return bool(np.allclose(matrix.conj().T @ matrix, np.eye(matrix.shape[0]), rtol=0, atol=atol))
