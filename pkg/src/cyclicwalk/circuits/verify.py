"""Dense reference operators for circuit verification.

These mirror the graph and spectrum modules but also accept the two-site
register (n = 1), which the cycle validators reject.
"""

from __future__ import annotations

import numpy as np

from ..coin import CoinParams, build_coin


def reference_qft(n_sites: int) -> np.ndarray:
    s = np.arange(n_sites)
    return np.exp(2j * np.pi * np.outer(s, s) / n_sites) / np.sqrt(n_sites)


def reference_clock(n_sites: int, power: int = 1, adjoint: bool = False) -> np.ndarray:
    sign = 1.0 if adjoint else -1.0
    return np.diag(np.exp(sign * 2j * np.pi * power * np.arange(n_sites) / n_sites))


def reference_step(n_sites: int, coin: CoinParams, site_phases=None) -> np.ndarray:
    """``(D (x) 1)(V (x) P0 + V^dag (x) P1)(1 (x) C)`` in the ``2s + c`` layout."""
    cw = np.roll(np.eye(n_sites), 1, axis=0)
    move = np.kron(cw, np.diag([1.0, 0.0])) + np.kron(cw.T, np.diag([0.0, 1.0]))
    op = move @ np.kron(np.eye(n_sites), build_coin(coin))
    if site_phases is not None:
        op = np.kron(np.diag(np.exp(1j * np.asarray(site_phases))), np.eye(2)) @ op
    return op
