"""Site-coin product space of the cyclic walk.

Amplitudes are stored site-major, coin-minor: the flat index of the basis
state ``|s>|c>`` is ``2*s + c``. Sites are 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12
PLUS = (1 / np.sqrt(2), 1 / np.sqrt(2))


def check_sites(n_sites) -> int:
    """Validate a cycle size and return it as an ``int``."""
    if int(n_sites) != n_sites:
        raise ValueError(f"number of sites must be an integer, got {n_sites!r}")
    n_sites = int(n_sites)
    if n_sites < 3:
        raise ValueError(f"a cycle needs at least 3 sites, got N={n_sites}")
    return n_sites


@dataclass(frozen=True, eq=False)
class WalkState:
    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n = check_sites(self.n_sites)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (2 * n,):
            raise ValueError(f"expected {2 * n} amplitudes for N={n}, got {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (squared norm {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def grid(self) -> np.ndarray:
        """Amplitudes as an ``(N, 2)`` array indexed ``[site, coin]``."""
        return self.amplitudes.reshape(self.n_sites, 2)

    @classmethod
    def from_grid(cls, grid, renormalize: bool = False) -> WalkState:
        grid = np.asarray(grid, dtype=complex)
        if renormalize:
            grid = grid / np.linalg.norm(grid)
        return cls(grid.shape[0], grid.reshape(-1))


@dataclass(frozen=True, eq=False)
class SiteDistribution:
    n_sites: int
    probabilities: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probabilities, dtype=float).reshape(-1)
        if probs.size != self.n_sites:
            raise ValueError("probability vector length does not match n_sites")
        if np.any(probs < -1e-15) or np.any(probs > 1 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)


def localized_state(n_sites: int, s0: int, coin_amps=PLUS) -> WalkState:
    """Walker on site ``s0`` with coin state ``coin_amps`` (default ``|+>``)."""
    n = check_sites(n_sites)
    if int(s0) != s0 or not 0 <= s0 < n:
        raise ValueError(f"initial site {s0!r} outside 0..{n - 1}")
    coin_amps = np.asarray(coin_amps, dtype=complex)
    if coin_amps.shape != (2,):
        raise ValueError("coin_amps must be a pair of amplitudes")
    if abs(np.vdot(coin_amps, coin_amps).real - 1.0) > NORM_TOL:
        raise ValueError("coin amplitudes are not normalized")
    grid = np.zeros((n, 2), dtype=complex)
    grid[int(s0)] = coin_amps
    return WalkState(n, grid.reshape(-1))


def default_initial_site(n_sites: int) -> int:
    return check_sites(n_sites) // 2


def site_probabilities(amplitudes, n_sites: int) -> np.ndarray:
    """Coin-traced probabilities for raw amplitude arrays of shape ``(..., 2N)``."""
    amps = np.asarray(amplitudes)
    grid = amps.reshape(amps.shape[:-1] + (n_sites, 2))
    return (grid.real**2 + grid.imag**2).sum(axis=-1)


def site_distribution(state: WalkState) -> SiteDistribution:
    return SiteDistribution(state.n_sites, site_probabilities(state.amplitudes, state.n_sites))


def cyclic_distance(n_sites: int, a, b):
    """Shortest distance between positions ``a`` and ``b`` around an N-cycle.

    Works elementwise on arrays and on non-integer positions.
    """
    n = check_sites(n_sites)
    d = np.mod(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)), n)
    d = np.minimum(d, n - d)
    return float(d) if np.ndim(d) == 0 else d


def mean_position(state: WalkState) -> float:
    """Expectation of the 0-based site number operator."""
    probs = site_probabilities(state.amplitudes, state.n_sites)
    return float(np.arange(state.n_sites) @ probs)
