"""Three-parameter unitary coin and its eigen-system."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_RANGE_TOL = 1e-12


@dataclass(frozen=True)
class CoinParams:
    """Coin angles in radians: ``gamma`` in [0, pi/2], ``theta``/``phi`` in [0, 2pi]."""

    gamma: float
    theta: float
    phi: float

    def __post_init__(self):
        for name, hi in (("gamma", np.pi / 2), ("theta", 2 * np.pi), ("phi", 2 * np.pi)):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < -_RANGE_TOL or value > hi + _RANGE_TOL:
                raise ValueError(f"{name}={value!r} outside [0, {hi:.6g}]")
            object.__setattr__(self, name, min(max(value, 0.0), hi))

    @property
    def half_sum(self) -> float:
        return 0.5 * (self.theta + self.phi)

    @classmethod
    def from_half_sum(cls, gamma: float, half_sum: float) -> CoinParams:
        """Coin with ``theta = phi = half_sum`` (reduced into [0, pi))."""
        h = float(np.mod(half_sum, np.pi))
        return cls(gamma, h, h)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.gamma, self.theta, self.phi)


PRESETS = {
    "hadamard": CoinParams(np.pi / 4, 0.0, 0.0),
    "symmetric": CoinParams(np.pi / 4, np.pi / 2, np.pi / 2),
}


def preset(name: str) -> CoinParams:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown coin preset {name!r}; choose from {sorted(PRESETS)}") from None


def build_coin(params: CoinParams) -> np.ndarray:
    g, t, p = params.as_tuple()
    return np.array(
        [
            [np.cos(g), np.exp(1j * t) * np.sin(g)],
            [np.exp(1j * p) * np.sin(g), -np.exp(1j * (t + p)) * np.cos(g)],
        ]
    )


@dataclass(frozen=True, eq=False)
class CoinEigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    s_aux: complex
    alpha_tilde: np.ndarray
    alpha: np.ndarray
    closed_form_mismatch: bool


def _closed_form(params: CoinParams):
    g, t, p = params.as_tuple()
    e = np.exp(1j * (t + p))
    s = (1 - e) * np.cos(g) / 2
    root = np.sqrt(e + s * s)
    c = np.array([s + root, s - root])
    with np.errstate(divide="ignore", invalid="ignore"):
        csc = 1 / np.sin(g)
        alpha_tilde = np.array(
            [2 * (np.exp(-1j * p) * c[j] + np.exp(1j * t) * np.cos(g)) * csc ** (1 - j) for j in (0, 1)]
        )
        alpha = np.array(
            [alpha_tilde[j] / np.sqrt(4 + abs(alpha_tilde[(1 + (-1) ** j) % 2]) ** 2) for j in (0, 1)]
        )
    return s, c, alpha_tilde, alpha


def _exact_edge_vectors(params: CoinParams):
    """Eigen-pairs at gamma = 0 (diagonal) and gamma = pi/2 (anti-diagonal)."""
    g, t, p = params.as_tuple()
    if g == 0.0:
        return np.array([1.0, -np.exp(1j * (t + p))]), np.eye(2, dtype=complex)
    # [[0, e^{it}], [e^{ip}, 0]] has eigenvalues +-e^{i(t+p)/2}
    h = np.exp(1j * (t + p) / 2)
    vecs = np.array([[np.exp(1j * t), np.exp(1j * t)], [h, -h]]) / np.sqrt(2)
    return np.array([h, -h]), vecs


def coin_eigensystem(params: CoinParams) -> CoinEigenSystem:
    """Closed-form eigen-data cross-checked against numerical diagonalization.

    The returned eigenvalues and eigenvectors are the numerical ones (exact
    at gamma in {0, pi/2}), ordered to match the closed-form ``c_0, c_1``.
    ``closed_form_mismatch`` is set when the closed form disagrees with the
    numerics beyond 1e-9.
    """
    coin = build_coin(params)
    s, c, alpha_tilde, alpha = _closed_form(params)
    if params.gamma in (0.0, np.pi / 2):
        vals, vecs = _exact_edge_vectors(params)
    else:
        vals, vecs = np.linalg.eig(coin)
        vecs = vecs / np.linalg.norm(vecs, axis=0)
    # align numerical order with c_0, c_1
    if abs(vals[0] - c[0]) + abs(vals[1] - c[1]) > abs(vals[0] - c[1]) + abs(vals[1] - c[0]):
        vals, vecs = vals[::-1], vecs[:, ::-1]

    mismatch = bool(np.max(np.abs(np.sort_complex(vals) - np.sort_complex(c))) > 1e-9)
    if not mismatch and np.all(np.isfinite(alpha)):
        for j in (0, 1):
            a = alpha[j]
            if abs(a) > 1 + 1e-9:
                mismatch = True
                break
            v = np.array([a, np.sqrt(max(0.0, 1 - abs(a) ** 2))])
            if np.linalg.norm(coin @ v - c[j] * v) > 1e-9:
                mismatch = True
                break
    elif not np.all(np.isfinite(alpha)):
        mismatch = True
    return CoinEigenSystem(
        eigenvalues=np.asarray(vals),
        eigenvectors=np.asarray(vecs),
        s_aux=complex(s),
        alpha_tilde=alpha_tilde,
        alpha=alpha,
        closed_form_mismatch=mismatch,
    )
