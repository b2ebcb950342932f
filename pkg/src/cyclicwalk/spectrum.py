"""Step operator of the coined walk and its spectrum.

Two independent routes produce a :class:`SpectralReport`: the closed form in
:func:`analytic_spectrum` (block diagonalization in the Fourier basis) and a
dense eigendecomposition in :func:`numerical_spectrum`. Tests use each as an
oracle for the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coin import CoinParams, build_coin
from .graph import MAX_DENSE, clock_phases, shift_ccw, shift_cw
from .hilbert import check_sites, site_probabilities

DEGENERACY_TOL = 1e-9
TWO_PI = 2 * np.pi


class SpectrumError(RuntimeError):
    """Raised when a dense eigendecomposition fails or returns garbage."""


@dataclass(frozen=True, eq=False)
class StepOperator:
    """One walk step, optionally followed by static site phases.

    ``apply`` works on amplitude arrays of shape ``(..., 2N)`` in O(N) per
    state; ``dense`` materializes the ``2N x 2N`` matrix.
    """

    n_sites: int
    coin: CoinParams
    site_phases: np.ndarray | None = None

    def __post_init__(self):
        n = check_sites(self.n_sites)
        object.__setattr__(self, "n_sites", n)
        if self.site_phases is not None:
            phases = np.array(self.site_phases, dtype=float).reshape(-1)
            if phases.size != n:
                raise ValueError(f"site phase vector has length {phases.size}, expected {n}")
            phases.setflags(write=False)
            object.__setattr__(self, "site_phases", phases)

    @property
    def coin_matrix(self) -> np.ndarray:
        return build_coin(self.coin)

    @property
    def dimension(self) -> int:
        return 2 * self.n_sites

    @property
    def is_noisy(self) -> bool:
        return self.site_phases is not None and bool(np.any(self.site_phases != 0))

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape[-1] != self.dimension:
            raise ValueError(f"state dimension {amps.shape[-1]} does not match operator {self.dimension}")
        grid = amps.reshape(amps.shape[:-1] + (self.n_sites, 2)) @ self.coin_matrix.T
        out = np.empty_like(grid)
        out[..., 0] = np.roll(grid[..., 0], 1, axis=-1)
        out[..., 1] = np.roll(grid[..., 1], -1, axis=-1)
        if self.site_phases is not None:
            out *= np.exp(1j * self.site_phases)[:, None]
        return out.reshape(amps.shape)

    def dense(self) -> np.ndarray:
        if self.n_sites > MAX_DENSE:
            raise ValueError(f"dense step operator limited to N <= {MAX_DENSE}")
        proj0 = np.diag([1.0, 0.0])
        proj1 = np.diag([0.0, 1.0])
        n = self.n_sites
        move = np.kron(shift_cw(n), proj0) + np.kron(shift_ccw(n), proj1)
        op = move @ np.kron(np.eye(n), self.coin_matrix)
        if self.site_phases is not None:
            op = np.kron(np.diag(np.exp(1j * self.site_phases)), np.eye(2)) @ op
        return op


def build_step(n_sites: int, coin: CoinParams) -> StepOperator:
    return StepOperator(n_sites, coin)


@dataclass(frozen=True, eq=False)
class SpectralReport:
    n_sites: int
    eigenvalues: np.ndarray
    distributions: np.ndarray  # (2N, N), one coin-traced distribution per eigenstate
    participation_ratios: np.ndarray
    degenerate: bool
    degeneracy_m: int | None = None
    coin: CoinParams | None = None
    source: str = "numerical"
    eigenvectors: np.ndarray | None = None  # columns
    mixing_angles: np.ndarray | None = None
    phases_plus: np.ndarray | None = None
    phases_minus: np.ndarray | None = None
    momenta: np.ndarray | None = None
    branches: np.ndarray | None = None
    cluster_sizes: list = field(default_factory=list)

    @property
    def eigenphases(self) -> np.ndarray:
        return np.angle(self.eigenvalues)

    @property
    def band_center(self) -> float | None:
        return None if self.coin is None else self.coin.half_sum

    @property
    def band_half_width(self) -> float | None:
        return None if self.coin is None else np.pi / 2 - self.coin.gamma

    @property
    def gap(self) -> float | None:
        return None if self.coin is None else 2 * self.coin.gamma

    @property
    def mean_pr(self) -> float:
        return float(np.mean(self.participation_ratios))

    def to_dict(self) -> dict:
        out = {
            "n_sites": self.n_sites,
            "source": self.source,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "eigenphases": [float(w) for w in self.eigenphases],
            "participation_ratios": [float(p) for p in self.participation_ratios],
            "mean_pr": self.mean_pr,
            "degenerate": self.degenerate,
            "degeneracy_m": self.degeneracy_m,
        }
        if self.coin is not None:
            out["coin"] = dict(zip(("gamma", "theta", "phi"), self.coin.as_tuple()))
            out["bands"] = [
                {"center": float(c), "half_width": float(self.band_half_width)}
                for c in (self.band_center, self.band_center + np.pi)
            ]
            out["gap"] = float(self.gap)
        return out

    def rows(self):
        """CSV rows ``(k, re, im, omega, pr)``."""
        for k, (z, pr) in enumerate(zip(self.eigenvalues, self.participation_ratios)):
            yield k, float(z.real), float(z.imag), float(np.angle(z)), float(pr)


def participation_ratio(dist) -> float:
    """``(sum P)^2 / sum P^2`` for a site distribution (or raw probabilities)."""
    probs = np.asarray(getattr(dist, "probabilities", dist), dtype=float)
    denom = float(np.sum(probs**2))
    if denom == 0.0:
        raise ValueError("participation ratio undefined for an all-zero distribution")
    return float(np.sum(probs) ** 2 / denom)


def participation_ratios(probs: np.ndarray) -> np.ndarray:
    """Row-wise participation ratios of a ``(..., N)`` probability array."""
    probs = np.asarray(probs, dtype=float)
    return probs.sum(axis=-1) ** 2 / (probs**2).sum(axis=-1)


def mean_pr(report: SpectralReport) -> float:
    return report.mean_pr


def degeneracy_index(n_sites: int, coin: CoinParams, tol: float = DEGENERACY_TOL):
    """Return ``(degenerate, m)`` for the noiseless step operator.

    Momenta ``k, k'`` share an eigenvalue when
    ``2*sigma + 2*pi*(k + k')/N = pi (mod 2*pi)``, ``sigma`` being the coin
    half-sum. For even N this is ``sigma = m*pi/N``; for odd N it is
    ``sigma = (m + 1/2)*pi/N``. ``m`` is reported in ``0..N-1``.
    At ``gamma = pi/2`` the spectrum collapses onto two points and ``m`` is None.
    """
    n = check_sites(n_sites)
    if np.isclose(coin.gamma, np.pi / 2, rtol=0, atol=tol):
        return True, None
    x = (2 * coin.half_sum - np.pi) * n / TWO_PI
    if abs(x - np.round(x)) * np.pi / n > tol:
        return False, None
    m = int(np.round(coin.half_sum * n / np.pi - 0.5 * (n % 2))) % n
    return True, m


def band_arcs(coin: CoinParams):
    """Two ``(center, half_width)`` arcs holding the noiseless eigenphases."""
    half = np.pi / 2 - coin.gamma
    return [(coin.half_sum, half), (coin.half_sum + np.pi, half)]


def in_bands(phases, coin: CoinParams, tol: float = 1e-9) -> np.ndarray:
    phases = np.asarray(phases, dtype=float)
    inside = np.zeros(phases.shape, dtype=bool)
    for center, half in band_arcs(coin):
        offset = np.angle(np.exp(1j * (phases - center)))
        inside |= np.abs(offset) <= half + tol
    return inside


def cluster_eigenphases(phases, tol: float = DEGENERACY_TOL) -> list[int]:
    """Sizes of groups of eigenphases closer than ``tol`` around the circle."""
    ph = np.sort(np.mod(np.asarray(phases, dtype=float), TWO_PI))
    if ph.size == 0:
        return []
    gaps = np.diff(np.append(ph, ph[0] + TWO_PI))
    sizes = []
    count = 1
    for gap in gaps[:-1]:
        if gap <= tol:
            count += 1
        else:
            sizes.append(count)
            count = 1
    sizes.append(count)
    if gaps[-1] <= tol and len(sizes) > 1:
        sizes[0] += sizes.pop()
    return sizes


def _plane_waves(n: int, momenta: np.ndarray) -> np.ndarray:
    s = np.arange(n)
    return np.exp(TWO_PI * 1j * np.outer(s, momenta) / n) / np.sqrt(n)


def analytic_spectrum(n_sites: int, coin: CoinParams) -> SpectralReport:
    """Closed-form eigen-data of the noiseless step operator.

    Eigenstates are ``cos(t)|lambda_k,0> + exp(i phi_minus) sin(t)|lambda_k,1>``
    with the mixing angle ``t = -arctan[(cos phi_plus -+ sqrt(tan^2 g + cos^2
    phi_plus)) / tan g]``. The upper sign gives the band centred on the coin
    half-sum (branch 0), the lower sign the band opposite it (branch 1).
    """
    n = check_sites(n_sites)
    g, theta, phi = coin.as_tuple()
    sigma = coin.half_sum
    k = np.arange(n)
    phi_plus = TWO_PI * k / n + (theta + phi) / 2
    phi_minus = TWO_PI * k / n - (theta - phi) / 2
    x = np.clip(np.cos(g) * np.sin(phi_plus), -1.0, 1.0)
    asin = np.arcsin(x)
    zeta = np.concatenate([np.exp(-1j * (asin - sigma)), np.exp(-1j * (np.pi - asin - sigma))])
    momenta = np.concatenate([k, k])
    branches = np.repeat([0, 1], n)
    fp = np.concatenate([phi_plus, phi_plus])
    fm = np.concatenate([phi_minus, phi_minus])

    if g == 0.0:
        lam = clock_phases(n)
        other = -np.exp(2j * sigma) * lam.conj()
        up = np.zeros(2 * n, dtype=bool)  # True -> coin |0>
        z0, z1 = zeta[:n], zeta[n:]
        direct = np.abs(z0 - lam) + np.abs(z1 - other)
        swapped = np.abs(z0 - other) + np.abs(z1 - lam)
        up[:n] = direct <= swapped
        up[n:] = ~up[:n]
        mixing = np.where(up, 0.0, np.pi / 2)
        coin_vecs = np.stack([up.astype(complex), (~up).astype(complex)], axis=1)
    else:
        tan_g = np.tan(g)
        root = np.sqrt(tan_g**2 + np.cos(fp) ** 2)
        sign = np.where(branches == 0, -1.0, 1.0)
        mixing = -np.arctan((np.cos(fp) + sign * root) / tan_g)
        coin_vecs = np.stack([np.cos(mixing), np.exp(1j * fm) * np.sin(mixing)], axis=1)

    waves = _plane_waves(n, momenta)  # (N, 2N)
    vecs = (waves[:, None, :] * coin_vecs.T[None, :, :]).reshape(2 * n, 2 * n)
    probs = site_probabilities(vecs.T, n)
    degenerate, m = degeneracy_index(n, coin)
    return SpectralReport(
        n_sites=n,
        eigenvalues=zeta,
        distributions=probs,
        participation_ratios=participation_ratios(probs),
        degenerate=degenerate,
        degeneracy_m=m,
        coin=coin,
        source="analytic",
        eigenvectors=vecs,
        mixing_angles=mixing,
        phases_plus=fp,
        phases_minus=fm,
        momenta=momenta,
        branches=branches,
        cluster_sizes=cluster_eigenphases(np.angle(zeta)),
    )


def numerical_spectrum(step: StepOperator, tol: float = DEGENERACY_TOL) -> SpectralReport:
    """Dense eigendecomposition of a (possibly noisy) step operator."""
    if step.n_sites > MAX_DENSE:
        raise SpectrumError(f"dense eigendecomposition limited to N <= {MAX_DENSE}")
    try:
        vals, vecs = np.linalg.eig(step.dense())
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(f"eigensolver failed for N={step.n_sites}: {exc}") from exc
    if not np.all(np.isfinite(vals)) or np.max(np.abs(np.abs(vals) - 1)) > 1e-9:
        raise SpectrumError("eigenvalues left the unit circle; operator is not unitary")
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    probs = site_probabilities(vecs.T, step.n_sites)
    probs = probs / probs.sum(axis=1, keepdims=True)
    sizes = cluster_eigenphases(np.angle(vals), tol)
    degenerate = bool(max(sizes) > 1)
    m = None
    if degenerate and not step.is_noisy:
        m = degeneracy_index(step.n_sites, step.coin)[1]
    return SpectralReport(
        n_sites=step.n_sites,
        eigenvalues=vals,
        distributions=probs,
        participation_ratios=participation_ratios(probs),
        degenerate=degenerate,
        degeneracy_m=m,
        coin=None if step.is_noisy else step.coin,
        source="numerical",
        eigenvectors=vecs,
        cluster_sizes=sizes,
    )


def degenerate_pair_states(n_sites: int, coin: CoinParams, tol: float = 1e-9):
    """Analytic eigenstates of each degenerate pair, recombined for maximal contrast.

    Each degenerate eigenvalue is shared by two plane waves ``k != k'``. The
    returned states are ``(|zeta_k> + e^{i chi}|zeta_k'>)/sqrt(2)`` with
    ``chi`` chosen so the coin overlap is real and positive, which gives
    the sinusoidal site distribution of largest amplitude.

    Returns a list of ``(k, k_partner, branch, amplitudes)``.
    """
    report = analytic_spectrum(n_sites, coin)
    n = report.n_sites
    vecs = report.eigenvectors
    zeta = report.eigenvalues
    out = []
    seen = set()
    for i in range(2 * n):
        if i in seen:
            continue
        close = np.flatnonzero(np.abs(zeta - zeta[i]) <= tol)
        partners = [j for j in close if j != i and report.momenta[j] != report.momenta[i]]
        if len(partners) != 1:
            continue
        j = partners[0]
        seen.update((i, j))
        # plane waves equal 1/sqrt(N) at site 0, so row 0 carries the coin vector
        ci = vecs[:, i].reshape(n, 2)[0] * np.sqrt(n)
        cj = vecs[:, j].reshape(n, 2)[0] * np.sqrt(n)
        overlap = np.vdot(cj, ci)
        chi = np.angle(overlap) if abs(overlap) > 0 else 0.0
        state = (vecs[:, i] + np.exp(1j * chi) * vecs[:, j]) / np.sqrt(2)
        out.append((int(report.momenta[i]), int(report.momenta[j]), int(report.branches[i]), state))
    return out
