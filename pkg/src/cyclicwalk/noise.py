"""Static site phase disorder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .coin import CoinParams
from .hilbert import check_sites
from .spectrum import SpectrumError, StepOperator, build_step, numerical_spectrum


@dataclass(frozen=True, eq=False)
class NoiseProfile:
    n_sites: int
    phi_max: float
    phases: np.ndarray
    seed: int
    realization_index: int

    @property
    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.phases)


def realization_rng(seed: int, realization_index: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, realization_index)``."""
    key = np.random.SeedSequence([int(seed) & (2**64 - 1), int(realization_index)])
    return np.random.Generator(np.random.Philox(key))


def check_phi_max(phi_max: float) -> float:
    phi_max = float(phi_max)
    if not 0.0 <= phi_max <= np.pi + 1e-12:
        raise ValueError(f"noise level {phi_max!r} outside [0, pi]")
    return min(phi_max, np.pi)


def sample_noise(n_sites: int, phi_max: float, seed: int = 0, realization_index: int = 0) -> NoiseProfile:
    """I.i.d. uniform site phases on ``[-phi_max, phi_max]``."""
    n = check_sites(n_sites)
    phi_max = check_phi_max(phi_max)
    if phi_max == 0.0:
        phases = np.zeros(n)
    else:
        phases = realization_rng(seed, realization_index).uniform(-phi_max, phi_max, size=n)
    phases.setflags(write=False)
    return NoiseProfile(n, phi_max, phases, int(seed), int(realization_index))


def build_noisy_step(step: StepOperator, noise: NoiseProfile) -> StepOperator:
    """``(D (x) 1) S`` with ``D = diag(exp(i phi_s))``; keeps the O(N) action."""
    if noise.n_sites != step.n_sites:
        raise ValueError(f"noise profile has N={noise.n_sites}, step operator N={step.n_sites}")
    phases = noise.phases
    if step.site_phases is not None:
        phases = phases + step.site_phases
    return StepOperator(step.n_sites, step.coin, phases)


def boxplot_stats(values) -> dict:
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {"min": float(v[0]), "q1": float(q1), "median": float(med), "q3": float(q3), "max": float(v[-1])}


@dataclass(frozen=True, eq=False)
class PREnsemble:
    n_sites: int
    coin: CoinParams
    phi_max: float
    seed: int
    mean_prs: np.ndarray  # one per realization, ordered by realization index
    eigenstate_prs: np.ndarray  # (n_realizations, 2N), pooled layer

    @property
    def stats(self) -> dict:
        return boxplot_stats(self.mean_prs)

    @property
    def pooled_stats(self) -> dict:
        return boxplot_stats(self.eigenstate_prs.ravel())


def _realization_prs(n_sites, coin, phi_max, seed, index):
    noise = sample_noise(n_sites, phi_max, seed, index)
    try:
        report = numerical_spectrum(build_noisy_step(build_step(n_sites, coin), noise))
    except SpectrumError as exc:
        raise SpectrumError(f"realization {index}: {exc}") from exc
    return index, report.participation_ratios


def noisy_pr_ensemble(
    n_sites: int,
    coin: CoinParams,
    phi_max: float,
    n_realizations: int = 50,
    seed: int = 0,
    n_jobs: int | None = None,
) -> PREnsemble:
    """Eigenstate participation ratios of the noisy step over a disorder ensemble."""
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    phi_max = check_phi_max(phi_max)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_realization_prs)(n_sites, coin, phi_max, seed, i) for i in range(n_realizations)
    )
    results.sort(key=lambda item: item[0])
    prs = np.array([r[1] for r in results])
    return PREnsemble(n_sites, coin, phi_max, int(seed), prs.mean(axis=1), prs)


PR_HEADER = ("phi_max", "realization", "mean_pr")
PR_AGGREGATE_HEADER = ("phi_max", "min", "q1", "median", "q3", "max")


def pr_rows(ensemble: PREnsemble):
    """CSV rows ``(phi_max, realization, mean_pr)``."""
    for i, value in enumerate(ensemble.mean_prs):
        yield ensemble.phi_max, i, float(value)


def pr_aggregate_row(ensemble: PREnsemble) -> tuple:
    st = ensemble.stats
    return (ensemble.phi_max, st["min"], st["q1"], st["median"], st["q3"], st["max"])
