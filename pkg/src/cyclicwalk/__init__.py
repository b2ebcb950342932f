"""Coined quantum walks on cycles with static site phase disorder."""

__version__ = "0.1.0"

from .coin import PRESETS, CoinParams, build_coin, coin_eigensystem, preset
from .dynamics import (
    CVConvergence,
    DynamicsTrace,
    FitResult,
    PowerLawMSD,
    classify_spread,
    cv_convergence,
    evolve,
    evolve_ensemble,
    fit_power_law,
    initial_state,
    walk_participation_ratio,
)
from .hilbert import SiteDistribution, WalkState, localized_state
from .noise import NoiseProfile, build_noisy_step, noisy_pr_ensemble, sample_noise
from .spectrum import SpectralReport, StepOperator, analytic_spectrum, build_step, numerical_spectrum

__all__ = [
    "CVConvergence",
    "CoinParams",
    "DynamicsTrace",
    "FitResult",
    "NoiseProfile",
    "PRESETS",
    "PowerLawMSD",
    "SiteDistribution",
    "SpectralReport",
    "StepOperator",
    "WalkState",
    "__version__",
    "analytic_spectrum",
    "build_coin",
    "build_noisy_step",
    "build_step",
    "classify_spread",
    "coin_eigensystem",
    "cv_convergence",
    "evolve",
    "evolve_ensemble",
    "fit_power_law",
    "initial_state",
    "localized_state",
    "noisy_pr_ensemble",
    "numerical_spectrum",
    "preset",
    "sample_noise",
    "walk_participation_ratio",
]
