"""Time evolution, mean squared displacement, spreading exponents, convergence."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .coin import CoinParams, build_coin
from .hilbert import PLUS, WalkState, check_sites, cyclic_distance, default_initial_site, localized_state
from .spectrum import StepOperator, participation_ratio

MSD_MODES = ("site", "mean")
LINE_HORIZON = 50


@dataclass(frozen=True, eq=False)
class DynamicsTrace:
    n_sites: int
    s0: int
    steps: np.ndarray
    msd: np.ndarray
    mean_positions: np.ndarray
    distributions: np.ndarray | None = None  # (records, N)
    final_state: WalkState | None = None
    msd_mode: str = "site"

    def rows(self):
        """CSV rows ``(step, x_mean, msd)`` with 1-based mean positions."""
        for m, x, d in zip(self.steps, self.mean_positions, self.msd):
            yield int(m), float(x) + 1.0, float(d)

    def at(self, step: int) -> int:
        """Record index of ``step``."""
        idx = np.searchsorted(self.steps, step)
        if idx >= self.steps.size or self.steps[idx] != step:
            raise KeyError(f"step {step} was not recorded")
        return int(idx)


def squared_distances(n_sites: int, s0) -> np.ndarray:
    return cyclic_distance(n_sites, np.arange(n_sites), s0) ** 2


def msd_at(dist, s0, mode: str = "site") -> float:
    """Mean squared cyclic displacement from ``s0`` of a site distribution.

    ``mode="site"`` weights the squared distance of every site;
    ``mode="mean"`` squares the cyclic distance of the mean position instead.
    """
    probs = np.asarray(getattr(dist, "probabilities", dist), dtype=float)
    n = probs.size
    if mode == "site":
        return float(squared_distances(n, s0) @ probs)
    if mode == "mean":
        x = float(np.arange(n) @ probs)
        return float(cyclic_distance(n, x, s0) ** 2)
    raise ValueError(f"unknown msd mode {mode!r}; choose from {MSD_MODES}")


def _check_run(n_steps, record_every):
    if int(n_steps) < 1:
        raise ValueError("n_steps must be >= 1")
    if int(record_every) < 1:
        raise ValueError("record_every must be >= 1")
    return int(n_steps), int(record_every)


def _propagate(psi, coins, phases, n_steps, record_every, s0, msd_mode, store):
    """Evolve a batch ``psi`` of shape ``(R, N, 2)`` in place of the caller.

    ``coins`` is ``(2, 2)`` or ``(R, 2, 2)``; ``phases`` is ``None``, ``(N,)``
    or ``(R, N)``. Returns record steps, msd, mean positions, distributions
    (or None) and the final batch.
    """
    n = psi.shape[-2]
    coins_t = np.swapaxes(coins, -1, -2)
    diag = None if phases is None else np.exp(1j * np.asarray(phases))[..., None]
    d2 = squared_distances(n, s0)
    sites = np.arange(n, dtype=float)
    records = np.arange(0, n_steps + 1, record_every)
    msd = np.empty(psi.shape[:-2] + (records.size,))
    xmean = np.empty_like(msd)
    dists = np.empty(psi.shape[:-2] + (records.size, n)) if store else None

    def record(i):
        probs = (psi.real**2 + psi.imag**2).sum(axis=-1)
        x = probs @ sites
        xmean[..., i] = x
        if msd_mode == "site":
            msd[..., i] = probs @ d2
        else:
            msd[..., i] = cyclic_distance(n, x, s0) ** 2
        if store:
            dists[..., i, :] = probs

    record(0)
    r = 1
    for m in range(1, n_steps + 1):
        grid = psi @ coins_t
        psi = np.empty_like(grid)
        psi[..., 0] = np.roll(grid[..., 0], 1, axis=-1)
        psi[..., 1] = np.roll(grid[..., 1], -1, axis=-1)
        if diag is not None:
            psi *= diag
        if m % record_every == 0:
            record(r)
            r += 1
    return records, msd, xmean, dists, psi


def evolve(
    initial: WalkState,
    step: StepOperator,
    n_steps: int,
    record_every: int = 1,
    s0: int | None = None,
    msd_mode: str = "site",
    store_distributions: bool = True,
) -> DynamicsTrace:
    """Apply ``step`` ``n_steps`` times, recording every ``record_every`` steps.

    ``s0`` is the reference site for displacements; by default the site
    holding the most initial probability.
    """
    if initial.n_sites != step.n_sites:
        raise ValueError(f"state has N={initial.n_sites}, step operator N={step.n_sites}")
    if msd_mode not in MSD_MODES:
        raise ValueError(f"unknown msd mode {msd_mode!r}")
    n_steps, record_every = _check_run(n_steps, record_every)
    n = initial.n_sites
    if s0 is None:
        s0 = int(np.argmax((np.abs(initial.grid) ** 2).sum(axis=1)))
    records, msd, xmean, dists, final = _propagate(
        initial.grid.copy(), step.coin_matrix, step.site_phases, n_steps, record_every, s0, msd_mode,
        store_distributions,
    )
    # recorded distributions keep any drift; only the stored final state is renormalized
    final_state = WalkState.from_grid(final, renormalize=True)
    return DynamicsTrace(n, int(s0), records, msd, xmean, dists, final_state, msd_mode)


def evolve_ensemble(
    initial: WalkState,
    step: StepOperator,
    noises,
    n_steps: int,
    record_every: int = 1,
    s0: int | None = None,
    msd_mode: str = "site",
    store_distributions: bool = False,
) -> list[DynamicsTrace]:
    """Vectorized :func:`evolve` over several noise profiles (one trace each).

    Equivalent to evolving ``build_noisy_step(step, noise)`` per profile.
    """
    noises = list(noises)
    n_steps, record_every = _check_run(n_steps, record_every)
    n = initial.n_sites
    if s0 is None:
        s0 = int(np.argmax((np.abs(initial.grid) ** 2).sum(axis=1)))
    base = np.zeros(n) if step.site_phases is None else step.site_phases
    for noise in noises:
        if noise.n_sites != n:
            raise ValueError(f"noise profile has N={noise.n_sites}, state N={n}")
    phases = np.array([base + noise.phases for noise in noises]).reshape(len(noises), n)
    psi = np.broadcast_to(initial.grid, (len(noises), n, 2)).copy()
    records, msd, xmean, dists, final = _propagate(
        psi, step.coin_matrix, phases, n_steps, record_every, s0, msd_mode, store_distributions
    )
    return [
        DynamicsTrace(
            n, int(s0), records, msd[i], xmean[i], None if dists is None else dists[i],
            WalkState.from_grid(final[i], renormalize=True), msd_mode,
        )
        for i in range(len(noises))
    ]


def final_distributions(n_sites: int, coins, n_steps: int, s0: int | None = None, coin_state=PLUS) -> np.ndarray:
    """Site distributions after ``n_steps`` noiseless steps for a batch of coins.

    ``coins`` is a sequence of :class:`CoinParams`; returns ``(len(coins), N)``.
    """
    n = check_sites(n_sites)
    s0 = default_initial_site(n) if s0 is None else s0
    mats = np.array([build_coin(c) for c in coins])
    psi = np.zeros((len(mats), n, 2), dtype=complex)
    psi[:, s0] = np.asarray(coin_state, dtype=complex)
    _, _, _, _, final = _propagate(psi, mats, None, int(n_steps), int(n_steps), s0, "site", False)
    return (np.abs(final) ** 2).sum(axis=-1)


def walk_participation_ratio(
    n_sites: int, coin: CoinParams, n_steps: int = 1000, s0: int | None = None, coin_state=PLUS
) -> float:
    """Participation ratio of the walker's site distribution after ``n_steps``."""
    return participation_ratio(final_distributions(n_sites, [coin], n_steps, s0, coin_state)[0])


# --- power-law spreading ---------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    alpha: float
    beta: float
    window: tuple[int, int]
    residual: float
    method: str = "nonlinear"

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "window": list(self.window),
            "residual": self.residual,
            "method": self.method,
            "regime": classify_spread(self.beta),
        }


class PowerLawMSD(RegressorMixin, BaseEstimator):
    """Fit ``msd ~ alpha * m**beta``.

    Parameters
    ----------
    method : {"nonlinear", "loglog"}
        ``"loglog"`` is ordinary least squares on ``(log m, log msd)``.
        ``"nonlinear"`` refines that estimate by least squares on the raw
        values, which weights late steps the way the ballistic asymptote
        needs.

    Attributes
    ----------
    alpha_, beta_ : float
    residual_ : float
        Root-mean-square residual in log-log space.
    """

    def __init__(self, method: str = "nonlinear"):
        self.method = method

    def fit(self, X, y):
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(len(y), -1), y, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError("PowerLawMSD expects a single feature (step number)")
        m = X[:, 0]
        if m.size < 3:
            raise ValueError("need at least 3 points for a power-law fit")
        if np.any(m <= 0) or np.any(y <= 0):
            raise ValueError("power-law fit requires strictly positive steps and values")
        logm, logy = np.log(m), np.log(y)
        beta, intercept = np.polyfit(logm, logy, 1)
        alpha = np.exp(intercept)
        if self.method == "nonlinear":
            scale = np.max(y)
            sol = least_squares(
                lambda p: (p[0] * m ** p[1] - y) / scale,
                x0=[alpha, beta],
                method="lm",
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
            )
            alpha, beta = sol.x
        elif self.method != "loglog":
            raise ValueError(f"unknown fit method {self.method!r}")
        self.alpha_ = float(alpha)
        self.beta_ = float(beta)
        self.residual_ = float(np.sqrt(np.mean((logy - np.log(alpha) - beta * logm) ** 2)))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "beta_")
        m = check_array(np.asarray(X, dtype=float).reshape(-1, 1))[:, 0]
        return self.alpha_ * m**self.beta_


def default_fit_window(n_sites: int) -> tuple[int, int]:
    return 1, min(LINE_HORIZON, check_sites(n_sites) // 2)


def fit_power_law(trace: DynamicsTrace, window: tuple[int, int] | None = None, method: str = "nonlinear") -> FitResult:
    lo, hi = default_fit_window(trace.n_sites) if window is None else (int(window[0]), int(window[1]))
    if lo > hi:
        raise ValueError(f"empty fit window [{lo}, {hi}]")
    if hi > trace.steps[-1]:
        raise ValueError(f"fit window ends at {hi}, trace only reaches step {trace.steps[-1]}")
    sel = (trace.steps >= max(lo, 1)) & (trace.steps <= hi)
    m, y = trace.steps[sel], trace.msd[sel]
    if m.size < 3:
        raise ValueError(f"fit window [{lo}, {hi}] holds fewer than 3 recorded steps")
    if np.any(y <= 0):
        raise ValueError(f"fit window [{lo}, {hi}] contains zero mean squared displacement")
    est = PowerLawMSD(method=method).fit(m.reshape(-1, 1), y)
    return FitResult(est.alpha_, est.beta_, (lo, hi), est.residual_, method)


def classify_spread(beta: float, tol: float = 0.05) -> str:
    beta = float(beta)
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    if beta <= 0:
        return "localized/anomalous"
    if abs(beta - 2) <= tol:
        return "ballistic"
    if beta > 2 + tol:
        return "super-ballistic"
    if abs(beta - 1) <= tol:
        return "diffusive"
    if beta > 1:
        return "super-diffusive"
    return "sub-diffusive"


# --- walk-on-the-cycle convergence -----------------------------------------


def cv_window_size(n_sites: int) -> int:
    return max(10, check_sites(n_sites) // 4)


def moving_cv(series, window: int) -> np.ndarray:
    """Bias-corrected coefficient of variation over a sliding window.

    Windows with zero mean get ``inf``.
    """
    x = np.asarray(series, dtype=float)
    if window < 2:
        raise ValueError("CV window needs at least 2 samples")
    if x.size < window:
        return np.empty(0)
    view = np.lib.stride_tricks.sliding_window_view(x, window)
    mean = view.mean(axis=1)
    std = view.std(axis=1, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cv = (1 + 1 / (4 * window)) * std / mean
    cv[mean <= 0] = np.inf
    return cv


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    window_size: int
    cv: np.ndarray
    window_end_steps: np.ndarray
    min_cv: float
    converged: bool
    convergence_step: int | None
    saturation_level: float | None
    threshold: float = 0.01
    saturation_rule: str = "first"
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "window_size": self.window_size,
            "min_cv": self.min_cv,
            "converged": self.converged,
            "convergence_step": self.convergence_step,
            "saturation_level": self.saturation_level,
            "threshold": self.threshold,
            "saturation_rule": self.saturation_rule,
            "diagnostics": list(self.diagnostics),
        }


class CVConvergence(BaseEstimator):
    """Detect saturation of an MSD series by its windowed coefficient of variation.

    ``fit(msd, steps)`` slides a window of ``window_size`` recorded samples over
    the part of the series ending at or before ``horizon`` steps. The series
    converges at the first window with CV <= ``threshold``. The saturation
    level is that window's mean (``saturation="first"``) or the mean of the
    minimum-CV window (``saturation="min_cv"``, defined even without
    convergence).
    """

    def __init__(self, window_size: int = 10, threshold: float = 0.01, horizon: int | None = None, saturation: str = "first"):
        self.window_size = window_size
        self.threshold = threshold
        self.horizon = horizon
        self.saturation = saturation

    def fit(self, msd, steps=None):
        msd = check_array(np.asarray(msd, dtype=float).reshape(1, -1), ensure_all_finite=True)[0]
        steps = np.arange(msd.size) if steps is None else np.asarray(steps)
        if steps.shape != msd.shape:
            raise ValueError("steps and msd must have equal length")
        if self.saturation not in ("first", "min_cv"):
            raise ValueError(f"unknown saturation rule {self.saturation!r}")
        n = int(self.window_size)
        if self.horizon is not None:
            keep = steps <= self.horizon
            msd, steps = msd[keep], steps[keep]
        cv = moving_cv(msd, n)
        ends = steps[n - 1 :]
        diagnostics = []
        if cv.size == 0:
            diagnostics.append(f"series shorter than the CV window ({msd.size} < {n})")
        zero = np.flatnonzero(~np.isfinite(cv))
        if zero.size:
            diagnostics.append(f"{zero.size} window(s) with zero mean MSD treated as non-convergent")
        hits = np.flatnonzero(cv <= self.threshold)
        finite = np.isfinite(cv)
        min_cv = float(cv[finite].min()) if finite.any() else float("inf")
        converged = hits.size > 0
        step = sat = None
        if converged:
            step = int(ends[hits[0]])
        if self.saturation == "first" and converged:
            sat = float(msd[hits[0] : hits[0] + n].mean())
        elif self.saturation == "min_cv" and finite.any():
            i = int(np.argmin(np.where(finite, cv, np.inf)))
            sat = float(msd[i : i + n].mean())
        self.cv_ = cv
        self.window_end_steps_ = ends
        self.min_cv_ = min_cv
        self.converged_ = converged
        self.convergence_step_ = step
        self.saturation_level_ = sat
        self.diagnostics_ = diagnostics
        return self

    def report(self) -> ConvergenceReport:
        check_is_fitted(self, "cv_")
        return ConvergenceReport(
            window_size=int(self.window_size),
            cv=self.cv_,
            window_end_steps=self.window_end_steps_,
            min_cv=self.min_cv_,
            converged=self.converged_,
            convergence_step=self.convergence_step_,
            saturation_level=self.saturation_level_,
            threshold=self.threshold,
            saturation_rule=self.saturation,
            diagnostics=self.diagnostics_,
        )


def cv_convergence(
    trace: DynamicsTrace, threshold: float = 0.01, horizon: int | None = None, saturation: str = "first"
) -> ConvergenceReport:
    est = CVConvergence(cv_window_size(trace.n_sites), threshold, horizon, saturation)
    return est.fit(trace.msd, trace.steps).report()


def ensemble_mean_trace(traces) -> DynamicsTrace:
    """Trace whose MSD and mean position are averaged over ``traces``."""
    traces = list(traces)
    first = traces[0]
    for t in traces[1:]:
        if t.n_sites != first.n_sites or not np.array_equal(t.steps, first.steps):
            raise ValueError("traces must share N and recorded steps")
    return DynamicsTrace(
        first.n_sites,
        first.s0,
        first.steps,
        np.mean([t.msd for t in traces], axis=0),
        np.mean([t.mean_positions for t in traces], axis=0),
        msd_mode=first.msd_mode,
    )


def initial_state(n_sites: int, s0: int | None = None, coin_state=PLUS) -> WalkState:
    return localized_state(n_sites, default_initial_site(n_sites) if s0 is None else s0, coin_state)
