"""Parameter sweeps, disorder ensembles and figure data generation."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import __version__
from .angles import angle_label
from .coin import PRESETS, CoinParams, preset
from .dynamics import (
    CVConvergence,
    FitResult,
    cv_window_size,
    default_fit_window,
    ensemble_mean_trace,
    evolve,
    evolve_ensemble,
    final_distributions,
    fit_power_law,
    initial_state,
)
from .hilbert import check_sites
from .io import sha256, write_csv, write_json
from .noise import (
    PR_AGGREGATE_HEADER,
    PR_HEADER,
    PREnsemble,
    boxplot_stats,
    build_noisy_step,
    check_phi_max,
    noisy_pr_ensemble,
    pr_aggregate_row,
    pr_rows,
    sample_noise,
)
from .spectrum import analytic_spectrum, build_step, degenerate_pair_states, numerical_spectrum, participation_ratios

PI = math.pi
PR_MAP_SLICES = ("gamma-halfsum", "theta-phi")
PR_MAP_MAX_SITES = 256

# Fig. 10 site ranges, keyed by (coin preset, parity)
SATURATION_PRESETS = {
    ("hadamard", "odd"): tuple(range(13, 50, 2)),
    ("hadamard", "even"): tuple(range(20, 51, 2)),
    ("symmetric", "odd"): tuple(range(3, 50, 2)),
    ("symmetric", "even"): tuple(range(20, 51, 2)),
}
NOISE_LEVELS = tuple(k * PI / 12 for k in range(13))
DYNAMICS_LEVELS = (0.0, PI / 10, PI / 3, PI)


def _coin_name(coin: CoinParams) -> str | None:
    for name, params in PRESETS.items():
        if params == coin:
            return name
    return None


def _coin_echo(coin: CoinParams) -> dict:
    return {"name": _coin_name(coin), "gamma": coin.gamma, "theta": coin.theta, "phi": coin.phi}


# --- provenance ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """Inputs of a sweep; echoed verbatim into every record."""

    coins: tuple[str, ...] = ("hadamard",)
    sizes: tuple[int, ...] = (128,)
    phi_levels: tuple[float, ...] = DYNAMICS_LEVELS
    n_realizations: int = 50
    seed: int = 0
    n_steps: int | None = None
    record_every: int = 1
    fit_window: tuple[int, int] | None = None
    threshold: float = 0.01
    outdir: str | None = None

    def __post_init__(self):
        for name in self.coins:
            preset(name)
        for n in self.sizes:
            check_sites(n)
        for phi in self.phi_levels:
            check_phi_max(phi)
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.n_steps is not None and self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.fit_window is not None and not 1 <= self.fit_window[0] <= self.fit_window[1]:
            raise ValueError(f"bad fit window {self.fit_window}")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepRecord:
    kind: str
    config: dict
    results: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "config": self.config, "results": self.results, "version": __version__}


# --- Fig. 3 maps ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PRMap:
    n_sites: int
    slice: str
    quantity: str
    x_name: str
    x: np.ndarray
    y_name: str
    y: np.ndarray
    values: np.ndarray  # (len(y), len(x))

    def rows(self):
        for i, yv in enumerate(self.y):
            for j, xv in enumerate(self.x):
                yield float(yv), float(xv), float(self.values[i, j])

    def value_at(self, x: float, y: float) -> float:
        i = int(np.argmin(np.abs(self.y - y)))
        j = int(np.argmin(np.abs(self.x - x)))
        return float(self.values[i, j])


def pr_map_axes(grid_resolution: int, slice: str):
    """Grid axes of a coin slice: ``(x_name, x, y_name, y, coin_of(x, y))``."""
    r = int(grid_resolution)
    if r < 2:
        raise ValueError("grid_resolution must be >= 2")
    if slice == "gamma-halfsum":
        # the half-sum is pi-periodic, so its last column is left out; gamma
        # keeps both ends so pi/4 lies on the grid for even resolutions
        x = np.arange(r) * PI / r
        y = np.linspace(0.0, PI / 2, r + 1)
        return "half_sum", x, "gamma", y, lambda xv, yv: CoinParams.from_half_sum(yv, xv)
    if slice == "theta-phi":
        x = np.arange(r) * 2 * PI / r
        y = np.arange(r) * 2 * PI / r
        return "theta", x, "phi", y, lambda xv, yv: CoinParams(PI / 4, xv, yv)
    raise ValueError(f"unknown slice {slice!r}; choose from {PR_MAP_SLICES}")


def _eigen_mean_pr(n_sites, coins):
    return [numerical_spectrum(build_step(n_sites, c)).mean_pr for c in coins]


def coin_pr_map(
    n_sites: int,
    grid_resolution: int = 64,
    slice: str = "gamma-halfsum",
    quantity: str = "walk",
    n_steps: int = 1000,
    n_jobs: int | None = None,
) -> PRMap:
    """Participation ratio over a two-parameter coin slice.

    ``quantity="walk"`` is the PR of the walker's site distribution after
    ``n_steps`` from the centre site; ``quantity="eigenstates"`` is the mean
    eigenstate PR of the noiseless step.
    """
    n = check_sites(n_sites)
    if n > PR_MAP_MAX_SITES:
        raise ValueError(f"coin PR maps are limited to N <= {PR_MAP_MAX_SITES}")
    x_name, x, y_name, y, make = pr_map_axes(grid_resolution, slice)
    coins = [make(xv, yv) for yv in y for xv in x]
    if quantity == "walk":
        chunks = [coins[i : i + 512] for i in range(0, len(coins), 512)]
        values = np.concatenate([participation_ratios(final_distributions(n, chunk, n_steps)) for chunk in chunks])
    elif quantity == "eigenstates":
        chunks = [coins[i : i + 64] for i in range(0, len(coins), 64)]
        parts = Parallel(n_jobs=n_jobs)(delayed(_eigen_mean_pr)(n, chunk) for chunk in chunks)
        values = np.concatenate(parts)
    else:
        raise ValueError(f"unknown quantity {quantity!r}; choose 'walk' or 'eigenstates'")
    return PRMap(n, slice, quantity, x_name, x, y_name, y, values.reshape(len(y), len(x)))


# --- Fig. 6: spreading exponent versus noise ------------------------------------


@dataclass(frozen=True, eq=False)
class BetaLevel:
    phi_max: float
    realizations: np.ndarray  # indices of the fitted realizations
    alphas: np.ndarray
    betas: np.ndarray
    failures: list
    mean_fit: FitResult | None
    pr: PREnsemble | None = None

    @property
    def stats(self) -> dict:
        return boxplot_stats(self.betas) if self.betas.size else {}

    @property
    def median_beta(self) -> float:
        return float(np.median(self.betas)) if self.betas.size else float("nan")

    @property
    def median_mean_pr(self) -> float | None:
        return None if self.pr is None else float(np.median(self.pr.mean_prs))

    def summary(self) -> dict:
        out = {
            "phi_max": self.phi_max,
            "n_fitted": int(self.betas.size),
            "n_failed": len(self.failures),
            "beta": self.stats,
            "alpha_median": float(np.median(self.alphas)) if self.alphas.size else None,
            "ensemble_mean_fit": None if self.mean_fit is None else self.mean_fit.to_dict(),
            "failures": [{"realization": i, "error": msg} for i, msg in self.failures],
        }
        if self.pr is not None:
            out["mean_pr"] = self.pr.stats
            out["pooled_pr"] = self.pr.pooled_stats
        return out


def find_crossover(levels, values, target: float = 1.0) -> float | None:
    """First noise level where ``values`` crosses ``target`` (linear interpolation)."""
    levels, values = np.asarray(levels, dtype=float), np.asarray(values, dtype=float) - target
    order = np.argsort(levels)
    levels, values = levels[order], values[order]
    for i in range(levels.size - 1):
        a, b = values[i], values[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0:
            return float(levels[i])
        if a * b < 0 or b == 0:
            return float(levels[i] + (levels[i + 1] - levels[i]) * a / (a - b))
    return None


@dataclass(frozen=True, eq=False)
class BetaSweep:
    n_sites: int
    coin: CoinParams
    seed: int
    window: tuple[int, int]
    levels: list

    @property
    def phi_levels(self) -> np.ndarray:
        return np.array([lv.phi_max for lv in self.levels])

    @property
    def median_betas(self) -> np.ndarray:
        return np.array([lv.median_beta for lv in self.levels])

    def crossover(self, target: float = 1.0) -> float | None:
        return find_crossover(self.phi_levels, self.median_betas, target)

    def level(self, phi_max: float) -> BetaLevel:
        for lv in self.levels:
            if abs(lv.phi_max - phi_max) <= 1e-12:
                return lv
        raise KeyError(f"noise level {phi_max!r} not in sweep")

    def rows(self):
        """``(phi_max, realization, alpha, beta)`` per fitted realization."""
        for lv in self.levels:
            for i, a, b in zip(lv.realizations, lv.alphas, lv.betas):
                yield lv.phi_max, int(i), float(a), float(b)

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "coin": _coin_echo(self.coin),
            "seed": self.seed,
            "window": list(self.window),
            "crossover": self.crossover(),
            "levels": [lv.summary() for lv in self.levels],
        }


def noise_beta_sweep(
    n_sites: int,
    coin: CoinParams,
    phi_levels=DYNAMICS_LEVELS,
    n_realizations: int = 50,
    seed: int = 0,
    window: tuple[int, int] | None = None,
    method: str = "nonlinear",
    s0: int | None = None,
    with_pr: bool = False,
    n_jobs: int | None = None,
) -> BetaSweep:
    """Per-realization spreading exponents for each noise level.

    Realization ``i`` uses the noise stream ``(seed, i)`` at every level, so
    levels differ only by scale. The ensemble-mean MSD is fitted as well.
    """
    n = check_sites(n_sites)
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    window = default_fit_window(n) if window is None else (int(window[0]), int(window[1]))
    levels = [check_phi_max(p) for p in phi_levels]
    psi0 = initial_state(n, s0)
    step = build_step(n, coin)
    noises = [sample_noise(n, phi, seed, i) for phi in levels for i in range(n_realizations)]
    traces = evolve_ensemble(psi0, step, noises, window[1])
    out = []
    for j, phi in enumerate(levels):
        block = traces[j * n_realizations : (j + 1) * n_realizations]
        fitted, alphas, betas, failures = [], [], [], []
        for i, trace in enumerate(block):
            try:
                fit = fit_power_law(trace, window, method)
            except ValueError as exc:
                failures.append((i, str(exc)))
                continue
            fitted.append(i)
            alphas.append(fit.alpha)
            betas.append(fit.beta)
        try:
            mean_fit = fit_power_law(ensemble_mean_trace(block), window, method)
        except ValueError:
            mean_fit = None
        pr = noisy_pr_ensemble(n, coin, phi, n_realizations, seed, n_jobs) if with_pr else None
        out.append(BetaLevel(phi, np.array(fitted, dtype=int), np.array(alphas), np.array(betas), failures, mean_fit, pr))
    return BetaSweep(n, coin, int(seed), window, out)


# --- Figs. 9-10: walk-on-the-cycle saturation -----------------------------------


@dataclass(frozen=True)
class SaturationRow:
    coin: str
    n_sites: int
    parity: str
    phi_max: float
    realization: int  # -1 for the ensemble-mean trace
    converged: bool
    convergence_step: int | None
    min_cv: float
    saturation_level: float | None

    HEADER = (
        "coin", "n_sites", "parity", "phi_max", "realization", "converged", "convergence_step", "min_cv",
        "saturation_level",
    )

    def as_tuple(self):
        return tuple(getattr(self, k) for k in self.HEADER)


def saturation_sweep(
    sizes,
    coin: CoinParams,
    phi_levels=NOISE_LEVELS,
    n_realizations: int = 10,
    seed: int = 0,
    n_steps: int = 5000,
    record_every: int = 1,
    threshold: float = 0.01,
    saturation: str = "min_cv",
    aggregate: str = "realization",
) -> list[SaturationRow]:
    """CV convergence and saturation level per ``(N, phi_max, realization)``.

    Non-convergence is recorded, never raised. ``aggregate="ensemble"``
    analyses the realization-averaged MSD instead (one row per point,
    ``realization=-1``).
    """
    if aggregate not in ("realization", "ensemble"):
        raise ValueError(f"unknown aggregate {aggregate!r}")
    name = _coin_name(coin) or "custom"
    levels = [check_phi_max(p) for p in phi_levels]
    rows = []
    for n in sorted({check_sites(n) for n in sizes}):
        noises = [sample_noise(n, phi, seed, i) for phi in levels for i in range(n_realizations)]
        traces = evolve_ensemble(initial_state(n), build_step(n, coin), noises, n_steps, record_every)
        est = CVConvergence(cv_window_size(n), threshold, n_steps, saturation)
        parity = "even" if n % 2 == 0 else "odd"
        for j, phi in enumerate(levels):
            block = traces[j * n_realizations : (j + 1) * n_realizations]
            targets = [(-1, ensemble_mean_trace(block))] if aggregate == "ensemble" else list(enumerate(block))
            for i, trace in targets:
                rep = est.fit(trace.msd, trace.steps).report()
                rows.append(
                    SaturationRow(
                        name, n, parity, phi, i, rep.converged, rep.convergence_step, rep.min_cv, rep.saturation_level
                    )
                )
    return rows


def median_over_realizations(rows, field_name: str, n_sites: int, phi_max: float) -> float:
    vals = [
        getattr(r, field_name)
        for r in rows
        if r.n_sites == n_sites and abs(r.phi_max - phi_max) <= 1e-12 and getattr(r, field_name) is not None
    ]
    return float(np.median(vals)) if vals else float("nan")


# --- figure reproduction --------------------------------------------------------

FIGURES = {
    1: "step eigenvalues in the complex plane",
    2: "eigenstate site distributions, degenerate and non-degenerate",
    3: "coin participation-ratio maps and final distributions",
    4: "Hadamard walk-on-the-line dynamics",
    5: "symmetric-coin walk-on-the-line dynamics",
    6: "participation ratio and spreading exponent versus noise",
    7: "Hadamard long-run mean squared displacement",
    8: "symmetric-coin long-run mean squared displacement",
    9: "minimum coefficient of variation versus N",
    10: "saturation level versus noise",
}
DEFAULT_REALIZATIONS = {6: 50, 9: 10, 10: 5}


class FigureWriter:
    def __init__(self, figure: int, outdir):
        self.figure = figure
        self.outdir = Path(outdir)
        self.files = []

    def _path(self, series: str, ext: str) -> Path:
        path = self.outdir / f"fig{self.figure}_{series}.{ext}"
        self.files.append(path)
        return path

    def csv(self, series, header, rows):
        write_csv(self._path(series, "csv"), header, rows)

    def json(self, series, obj):
        write_json(self._path(series, "json"), obj)


def _trace_rows(trace):
    return trace.rows()


def _dist_rows(trace):
    for r, step in enumerate(trace.steps):
        for s, p in enumerate(trace.distributions[r]):
            yield int(step), s + 1, float(p)


def _fig_spectra(w: FigureWriter, cfg):
    n = cfg["n_sites"]
    for g, h in cfg["coins"]:
        coin = CoinParams.from_half_sum(g, h)
        report = numerical_spectrum(build_step(n, coin))
        label = f"gamma{angle_label(g)}_halfsum{angle_label(h)}"
        w.csv(f"eigenvalues_{label}", ("k", "re", "im", "omega", "pr"), report.rows())


def _fig_eigenstates(w: FigureWriter, cfg):
    n = cfg["n_sites"]
    coin = CoinParams.from_half_sum(PI / 4, cfg["degenerate_m"] * PI / n)
    k, k2, branch, amps = degenerate_pair_states(n, coin)[0]
    probs = (np.abs(amps.reshape(n, 2)) ** 2).sum(axis=1)
    w.csv("degenerate", ("site", "probability"), ((s + 1, float(p)) for s, p in enumerate(probs)))
    report = analytic_spectrum(n, CoinParams.from_half_sum(PI / 4, cfg["nondegenerate_half_sum"]))
    w.csv("nondegenerate", ("site", "probability"), ((s + 1, float(p)) for s, p in enumerate(report.distributions[0])))


def _fig_pr_maps(w: FigureWriter, cfg):
    n = cfg["n_sites"]
    for panel, sl in (("a", "gamma-halfsum"), ("d", "theta-phi")):
        pm = coin_pr_map(n, cfg["grid_resolution"], sl, cfg["quantity"], cfg["n_steps"])
        w.csv(f"prmap_{panel}", (pm.y_name, pm.x_name, "pr"), pm.rows())
    for panel, (g, t, p) in cfg["walk_coins"].items():
        dist = final_distributions(n, [CoinParams(g, t, p)], cfg["n_steps"])[0]
        w.csv(f"final_{panel}", ("site", "probability"), ((s + 1, float(v)) for s, v in enumerate(dist)))


def _fig_dynamics(w: FigureWriter, cfg, seed):
    n = cfg["n_sites"]
    coin = preset(cfg["coin"])
    for phi in cfg["phi_levels"]:
        step = build_noisy_step(build_step(n, coin), sample_noise(n, phi, seed, 0))
        trace = evolve(initial_state(n), step, cfg["n_steps"], cfg.get("record_every", 1),
                       store_distributions=cfg["distributions"])
        label = f"phi{angle_label(phi)}"
        w.csv(f"trace_{label}", ("step", "x_mean", "msd"), _trace_rows(trace))
        if cfg.get("fit", True):
            w.json(f"fit_{label}", fit_power_law(trace, cfg.get("window")).to_dict())
        if cfg.get("convergence_horizon"):
            est = CVConvergence(cv_window_size(n), 0.01, cfg["convergence_horizon"], "min_cv")
            w.json(f"convergence_{label}", est.fit(trace.msd, trace.steps).report().to_dict())
        if cfg["distributions"]:
            w.csv(f"distribution_{label}", ("step", "site", "probability"), _dist_rows(trace))


def _fig_beta_noise(w: FigureWriter, cfg, seed, n_jobs):
    summary = {}
    for name in cfg["coins"]:
        sweep = noise_beta_sweep(
            cfg["n_sites"], preset(name), cfg["phi_levels"], cfg["n_realizations"], seed, with_pr=True, n_jobs=n_jobs
        )
        w.csv(f"beta_{name}", ("phi_max", "realization", "alpha", "beta"), sweep.rows())
        w.csv(f"pr_{name}", PR_HEADER, (row for lv in sweep.levels for row in pr_rows(lv.pr)))
        w.csv(f"pr_aggregate_{name}", PR_AGGREGATE_HEADER, (pr_aggregate_row(lv.pr) for lv in sweep.levels))
        summary[name] = sweep.to_dict()
    w.json("summary", summary)


def _fig_saturation(w: FigureWriter, cfg, seed, series):
    for name, parity in series:
        sizes = cfg["sizes"].get(f"{name}_{parity}") if isinstance(cfg["sizes"], dict) else None
        if sizes is None:
            sizes = [n for n in cfg["sizes"] if (n % 2 == 0) == (parity == "even")]
        rows = saturation_sweep(
            sizes, preset(name), cfg["phi_levels"], cfg["n_realizations"], seed, cfg["n_steps"], cfg["record_every"]
        )
        w.csv(f"{name}_{parity}", SaturationRow.HEADER, (r.as_tuple() for r in rows))


def figure_config(figure: int, n_realizations: int | None = None) -> dict:
    """Parameters used to regenerate ``figure``."""
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {sorted(FIGURES)}")
    reps = n_realizations or DEFAULT_REALIZATIONS.get(figure)
    if figure == 1:
        return {"n_sites": 128, "coins": [[0.0, 0.0], [PI / 4, 0.0], [PI / 4, PI / 4]]}
    if figure == 2:
        return {"n_sites": 128, "degenerate_m": 64, "nondegenerate_half_sum": 5 * PI / 14}
    if figure == 3:
        return {
            "n_sites": 32,
            "grid_resolution": 64,
            "quantity": "walk",
            "n_steps": 1000,
            "walk_coins": {
                "b": [PI / 4, 5 * PI / 32, 5 * PI / 32],
                "c": [PI / 4, 5.5 * PI / 32, 5.5 * PI / 32],
                "e": [PI / 4, 13 * PI / 32, 17 * PI / 32],
                "f": [PI / 4, 12 * PI / 32, 17 * PI / 32],
            },
        }
    if figure in (4, 5):
        return {
            "n_sites": 128,
            "coin": "hadamard" if figure == 4 else "symmetric",
            "phi_levels": list(DYNAMICS_LEVELS),
            "n_steps": 64,
            "window": list(default_fit_window(128)),
            "distributions": True,
            "realization": 0,
        }
    if figure == 6:
        return {"n_sites": 128, "coins": ["hadamard", "symmetric"], "phi_levels": list(NOISE_LEVELS), "n_realizations": reps}
    if figure in (7, 8):
        return {
            "n_sites": 128,
            "coin": "hadamard" if figure == 7 else "symmetric",
            "phi_levels": list(DYNAMICS_LEVELS),
            "n_steps": 10000,
            "record_every": 10,
            "distributions": False,
            "fit": False,
            "convergence_horizon": 5000,
            "realization": 0,
        }
    if figure == 9:
        return {"sizes": list(range(3, 51)), "phi_levels": [PI], "n_realizations": reps, "n_steps": 5000, "record_every": 1}
    return {
        "sizes": {f"{c}_{p}": list(v) for (c, p), v in SATURATION_PRESETS.items()},
        "phi_levels": list(NOISE_LEVELS),
        "n_realizations": reps,
        "n_steps": 5000,
        "record_every": 1,
    }


def reproduce_figure(
    figure: int, outdir, seed: int = 0, n_realizations: int | None = None, n_jobs: int | None = None
) -> Path:
    """Write the data series behind ``figure`` and record them in ``manifest.json``.

    The manifest holds one entry per figure written to ``outdir``, so
    several figures can share a directory. Returns the manifest path.
    Outputs depend only on the arguments.
    """
    cfg = figure_config(figure, n_realizations)
    w = FigureWriter(figure, outdir)
    if figure == 1:
        _fig_spectra(w, cfg)
    elif figure == 2:
        _fig_eigenstates(w, cfg)
    elif figure == 3:
        _fig_pr_maps(w, cfg)
    elif figure in (4, 5, 7, 8):
        _fig_dynamics(w, cfg, seed)
    elif figure == 6:
        _fig_beta_noise(w, cfg, seed, n_jobs)
    elif figure == 9:
        _fig_saturation(w, cfg, seed, [(c, p) for c in ("hadamard", "symmetric") for p in ("odd", "even")])
    else:
        _fig_saturation(w, cfg, seed, list(SATURATION_PRESETS))
    entry = {
        "title": FIGURES[figure],
        "seed": int(seed),
        "config": cfg,
        "files": [{"name": p.name, "sha256": sha256(p)} for p in sorted(w.files)],
    }
    path = Path(outdir) / "manifest.json"
    manifest = json.loads(path.read_text()) if path.exists() else {}
    manifest.setdefault("figures", {})[str(figure)] = entry
    manifest["version"] = __version__
    return write_json(path, manifest)
