"""Command-line interface: ``cyclicwalk <subcommand> [flags]``.

Every subcommand accepts ``--seed``, ``--out``, ``--format {csv,json}`` and
``--config FILE``. The config file holds ``key = value`` lines named after
the long flags; explicit flags override it. ``CYCLICWALK_OUT`` sets the
default output directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .angles import parse_angle
from .coin import PRESETS, CoinParams, preset
from .dynamics import (
    MSD_MODES,
    CVConvergence,
    classify_spread,
    cv_window_size,
    evolve,
    fit_power_law,
    initial_state,
)
from .experiments import (
    DYNAMICS_LEVELS,
    FIGURES,
    NOISE_LEVELS,
    PR_MAP_SLICES,
    SaturationRow,
    SweepRecord,
    coin_pr_map,
    noise_beta_sweep,
    reproduce_figure,
    saturation_sweep,
)
from .io import write_csv, write_json
from .noise import PR_AGGREGATE_HEADER, PR_HEADER, build_noisy_step, pr_aggregate_row, pr_rows, sample_noise
from .spectrum import analytic_spectrum, build_step, numerical_spectrum

OUT_ENV = "CYCLICWALK_OUT"


class CliError(Exception):
    """Computation or I/O failure (exit status 1)."""


# --- argument types -------------------------------------------------------------


def _angle(text):
    try:
        return parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _angle_list(text):
    return [_angle(t) for t in str(text).split(",") if t.strip()]


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _window(text):
    parts = str(text).split(":")
    try:
        lo, hi = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"fit window must look like LO:HI, got {text!r}") from None
    if not 1 <= lo < hi:
        raise argparse.ArgumentTypeError(f"fit window needs 1 <= LO < HI, got {text!r}")
    return lo, hi


def _sizes(text):
    """``"20,24"``, ``"3:49"`` (inclusive) or ``"20:50:2"``, comma-combined."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            nums = [int(p) for p in part.split(":")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
        if len(nums) == 1:
            out.append(nums[0])
        elif len(nums) in (2, 3):
            out.extend(range(nums[0], nums[1] + 1, nums[2] if len(nums) == 3 else 1))
        else:
            raise argparse.ArgumentTypeError(f"bad size range {part!r}")
    if not out or min(out) < 3:
        raise argparse.ArgumentTypeError(f"sizes must be >= 3, got {text!r}")
    return sorted(set(out))


def _figures(text):
    if str(text).strip().lower() == "all":
        return sorted(FIGURES)
    try:
        figs = sorted({int(t) for t in str(text).split(",")})
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad figure list {text!r}") from None
    bad = [f for f in figs if f not in FIGURES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown figure(s) {bad}; choose from 1-10 or 'all'")
    return figs


# --- parser ---------------------------------------------------------------------


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="master seed for noise realizations")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", default=None, help="key = value file mirroring the flags")


def _coin_flags(p):
    p.add_argument("--coin", choices=sorted(PRESETS), default=None, help="coin preset (default hadamard)")
    p.add_argument("--gamma", type=_angle, default=None)
    p.add_argument("--theta", type=_angle, default=None)
    p.add_argument("--phi", type=_angle, default=None)
    p.add_argument("--half-sum", type=_angle, default=None, help="sets theta = phi")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclicwalk", description="Coined quantum walks on disordered cycles.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues and participation ratios of the step operator")
    _common(p)
    _coin_flags(p)
    p.add_argument("--sites", type=_positive_int, required=True)
    p.add_argument("--method", choices=("numerical", "analytic"), default="numerical")
    p.add_argument("--noise", type=_angle, default=0.0, help="static phase noise level (numerical only)")
    p.add_argument("--realization", type=int, default=0)

    p = sub.add_parser("walk", help="evolve a localized walker and fit the MSD power law")
    _common(p)
    _coin_flags(p)
    p.add_argument("--sites", type=_positive_int, required=True)
    p.add_argument("--steps", type=_positive_int, default=64)
    p.add_argument("--noise", type=_angle, default=0.0)
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--record-every", type=_positive_int, default=1)
    p.add_argument("--fit", type=_window, default=None, help="fit window LO:HI (default 1:min(50, N/2))")
    p.add_argument("--fit-method", choices=("nonlinear", "loglog"), default="nonlinear")
    p.add_argument("--s0", type=int, default=None, help="initial site (default N//2)")
    p.add_argument("--msd-mode", choices=MSD_MODES, default="site")

    p = sub.add_parser("sweep-beta", help="spreading exponent statistics versus noise level")
    _common(p)
    _coin_flags(p)
    p.add_argument("--sites", type=_positive_int, default=128)
    p.add_argument("--levels", type=_angle_list, default=list(DYNAMICS_LEVELS), help="comma-separated noise levels")
    p.add_argument("--realizations", type=_positive_int, default=50)
    p.add_argument("--fit", type=_window, default=None)
    p.add_argument("--with-pr", action="store_true", help="also compute eigenstate PR ensembles")

    p = sub.add_parser("sweep-saturation", help="CV convergence and saturation level versus N and noise")
    _common(p)
    _coin_flags(p)
    p.add_argument("--sizes", type=_sizes, default=_sizes("20:50:2"))
    p.add_argument("--levels", type=_angle_list, default=list(NOISE_LEVELS))
    p.add_argument("--realizations", type=_positive_int, default=10)
    p.add_argument("--steps", type=_positive_int, default=5000)
    p.add_argument("--record-every", type=_positive_int, default=1)
    p.add_argument("--threshold", type=float, default=0.01)
    p.add_argument("--saturation", choices=("first", "min_cv"), default="min_cv")
    p.add_argument("--aggregate", choices=("realization", "ensemble"), default="realization")

    p = sub.add_parser("pr-map", help="participation ratio over a coin-parameter slice")
    _common(p)
    p.add_argument("--sites", type=_positive_int, default=32)
    p.add_argument("--resolution", type=_positive_int, default=64)
    p.add_argument("--slice", choices=PR_MAP_SLICES, default="gamma-halfsum")
    p.add_argument("--quantity", choices=("walk", "eigenstates"), default="walk")
    p.add_argument("--steps", type=_positive_int, default=1000)

    p = sub.add_parser("converge", help="long run with CV convergence analysis")
    _common(p)
    _coin_flags(p)
    p.add_argument("--sites", type=_positive_int, default=128)
    p.add_argument("--noise", type=_angle, default=np.pi)
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--steps", type=_positive_int, default=50000)
    p.add_argument("--record-every", type=_positive_int, default=10)
    p.add_argument("--horizon", type=_positive_int, default=5000)
    p.add_argument("--threshold", type=float, default=0.01)
    p.add_argument("--saturation", choices=("first", "min_cv"), default="first")

    p = sub.add_parser("circuit", help="compile a walk circuit and emit OpenQASM 2")
    _common(p)
    _coin_flags(p)
    p.add_argument("--qubits", type=_positive_int, required=True, help="position qubits n (N = 2^n)")
    p.add_argument("--kind", choices=("walk", "step", "qft", "clock", "coin"), default="walk")
    p.add_argument("--steps", type=_positive_int, default=1)
    p.add_argument("--noise", type=_angle, default=None, help="static phase noise level for walk circuits")
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--power", type=_positive_int, default=1)
    p.add_argument("--adjoint", action="store_true")
    p.add_argument("--verify", action="store_true", help="compare the simulated unitary with the dense operator")

    p = sub.add_parser("reproduce", help="write the data behind figures 1-10")
    _common(p)
    p.add_argument("--figure", type=_figures, required=True, help="figure number(s), comma list, or 'all'")
    p.add_argument("--realizations", type=_positive_int, default=None)
    return parser


# --- config files -----------------------------------------------------------------


def read_config(path) -> dict:
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _subparser(parser, name):
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return action.choices[name]


def _prescan(argv):
    """Subcommand name and ``--config`` path, found before full parsing."""
    command = next((a for a in argv if a in COMMANDS), None)
    config = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif a.startswith("--config="):
            config = a.split("=", 1)[1]
    return command, config


def _apply_config(parser, argv):
    """Parse ``argv`` with defaults taken from ``--config`` (flags win)."""
    command, config = _prescan(argv)
    if command is None or config is None:
        return parser.parse_args(argv)
    sub = _subparser(parser, command)
    try:
        values = read_config(config)
    except ValueError as exc:
        sub.error(str(exc))
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            sub.error(f"config key {key!r} is not a flag of '{command}'")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                sub.error(f"config key {key!r} expects true/false, got {value!r}")
            defaults[key] = value.lower() in ("true", "1", "yes")
            continue
        if action.choices is not None and value not in action.choices:
            sub.error(f"config key {key!r}: invalid choice {value!r}")
        try:
            defaults[key] = action.type(value) if action.type is not None else value
        except (argparse.ArgumentTypeError, ValueError) as exc:
            sub.error(f"config key {key!r}: {exc}")
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


# --- commands ---------------------------------------------------------------------


def _coin(args) -> CoinParams:
    custom = [args.gamma, args.theta, args.phi, args.half_sum]
    if args.coin is not None and any(v is not None for v in custom):
        raise CliError("give either --coin or explicit angles, not both")
    if all(v is None for v in custom):
        return preset(args.coin or "hadamard")
    if args.gamma is None:
        raise CliError("explicit coins need --gamma")
    if args.half_sum is not None:
        if args.theta is not None or args.phi is not None:
            raise CliError("--half-sum cannot be combined with --theta/--phi")
        return CoinParams.from_half_sum(args.gamma, args.half_sum)
    return CoinParams(args.gamma, args.theta or 0.0, args.phi or 0.0)


def _outdir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _coin_text(coin: CoinParams) -> str:
    return "gamma={:.6g} theta={:.6g} phi={:.6g}".format(*coin.as_tuple())


def cmd_spectrum(args):
    coin = _coin(args)
    if args.method == "analytic":
        if args.noise:
            raise CliError("the analytic spectrum has no noise; use --method numerical")
        report = analytic_spectrum(args.sites, coin)
    else:
        step = build_step(args.sites, coin)
        if args.noise:
            step = build_noisy_step(step, sample_noise(args.sites, args.noise, args.seed, args.realization))
        report = numerical_spectrum(step)
    out = _outdir(args)
    if args.format == "csv":
        path = write_csv(out / "spectrum.csv", ("k", "re", "im", "omega", "pr"), report.rows())
    else:
        path = write_json(out / "spectrum.json", report.to_dict())
    return (
        f"spectrum N={args.sites} {_coin_text(coin)} mean_pr={report.mean_pr:.4f} "
        f"degenerate={str(report.degenerate).lower()} -> {path}"
    )


def _walk_trace(args, coin, n_steps, record_every, store):
    step = build_step(args.sites, coin)
    if args.noise:
        step = build_noisy_step(step, sample_noise(args.sites, args.noise, args.seed, args.realization))
    return evolve(initial_state(args.sites, getattr(args, "s0", None)), step, n_steps, record_every,
                  msd_mode=getattr(args, "msd_mode", "site"), store_distributions=store)


def cmd_walk(args):
    coin = _coin(args)
    if args.s0 is not None and not 0 <= args.s0 < args.sites:
        raise CliError(f"--s0 must lie in [0, {args.sites - 1}]")
    trace = _walk_trace(args, coin, args.steps, args.record_every, False)
    fit = fit_power_law(trace, args.fit, args.fit_method)
    out = _outdir(args)
    if args.format == "csv":
        path = write_csv(out / "trace.csv", ("step", "x_mean", "msd"), trace.rows())
        write_json(out / "fit.json", fit.to_dict())
    else:
        rows = [list(r) for r in trace.rows()]
        path = write_json(out / "walk.json", {"trace": {"columns": ["step", "x_mean", "msd"], "rows": rows},
                                              "fit": fit.to_dict()})
    return (
        f"walk N={args.sites} {_coin_text(coin)} noise={args.noise:.6g} steps={args.steps} "
        f"window={fit.window[0]}:{fit.window[1]} alpha={fit.alpha:.4f} beta={fit.beta:.4f} "
        f"({classify_spread(fit.beta)}) -> {path}"
    )


def cmd_sweep_beta(args):
    coin = _coin(args)
    sweep = noise_beta_sweep(args.sites, coin, args.levels, args.realizations, args.seed, args.fit,
                             with_pr=args.with_pr)
    out = _outdir(args)
    record = SweepRecord("sweep-beta", _echo(args), [sweep.to_dict()])
    if args.format == "csv":
        path = write_csv(out / "beta.csv", ("phi_max", "realization", "alpha", "beta"), sweep.rows())
        write_json(out / "beta_summary.json", record.to_dict())
        if args.with_pr:
            write_csv(out / "pr.csv", PR_HEADER, (row for lv in sweep.levels for row in pr_rows(lv.pr)))
            write_csv(out / "pr_aggregate.csv", PR_AGGREGATE_HEADER, (pr_aggregate_row(lv.pr) for lv in sweep.levels))
    else:
        path = write_json(out / "sweep_beta.json", record.to_dict())
    medians = " ".join(f"{lv.phi_max:.4g}:{lv.median_beta:.3f}" for lv in sweep.levels)
    cross = sweep.crossover()
    cross_text = "none" if cross is None else f"{cross:.4f}"
    return f"sweep-beta N={args.sites} median_beta[{medians}] crossover={cross_text} -> {path}"


def cmd_sweep_saturation(args):
    coin = _coin(args)
    if not args.threshold > 0:
        raise CliError("--threshold must be positive")
    rows = saturation_sweep(args.sizes, coin, args.levels, args.realizations, args.seed, args.steps,
                            args.record_every, args.threshold, args.saturation, args.aggregate)
    out = _outdir(args)
    if args.format == "csv":
        path = write_csv(out / "saturation.csv", SaturationRow.HEADER, (r.as_tuple() for r in rows))
    else:
        results = [dict(zip(SaturationRow.HEADER, r.as_tuple())) for r in rows]
        path = write_json(out / "saturation.json", SweepRecord("sweep-saturation", _echo(args), results).to_dict())
    converged = sum(r.converged for r in rows)
    sats = [r.saturation_level for r in rows if r.saturation_level is not None]
    med = f"{np.median(sats):.4f}" if sats else "n/a"
    return f"sweep-saturation points={len(rows)} converged={converged} median_saturation={med} -> {path}"


def cmd_pr_map(args):
    pm = coin_pr_map(args.sites, args.resolution, args.slice, args.quantity, args.steps)
    out = _outdir(args)
    if args.format == "csv":
        path = write_csv(out / "prmap.csv", (pm.y_name, pm.x_name, "pr"), pm.rows())
    else:
        path = write_json(out / "prmap.json", {
            "n_sites": pm.n_sites, "slice": pm.slice, "quantity": pm.quantity,
            pm.x_name: pm.x, pm.y_name: pm.y, "pr": pm.values,
        })
    return (
        f"pr-map N={args.sites} slice={args.slice} quantity={args.quantity} "
        f"min_pr={pm.values.min():.4f} max_pr={pm.values.max():.4f} -> {path}"
    )


def cmd_converge(args):
    coin = _coin(args)
    if not args.threshold > 0:
        raise CliError("--threshold must be positive")
    trace = _walk_trace(args, coin, args.steps, args.record_every, False)
    est = CVConvergence(cv_window_size(args.sites), args.threshold, args.horizon, args.saturation)
    report = est.fit(trace.msd, trace.steps).report()
    out = _outdir(args)
    if args.format == "csv":
        path = write_csv(out / "trace.csv", ("step", "x_mean", "msd"), trace.rows())
        write_json(out / "convergence.json", report.to_dict())
    else:
        rows = [list(r) for r in trace.rows()]
        path = write_json(out / "converge.json", {"trace": {"columns": ["step", "x_mean", "msd"], "rows": rows},
                                                  "convergence": report.to_dict()})
    sat = "n/a" if report.saturation_level is None else f"{report.saturation_level:.4f}"
    return (
        f"converge N={args.sites} noise={args.noise:.6g} min_cv={report.min_cv:.4g} "
        f"converged={str(report.converged).lower()} step={report.convergence_step} saturation={sat} -> {path}"
    )


def cmd_circuit(args):
    from .circuits import (
        clock_circuit,
        coin_circuit,
        emit_qasm,
        equiv_up_to_global_phase,
        qft_circuit,
        step_circuit,
        unitary,
        walk_circuit,
    )
    from .circuits.verify import reference_clock, reference_qft, reference_step

    coin = _coin(args)
    n = args.qubits
    noise = None
    if args.noise is not None:
        if args.kind != "walk":
            raise CliError("--noise applies to walk circuits only")
        noise = sample_noise(2**n, args.noise, args.seed, args.realization) if 2**n >= 3 else None
        if noise is None:
            raise CliError("noisy walk circuits need at least 2 position qubits")
    if args.kind == "walk":
        circuit = walk_circuit(n, coin, args.steps, noise)
    elif args.kind == "step":
        circuit = step_circuit(n, coin)
    elif args.kind == "qft":
        circuit = qft_circuit(n)
    elif args.kind == "clock":
        circuit = clock_circuit(n, args.power, args.adjoint)
    else:
        circuit = coin_circuit(coin)
    out = _outdir(args)
    qasm = emit_qasm(circuit)
    report = circuit.report()
    summary = f"circuit kind={args.kind} qubits={circuit.n_qubits} gates={report['total_gates']} depth={report['depth']}"
    if args.verify:
        if circuit.n_qubits > 10:
            raise CliError("verification is limited to 10 qubits")
        if args.kind in ("walk", "step"):
            dense = reference_step(2**n, coin, None if noise is None else noise.phases)
            dense = np.linalg.matrix_power(dense, args.steps if args.kind == "walk" else 1)
        elif args.kind == "qft":
            dense = reference_qft(2**n)
        elif args.kind == "clock":
            dense = reference_clock(2**n, args.power, args.adjoint)
        else:
            from .coin import build_coin

            dense = build_coin(coin)
        ok, dev = equiv_up_to_global_phase(unitary(circuit), dense)
        report["verification"] = {"equivalent": ok, "max_deviation": dev}
        summary += f" max_deviation={dev:.3e} equivalent={str(ok).lower()}"
        if not ok:
            raise CliError(summary + " (circuit does not match the dense operator)")
    if args.format == "csv":
        path = out / "circuit.qasm"
        path.write_text(qasm)
        write_json(out / "circuit_report.json", report)
    else:
        path = write_json(out / "circuit.json", {"qasm": qasm, "report": report})
    return f"{summary} -> {path}"


def cmd_reproduce(args):
    out = _outdir(args)
    for fig in args.figure:
        path = reproduce_figure(fig, out, args.seed, args.realizations)
    return f"reproduce figures={','.join(map(str, args.figure))} -> {path}"


COMMANDS = {
    "spectrum": cmd_spectrum,
    "walk": cmd_walk,
    "sweep-beta": cmd_sweep_beta,
    "sweep-saturation": cmd_sweep_saturation,
    "pr-map": cmd_pr_map,
    "converge": cmd_converge,
    "circuit": cmd_circuit,
    "reproduce": cmd_reproduce,
}


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "config", "format")}


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, sys.argv[1:] if argv is None else argv)
    try:
        summary = COMMANDS[args.command](args)
    except (CliError, ValueError, RuntimeError, OSError, np.linalg.LinAlgError) as exc:
        print(f"cyclicwalk {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
