"""Gate-level constructions of the coin, QFT, clock, step and walk."""

from __future__ import annotations

import numpy as np

from ..coin import CoinParams
from ..noise import NoiseProfile
from .ir import CircuitIR, Gate

MAX_QFT_QUBITS = 10
MAX_STEP_QUBITS = 7


def _check_qubits(n: int, upper: int) -> int:
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= upper:
        raise ValueError(f"number of position qubits must be an integer in [1, {upper}], got {n!r}")
    return int(n)


def _coin_gates(params: CoinParams, qubit: int) -> tuple[list[Gate], float]:
    gates = [
        Gate("rz", (qubit,), params.theta + np.pi),
        Gate("ry", (qubit,), 2 * params.gamma),
        Gate("rz", (qubit,), params.phi),
    ]
    return gates, (params.theta + params.phi + np.pi) / 2


def coin_circuit(params: CoinParams) -> CircuitIR:
    """``Rz(phi) Ry(2 gamma) Rz(theta + pi)`` on a single qubit.

    With ``R(a) = exp(-i a sigma / 2)`` this equals the coin times
    ``exp(-i (theta + phi + pi) / 2)``; the circuit carries the compensating
    global phase so its unitary is the coin itself.
    """
    gates, phase = _coin_gates(params, 0)
    return CircuitIR(0, True, gates, phase)


def _qft_gates(qubits: list[int]) -> list[Gate]:
    n = len(qubits)
    gates = []
    for j in reversed(range(n)):
        gates.append(Gate("h", (qubits[j],)))
        for k in reversed(range(j)):
            gates.append(Gate("cp", (qubits[k], qubits[j]), np.pi / 2 ** (j - k)))
    for i in range(n // 2):
        gates.append(Gate("swap", (qubits[i], qubits[n - 1 - i])))
    return gates


def _inverse(gates: list[Gate]) -> list[Gate]:
    return [g.inverse() for g in reversed(gates)]


def _position_qubits(n: int, has_coin: bool) -> list[int]:
    return [b + int(has_coin) for b in range(n)]


def qft_circuit(n: int) -> CircuitIR:
    """Fourier transform ``exp(2 pi i s t / 2^n) / sqrt(2^n)`` on n qubits."""
    n = _check_qubits(n, MAX_QFT_QUBITS)
    return CircuitIR(n, False, _qft_gates(list(range(n))))


def _clock_gates(qubits: list[int], power: int, sign: float) -> list[Gate]:
    n = len(qubits)
    return [Gate("p", (q,), sign * 2 * np.pi * 2**b * power / 2**n) for b, q in enumerate(qubits)]


def clock_circuit(n: int, power: int = 1, adjoint: bool = False) -> CircuitIR:
    """``clock(2^n)^power`` (or its adjoint) with one phase gate per qubit."""
    n = _check_qubits(n, MAX_QFT_QUBITS)
    if isinstance(power, bool) or int(power) != power or power < 1:
        raise ValueError(f"power must be a positive integer, got {power!r}")
    return CircuitIR(n, False, _clock_gates(list(range(n)), int(power), 1.0 if adjoint else -1.0))


def _shift_block(n: int) -> list[Gate]:
    """Clock on coin |0>, its adjoint on coin |1>.

    Unconditional clock, then coin-controlled phases of twice the angle with
    the opposite sign turn it into the adjoint on the coin-|1> branch.
    """
    qubits = _position_qubits(n, True)
    gates = _clock_gates(qubits, 1, -1.0)
    for b, q in enumerate(qubits):
        gates.append(Gate("cp", (0, q), 2 * 2 * np.pi * 2**b / 2**n))
    return gates


def step_circuit(n: int, coin: CoinParams) -> CircuitIR:
    """One walk step on ``2^n`` sites: coin, inverse QFT, shift block, QFT."""
    n = _check_qubits(n, MAX_STEP_QUBITS)
    qft = _qft_gates(_position_qubits(n, True))
    coin_gates, phase = _coin_gates(coin, 0)
    return CircuitIR(n, True, coin_gates + _inverse(qft) + _shift_block(n) + qft, phase)


def walsh_coefficients(phases: np.ndarray) -> np.ndarray:
    """Coefficients ``c_S`` with ``f(s) = sum_S c_S (-1)^{popcount(s & S)}``."""
    coeffs = np.asarray(phases, dtype=float).copy()
    size = coeffs.size
    h = 1
    while h < size:
        view = coeffs.reshape(-1, 2, h)
        view[:, 0], view[:, 1] = view[:, 0] + view[:, 1], view[:, 0] - view[:, 1]
        h *= 2
    return coeffs / size


def _cx(control: int, target: int) -> list[Gate]:
    return [Gate("h", (target,)), Gate("cp", (control, target), np.pi), Gate("h", (target,))]


def diagonal_gates(phases, qubits: list[int], atol: float = 1e-15) -> tuple[list[Gate], float]:
    """Synthesize ``diag(exp(i phases))`` over ``qubits`` with a parity network.

    Each Walsh term ``S`` computes the parity of its bits onto the highest one
    with CNOTs (built from H and CP(pi)), applies a phase gate, and uncomputes.
    Returns the gates and the global phase they leave out.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.size != 2 ** len(qubits):
        raise ValueError(f"{phases.size} phases for {len(qubits)} qubits")
    coeffs = walsh_coefficients(phases)
    gates = []
    for mask in range(1, phases.size):
        angle = -2 * coeffs[mask]
        if abs(angle) <= atol:
            continue
        bits = [b for b in range(len(qubits)) if mask >> b & 1]
        target = qubits[bits[-1]]
        ladder = [g for b in bits[:-1] for g in _cx(qubits[b], target)]
        gates += ladder + [Gate("p", (target,), angle)] + _inverse(ladder)
    return gates, float(coeffs.sum())


def walk_circuit(n: int, coin: CoinParams, steps: int, noise: NoiseProfile | None = None) -> CircuitIR:
    """``steps`` walk steps, optionally with static site phases after each.

    The position register stays in the Fourier frame between steps, so the
    QFT pairs of consecutive steps cancel. Noise is applied as
    ``QFT, D, inverse QFT`` inside that frame.
    """
    n = _check_qubits(n, MAX_STEP_QUBITS)
    if isinstance(steps, bool) or int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps!r}")
    qubits = _position_qubits(n, True)
    noise_gates, noise_phase = [], 0.0
    if noise is not None:
        if noise.n_sites != 2**n:
            raise ValueError(f"noise profile has N={noise.n_sites}, circuit has 2^{n}={2**n} sites")
        noise_gates, noise_phase = diagonal_gates(noise.phases, qubits)
    qft = _qft_gates(qubits)
    iqft = _inverse(qft)
    coin_gates, coin_phase = _coin_gates(coin, 0)
    block = _shift_block(n)

    gates = coin_gates + iqft + block
    for _ in range(int(steps) - 1):
        if noise is not None:
            gates += qft + noise_gates + iqft
        gates += coin_gates + block
    gates += qft
    if noise is not None:
        gates += noise_gates
    phase = int(steps) * (coin_phase + noise_phase)
    return CircuitIR(n, True, gates, phase)
