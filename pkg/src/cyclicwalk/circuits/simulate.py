"""Dense statevector simulation of :class:`CircuitIR`."""

from __future__ import annotations

import numpy as np

from .ir import CircuitIR, Gate

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def phase(angle: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * angle)])


def gate_matrix(gate: Gate) -> np.ndarray:
    """2x2 matrix of a one-qubit gate."""
    if gate.kind == "h":
        return _H
    if gate.kind == "x":
        return _X
    if gate.kind == "p":
        return phase(gate.angle)
    if gate.kind == "ry":
        return ry(gate.angle)
    if gate.kind == "rz":
        return rz(gate.angle)
    raise ValueError(f"{gate.kind} is not a one-qubit gate")


def _apply(state: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    """Apply ``gate`` to ``state`` of shape ``(2**n, k)``."""
    k = state.shape[1]
    if gate.kind in ("cp", "swap"):
        a, b = gate.qubits
        idx = np.arange(2**n_qubits)
        bit_a, bit_b = (idx >> a) & 1, (idx >> b) & 1
        if gate.kind == "cp":
            diag = np.where(bit_a & bit_b, np.exp(1j * gate.angle), 1.0)
            return state * diag[:, None]
        swapped = idx ^ ((bit_a ^ bit_b) << a) ^ ((bit_a ^ bit_b) << b)
        return state[swapped]
    (q,) = gate.qubits
    view = state.reshape(2 ** (n_qubits - q - 1), 2, 2**q, k)
    return np.einsum("ab,ibjk->iajk", gate_matrix(gate), view).reshape(state.shape)


def run(circuit: CircuitIR, state: np.ndarray) -> np.ndarray:
    """Evolve a statevector (or the columns of a matrix) through ``circuit``."""
    state = np.asarray(state, dtype=complex)
    vector = state.ndim == 1
    work = state.reshape(2**circuit.n_qubits, -1)
    for gate in circuit.gates:
        work = _apply(work, gate, circuit.n_qubits)
    work = work * np.exp(1j * circuit.global_phase)
    return work[:, 0] if vector else work


def unitary(circuit: CircuitIR) -> np.ndarray:
    return run(circuit, np.eye(2**circuit.n_qubits, dtype=complex))


def equiv_up_to_global_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-9) -> tuple[bool, float]:
    """Compare two matrices modulo a global phase.

    The phase is fixed by the largest-magnitude entry of ``u``. Returns
    ``(equivalent, max_entry_deviation)``.
    """
    u, v = np.asarray(u), np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    idx = np.unravel_index(np.argmax(np.abs(u)), u.shape)
    ratio = u[idx] / v[idx] if v[idx] != 0 else 1.0
    align = ratio / abs(ratio) if ratio != 0 else 1.0
    deviation = float(np.max(np.abs(u - align * v)))
    return deviation <= atol, deviation
