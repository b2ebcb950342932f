"""Brute-force reference implementations used to derive expected test values.

Nothing here imports the package under test except plain parameter
containers; every quantity is rebuilt from its definition with explicit
loops or Kronecker products.
"""

from __future__ import annotations

import cmath
import math
import statistics

import numpy as np


def coin_matrix(gamma, theta, phi):
    return np.array(
        [
            [math.cos(gamma), cmath.exp(1j * theta) * math.sin(gamma)],
            [cmath.exp(1j * phi) * math.sin(gamma), -cmath.exp(1j * (theta + phi)) * math.cos(gamma)],
        ]
    )


def step_matrix(n, gamma, theta, phi, phases=None):
    """Column-by-column: coin on |s,c>, then c=0 moves to s+1 and c=1 to s-1."""
    c = coin_matrix(gamma, theta, phi)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for s in range(n):
        for cin in range(2):
            col = 2 * s + cin
            for cout in range(2):
                target = (s + 1) % n if cout == 0 else (s - 1) % n
                amp = c[cout, cin]
                if phases is not None:
                    amp *= cmath.exp(1j * phases[target])
                out[2 * target + cout, col] += amp
    return out


def fourier(n):
    return np.array([[cmath.exp(2j * math.pi * s * t / n) / math.sqrt(n) for t in range(n)] for s in range(n)])


def cyc(n, a, b):
    d = abs(a - b) % n
    return min(d, n - d)


def msd(probs, s0):
    n = len(probs)
    return sum(cyc(n, s, s0) ** 2 * p for s, p in enumerate(probs))


def pr(probs):
    return 1.0 / sum(p * p for p in probs)


def walk(n, gamma, theta, phi, steps, s0, coin=(1 / math.sqrt(2), 1 / math.sqrt(2)), phases=None):
    """Site distributions at every step, by repeated dense multiplication."""
    u = step_matrix(n, gamma, theta, phi, phases)
    psi = np.zeros(2 * n, dtype=complex)
    psi[2 * s0], psi[2 * s0 + 1] = coin
    out = []
    for _ in range(steps + 1):
        out.append([abs(psi[2 * s]) ** 2 + abs(psi[2 * s + 1]) ** 2 for s in range(n)])
        psi = u @ psi
    return np.array(out)


def eigen_mean_pr(n, gamma, theta, phi):
    _, vecs = np.linalg.eig(step_matrix(n, gamma, theta, phi))
    prs = []
    for k in range(2 * n):
        v = vecs[:, k] / np.linalg.norm(vecs[:, k])
        prs.append(pr([abs(v[2 * s]) ** 2 + abs(v[2 * s + 1]) ** 2 for s in range(n)]))
    return float(np.mean(prs))


def bias_cv(window):
    n = len(window)
    return (1 + 1 / (4 * n)) * statistics.stdev(window) / statistics.fmean(window)


# --- gate matrices by Kronecker products (little-endian qubit order) -------------

_I = np.eye(2)


def _embed(ops, n_qubits):
    """Tensor product with ``ops[q]`` on qubit q (identity elsewhere)."""
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(n_qubits)):
        out = np.kron(out, ops.get(q, _I))
    return out


def gate_unitary(kind, qubits, angle, n_qubits):
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    if kind == "h":
        return _embed({qubits[0]: np.array([[1, 1], [1, -1]]) / math.sqrt(2)}, n_qubits)
    if kind == "x":
        return _embed({qubits[0]: np.array([[0, 1], [1, 0]])}, n_qubits)
    if kind == "p":
        return _embed({qubits[0]: np.diag([1, cmath.exp(1j * angle)])}, n_qubits)
    if kind == "rz":
        return _embed({qubits[0]: np.diag([cmath.exp(-0.5j * angle), cmath.exp(0.5j * angle)])}, n_qubits)
    if kind == "ry":
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return _embed({qubits[0]: np.array([[c, -s], [s, c]])}, n_qubits)
    a, b = qubits
    if kind == "cp":
        return _embed({a: p0}, n_qubits) + _embed({a: p1, b: np.diag([1, cmath.exp(1j * angle)])}, n_qubits)
    if kind == "swap":
        x = np.array([[0, 1], [1, 0]])
        y = np.array([[0, -1j], [1j, 0]])
        z = np.diag([1, -1])
        return 0.5 * (_embed({}, n_qubits) + _embed({a: x, b: x}, n_qubits) + _embed({a: y, b: y}, n_qubits)
                      + _embed({a: z, b: z}, n_qubits))
    raise ValueError(kind)


def circuit_unitary(gates, n_qubits, global_phase=0.0):
    u = np.eye(2**n_qubits, dtype=complex)
    for kind, qubits, angle in gates:
        u = gate_unitary(kind, qubits, angle, n_qubits) @ u
    return cmath.exp(1j * global_phase) * u
