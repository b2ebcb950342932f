"""Gate list representation of walk circuits.

Qubits are little-endian: basis index ``sum(bit_q << q)``. When a circuit has
a coin qubit it is qubit 0 and position bit ``b`` is qubit ``b + 1``, so the
basis index equals the walk layout ``2*s + c``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

ONE_QUBIT = {"h", "x", "p", "ry", "rz"}
TWO_QUBIT = {"cp", "swap"}
PARAMETRIC = {"p", "cp", "ry", "rz"}
KINDS = ONE_QUBIT | TWO_QUBIT


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        arity = 1 if self.kind in ONE_QUBIT else 2
        if len(qubits) != arity or len(set(qubits)) != arity:
            raise ValueError(f"{self.kind} acts on {arity} distinct qubit(s), got {qubits}")
        object.__setattr__(self, "qubits", qubits)
        if self.kind in PARAMETRIC:
            if self.angle is None or not np.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def inverse(self) -> Gate:
        if self.kind in PARAMETRIC:
            return Gate(self.kind, self.qubits, -self.angle)
        return self


@dataclass(frozen=True)
class CircuitIR:
    n_position_qubits: int
    has_coin: bool = True
    gates: tuple[Gate, ...] = field(default_factory=tuple)
    global_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        for gate in self.gates:
            if max(gate.qubits) >= self.n_qubits or min(gate.qubits) < 0:
                raise ValueError(f"gate {gate} outside a {self.n_qubits}-qubit register")

    @property
    def n_qubits(self) -> int:
        return self.n_position_qubits + int(self.has_coin)

    @property
    def coin_qubit(self) -> int | None:
        return 0 if self.has_coin else None

    def position_qubit(self, bit: int) -> int:
        if not 0 <= bit < self.n_position_qubits:
            raise ValueError(f"position bit {bit} out of range")
        return bit + int(self.has_coin)

    def then(self, gates, phase: float = 0.0) -> CircuitIR:
        """New circuit with ``gates`` appended and ``phase`` added."""
        return CircuitIR(self.n_position_qubits, self.has_coin, self.gates + tuple(gates), self.global_phase + phase)

    def inverse(self) -> CircuitIR:
        return CircuitIR(
            self.n_position_qubits, self.has_coin, tuple(g.inverse() for g in reversed(self.gates)), -self.global_phase
        )

    def counts(self) -> dict:
        return dict(sorted(Counter(g.kind for g in self.gates).items()))

    def depth(self) -> int:
        level = [0] * self.n_qubits
        for g in self.gates:
            d = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    def report(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "n_position_qubits": self.n_position_qubits,
            "coin_qubit": self.coin_qubit,
            "gate_counts": self.counts(),
            "two_qubit_gates": sum(1 for g in self.gates if g.kind in TWO_QUBIT),
            "total_gates": len(self.gates),
            "depth": self.depth(),
        }
