"""Gate-level walk circuits with a statevector simulator and QASM I/O."""

from .compile import clock_circuit, coin_circuit, diagonal_gates, qft_circuit, step_circuit, walk_circuit
from .ir import CircuitIR, Gate
from .qasm import QasmError, emit_qasm, parse_qasm
from .simulate import equiv_up_to_global_phase, run, unitary

__all__ = [
    "CircuitIR",
    "Gate",
    "QasmError",
    "clock_circuit",
    "coin_circuit",
    "diagonal_gates",
    "emit_qasm",
    "equiv_up_to_global_phase",
    "parse_qasm",
    "qft_circuit",
    "run",
    "step_circuit",
    "unitary",
    "walk_circuit",
]
