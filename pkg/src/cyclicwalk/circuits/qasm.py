"""OpenQASM 2 emission and parsing for :class:`CircuitIR`."""

from __future__ import annotations

import re

from .ir import PARAMETRIC, CircuitIR, Gate

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";'
_META = re.compile(r"//\s*cyclicwalk:\s*position_qubits=(\d+)\s+coin=([01])")
_PHASE = re.compile(r"//\s*global_phase\s+(\S+)")
_GATE = re.compile(r"^([a-z]+)(?:\(([^)]*)\))?\s+(.+);$")
_QREG = re.compile(r"^qreg\s+q\[(\d+)\];$")
_QUBIT = re.compile(r"^q\[(\d+)\]$")


class QasmError(ValueError):
    pass


def _angle(value: float) -> str:
    return "%.17g" % value


def emit_qasm(circuit: CircuitIR) -> str:
    lines = [
        HEADER,
        f"// cyclicwalk: position_qubits={circuit.n_position_qubits} coin={int(circuit.has_coin)}",
        f"// global_phase {_angle(circuit.global_phase)}",
        f"qreg q[{circuit.n_qubits}];",
    ]
    for g in circuit.gates:
        args = ",".join(f"q[{q}]" for q in g.qubits)
        head = f"{g.kind}({_angle(g.angle)})" if g.kind in PARAMETRIC else g.kind
        lines.append(f"{head} {args};")
    return "\n".join(lines) + "\n"


def parse_qasm(text: str) -> CircuitIR:
    """Inverse of :func:`emit_qasm`.

    Files without the metadata comment are read as a register of position
    qubits only.
    """
    n_qubits = None
    meta = None
    phase = 0.0
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("//"):
            if m := _META.match(line):
                meta = (int(m.group(1)), m.group(2) == "1")
            elif m := _PHASE.match(line):
                phase = float(m.group(1))
            continue
        if line.startswith("OPENQASM") or line.startswith("include"):
            continue
        if m := _QREG.match(line):
            if n_qubits is not None:
                raise QasmError(f"line {lineno}: only one register is supported")
            n_qubits = int(m.group(1))
            continue
        m = _GATE.match(line)
        if m is None:
            raise QasmError(f"line {lineno}: cannot parse {line!r}")
        kind, angle, args = m.groups()
        qubits = []
        for arg in args.split(","):
            qm = _QUBIT.match(arg.strip())
            if qm is None:
                raise QasmError(f"line {lineno}: bad operand {arg.strip()!r}")
            qubits.append(int(qm.group(1)))
        try:
            gates.append(Gate(kind, tuple(qubits), None if angle is None else float(angle)))
        except ValueError as exc:
            raise QasmError(f"line {lineno}: {exc}") from exc
    if n_qubits is None:
        raise QasmError("missing qreg declaration")
    n_position, has_coin = meta if meta is not None else (n_qubits, False)
    if n_position + int(has_coin) != n_qubits:
        raise QasmError("metadata disagrees with register size")
    try:
        return CircuitIR(n_position, has_coin, gates, phase)
    except ValueError as exc:
        raise QasmError(str(exc)) from exc
