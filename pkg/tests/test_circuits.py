import math

import numpy as np
import pytest

import oracles
from cyclicwalk.circuits import (
    CircuitIR,
    Gate,
    QasmError,
    clock_circuit,
    coin_circuit,
    diagonal_gates,
    emit_qasm,
    equiv_up_to_global_phase,
    parse_qasm,
    qft_circuit,
    run,
    step_circuit,
    unitary,
    walk_circuit,
)
from cyclicwalk.circuits.compile import walsh_coefficients
from cyclicwalk.circuits.verify import reference_clock, reference_qft, reference_step
from cyclicwalk.coin import PRESETS, CoinParams, build_coin
from cyclicwalk.dynamics import evolve
from cyclicwalk.graph import clock, qft
from cyclicwalk.hilbert import localized_state
from cyclicwalk.noise import NoiseProfile, build_noisy_step, sample_noise
from cyclicwalk.spectrum import build_step

PI = math.pi


def random_coin(rng):
    return CoinParams(rng.uniform(0, PI / 2), rng.uniform(0, 2 * PI), rng.uniform(0, 2 * PI))


def as_tuples(circuit):
    return [(g.kind, g.qubits, g.angle) for g in circuit.gates]


def random_circuit(rng, n_position, has_coin=True, size=30):
    n_qubits = n_position + int(has_coin)
    gates = []
    for _ in range(size):
        kinds = ["h", "x", "p", "ry", "rz"] + (["cp", "swap"] if n_qubits > 1 else [])
        kind = kinds[rng.integers(len(kinds))]
        arity = 2 if kind in ("cp", "swap") else 1
        qubits = tuple(int(q) for q in rng.choice(n_qubits, arity, replace=False))
        angle = float(rng.normal() * 3) if kind in ("p", "cp", "ry", "rz") else None
        gates.append(Gate(kind, qubits, angle))
    return CircuitIR(n_position, has_coin, gates, float(rng.uniform(-PI, PI)))


# --- simulator vs Kronecker-product oracle ---------------------------------------


def test_simulator_matches_kron_oracle(rng):
    for n_position in (1, 2, 3):
        c = random_circuit(rng, n_position, size=40)
        ref = oracles.circuit_unitary(as_tuples(c), c.n_qubits, c.global_phase)
        assert np.allclose(unitary(c), ref, atol=1e-12)


def test_run_on_vector_matches_unitary(rng):
    c = random_circuit(rng, 3)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    assert np.allclose(run(c, psi), unitary(c) @ psi, atol=1e-12)


# --- coin ------------------------------------------------------------------------


def test_coin_examples():
    ok, dev = equiv_up_to_global_phase(build_coin(PRESETS["hadamard"]), unitary(coin_circuit(PRESETS["hadamard"])))
    assert ok and dev <= 1e-12
    assert equiv_up_to_global_phase(np.diag([1, -1]), unitary(coin_circuit(CoinParams(0, 0, 0))))[0]
    assert [g.kind for g in coin_circuit(PRESETS["hadamard"]).gates] == ["rz", "ry", "rz"]


def test_coin_random_sweep_exact_phase(rng):
    for _ in range(100):
        coin = random_coin(rng)
        assert np.max(np.abs(unitary(coin_circuit(coin)) - build_coin(coin))) <= 1e-10


# --- QFT and clock --------------------------------------------------------------------


def test_qft_small_cases():
    assert [g.kind for g in qft_circuit(1).gates] == ["h"]
    assert np.allclose(unitary(qft_circuit(1)), reference_qft(2), atol=1e-15)
    assert np.max(np.abs(unitary(qft_circuit(2)) - qft(4))) <= 1e-12


@pytest.mark.parametrize("n", range(1, 7))
def test_qft_matches_fourier_matrix(n):
    assert np.max(np.abs(unitary(qft_circuit(n)) - oracles.fourier(2**n))) <= 1e-10


def test_qft_gate_counts():
    assert qft_circuit(4).counts() == {"cp": 6, "h": 4, "swap": 2}
    for n in range(1, 9):
        counts = qft_circuit(n).counts()
        assert counts["h"] + counts.get("cp", 0) == n * (n + 1) // 2
        assert counts.get("swap", 0) == n // 2


def test_qft_range():
    for bad in (0, 11, 2.5, True):
        with pytest.raises(ValueError):
            qft_circuit(bad)


def test_clock_example():
    expected = np.diag(np.exp(-1j * PI / 2 * np.arange(4)))
    assert np.max(np.abs(unitary(clock_circuit(2)) - expected)) <= 1e-15
    assert np.allclose(unitary(clock_circuit(3)), clock(8), atol=1e-15)


@pytest.mark.parametrize("n", range(1, 6))
def test_clock_powers_additive(n):
    one = unitary(clock_circuit(n))
    for m in range(1, 5):
        scaled = clock_circuit(n, m)
        assert len(scaled.gates) == n
        assert equiv_up_to_global_phase(unitary(scaled), np.linalg.matrix_power(one, m), 1e-10)[0]
        assert equiv_up_to_global_phase(unitary(clock_circuit(n, m, True)), reference_clock(2**n, m, True), 1e-10)[0]
        product = unitary(clock_circuit(n, m, adjoint=True)) @ unitary(clock_circuit(n, m))
        assert equiv_up_to_global_phase(product, np.eye(2**n), 1e-12)[0]


def test_clock_validation():
    with pytest.raises(ValueError):
        clock_circuit(2, 0)


# --- step and walk ----------------------------------------------------------------


def test_step_examples():
    assert equiv_up_to_global_phase(build_step(4, PRESETS["hadamard"]).dense(), unitary(step_circuit(2, PRESETS["hadamard"])))[0]
    ok, dev = equiv_up_to_global_phase(build_step(8, PRESETS["symmetric"]).dense(), unitary(step_circuit(3, PRESETS["symmetric"])))
    assert ok and dev <= 1e-9


@pytest.mark.parametrize("n", range(1, 6))
def test_step_random_sweep(rng, n):
    for _ in range(10):
        coin = random_coin(rng)
        u = unitary(step_circuit(n, coin))
        assert np.max(np.abs(u - reference_step(2**n, coin))) <= 1e-9
        assert np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= 1e-10


def test_step_reference_agrees_with_loop_oracle(rng):
    coin = random_coin(rng)
    phases = rng.uniform(-1, 1, 8)
    assert np.allclose(reference_step(8, coin, phases), oracles.step_matrix(8, *coin.as_tuple(), phases), atol=1e-14)


def test_step_twice_is_two_steps():
    coin = PRESETS["symmetric"]
    u = unitary(step_circuit(3, coin))
    s = build_step(8, coin).dense()
    assert equiv_up_to_global_phase(u @ u, s @ s)[0]


def test_step_block_uses_single_controlled_layer():
    c = step_circuit(3, PRESETS["hadamard"])
    assert c.counts()["cp"] == 2 * 3 + 3
    assert c.report()["two_qubit_gates"] == 2 * (3 + 1) + 3


def test_walk_one_step_is_step_circuit():
    coin = PRESETS["hadamard"]
    assert walk_circuit(3, coin, 1) == step_circuit(3, coin)


def test_walk_zero_noise_matches_noiseless():
    coin = PRESETS["hadamard"]
    psi = localized_state(8, 4)
    noisy = run(walk_circuit(3, coin, 8, sample_noise(8, 0.0)), psi.amplitudes)
    dense = np.linalg.matrix_power(build_step(8, coin).dense(), 8) @ psi.amplitudes
    assert np.max(np.abs(noisy - dense)) <= 1e-10


@pytest.mark.parametrize("n", range(1, 6))
def test_noisy_walk_matches_dense_evolution(rng, n):
    size = 2**n
    coin = random_coin(rng)
    # built directly so the two-site register is covered too
    noise = NoiseProfile(size, PI, rng.uniform(-PI, PI, size), 0, 0)
    psi = np.zeros(2 * size, dtype=complex)
    psi[: 2] = [1 / math.sqrt(2), 1j / math.sqrt(2)]
    state = run(walk_circuit(n, coin, 8, noise), psi)
    dense = np.linalg.matrix_power(reference_step(size, coin, noise.phases), 8) @ psi
    assert np.max(np.abs(state - dense)) <= 1e-8
    assert abs(np.linalg.norm(state) - 1) <= 1e-10


def test_noisy_walk_matches_simulator_module():
    coin = PRESETS["symmetric"]
    noise = sample_noise(8, PI / 3, 11, 2)
    init = localized_state(8, 4)
    trace = evolve(init, build_noisy_step(build_step(8, coin), noise), 16)
    state = run(walk_circuit(3, coin, 16, noise), init.amplitudes)
    assert np.max(np.abs(state - trace.final_state.amplitudes)) <= 1e-8


def test_walk_validation():
    with pytest.raises(ValueError):
        walk_circuit(3, PRESETS["hadamard"], 0)
    with pytest.raises(ValueError):
        walk_circuit(3, PRESETS["hadamard"], 2, sample_noise(16, 1.0))
    with pytest.raises(ValueError):
        step_circuit(8, PRESETS["hadamard"])


def test_diagonal_synthesis(rng):
    for k in range(1, 5):
        phases = rng.uniform(-PI, PI, 2**k)
        gates, gphase = diagonal_gates(phases, list(range(k)))
        u = unitary(CircuitIR(k, False, gates, gphase))
        assert np.max(np.abs(u - np.diag(np.exp(1j * phases)))) <= 1e-12
    with pytest.raises(ValueError):
        diagonal_gates(np.zeros(3), [0, 1])


def test_walsh_coefficients_reconstruct(rng):
    f = rng.normal(size=8)
    c = walsh_coefficients(f)
    rebuilt = [sum(c[m] * (-1) ** bin(s & m).count("1") for m in range(8)) for s in range(8)]
    assert np.allclose(rebuilt, f)


# --- equivalence primitive -------------------------------------------------------------


def test_equivalence_examples():
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    ok, dev = equiv_up_to_global_phase(h, -1j * h)
    assert ok and dev == pytest.approx(0, abs=1e-16)
    assert not equiv_up_to_global_phase(h, np.array([[0, 1], [1, 0]]))[0]
    with pytest.raises(ValueError):
        equiv_up_to_global_phase(np.eye(2), np.eye(4))


# --- assembly text --------------------------------------------------------------------


def test_single_h_body():
    text = emit_qasm(CircuitIR(1, False, [Gate("h", (0,))]))
    body = [ln for ln in text.splitlines() if ln and not ln.startswith(("//", "OPENQASM", "include"))]
    assert body == ["qreg q[1];", "h q[0];"]


def test_phase_angle_literal():
    text = emit_qasm(qft_circuit(5))
    for j in range(1, 5):
        literal = "%.17g" % (PI / 2**j)
        assert f"cp({literal})" in text
        assert float(literal) == PI / 2**j


def test_round_trip_random(rng):
    for _ in range(100):
        c = random_circuit(rng, int(rng.integers(1, 5)), bool(rng.integers(2)))
        assert parse_qasm(emit_qasm(c)) == c


def test_round_trip_compiled():
    c = walk_circuit(3, PRESETS["symmetric"], 3, sample_noise(8, 1.0, 1))
    assert parse_qasm(emit_qasm(c)) == c


def test_parse_errors():
    with pytest.raises(QasmError):
        parse_qasm("h q[0];\n")
    with pytest.raises(QasmError):
        parse_qasm("qreg q[1];\nfoo q[0];\n")
    with pytest.raises(QasmError):
        parse_qasm("qreg q[1];\nh r[0];\n")
    with pytest.raises(QasmError):
        parse_qasm("qreg q[1];\nqreg q[2];\n")
    with pytest.raises(QasmError):
        parse_qasm("// cyclicwalk: position_qubits=3 coin=1\nqreg q[2];\n")


def test_plain_assembly_without_metadata():
    c = parse_qasm('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\nh q[1];\ncp(0.5) q[0],q[1];\n')
    assert c.n_position_qubits == 2 and not c.has_coin and len(c.gates) == 2


# --- IR ---------------------------------------------------------------------------------


def test_ir_validation_and_report():
    with pytest.raises(ValueError):
        Gate("cx", (0, 1))
    with pytest.raises(ValueError):
        Gate("cp", (1, 1), 0.3)
    with pytest.raises(ValueError):
        Gate("p", (0,))
    with pytest.raises(ValueError):
        Gate("h", (0,), 0.1)
    with pytest.raises(ValueError):
        CircuitIR(1, False, [Gate("h", (3,))])
    c = step_circuit(2, PRESETS["hadamard"])
    rep = c.report()
    assert rep["n_qubits"] == 3 and rep["total_gates"] == len(c.gates) and rep["depth"] <= len(c.gates)
    assert np.allclose(unitary(c.inverse()) @ unitary(c), np.eye(8), atol=1e-12)
    assert c.position_qubit(1) == 2
