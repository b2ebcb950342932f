import math

import numpy as np
import pytest

import oracles
from cyclicwalk.coin import PRESETS, CoinParams
from cyclicwalk.graph import MAX_DENSE
from cyclicwalk.spectrum import (
    SpectrumError,
    StepOperator,
    analytic_spectrum,
    band_arcs,
    build_step,
    cluster_eigenphases,
    degenerate_pair_states,
    degeneracy_index,
    in_bands,
    mean_pr,
    numerical_spectrum,
    participation_ratio,
    participation_ratios,
)
from helpers import multiset_distance

PI = math.pi
GAMMAS = np.linspace(0, PI / 2, 5)
HALF_SUMS = [0.0, 0.3, PI / 4, 1.9, 2.7]


def test_one_step_by_hand():
    out = build_step(4, PRESETS["hadamard"]).apply(np.eye(8)[0])
    expected = np.zeros(8)
    expected[2] = expected[7] = 1 / math.sqrt(2)
    assert np.allclose(out, expected, atol=1e-15)


@pytest.mark.parametrize("name", ["hadamard", "symmetric"])
def test_unitary_n128(name):
    s = build_step(128, PRESETS[name]).dense()
    assert np.max(np.abs(s.conj().T @ s - np.eye(256))) <= 1e-12


def test_dense_matches_oracle(rng):
    for _ in range(10):
        g, t, p = rng.uniform(0, PI / 2), rng.uniform(0, 2 * PI), rng.uniform(0, 2 * PI)
        n = int(rng.integers(3, 12))
        assert np.allclose(build_step(n, CoinParams(g, t, p)).dense(), oracles.step_matrix(n, g, t, p), atol=1e-14)


def test_structured_matches_dense(rng):
    step = StepOperator(7, CoinParams(0.4, 1.0, 2.0), rng.uniform(-1, 1, 7))
    psi = rng.normal(size=(5, 14)) + 1j * rng.normal(size=(5, 14))
    assert np.max(np.abs(step.apply(psi) - psi @ step.dense().T)) <= 1e-12


def test_apply_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        build_step(5, PRESETS["hadamard"]).apply(np.zeros(8))
    with pytest.raises(ValueError):
        StepOperator(5, PRESETS["hadamard"], np.zeros(4))


@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_analytic_matches_numerical(n):
    for g in GAMMAS:
        for h in HALF_SUMS:
            coin = CoinParams.from_half_sum(g, h)
            ana = analytic_spectrum(n, coin)
            num = numerical_spectrum(build_step(n, coin))
            assert multiset_distance(ana.eigenvalues, num.eigenvalues) <= 1e-9


@pytest.mark.parametrize("n", [3, 5, 8, 13])
def test_analytic_eigenvectors(n):
    for g in GAMMAS:
        for h in HALF_SUMS:
            coin = CoinParams.from_half_sum(g, h)
            rep = analytic_spectrum(n, coin)
            s = build_step(n, coin).dense()
            resid = s @ rep.eigenvectors - rep.eigenvectors * rep.eigenvalues
            assert np.max(np.abs(resid)) <= 1e-9
            assert np.allclose(np.linalg.norm(rep.eigenvectors, axis=0), 1, atol=1e-12)


def test_theta_phi_enter_only_through_half_sum():
    a = analytic_spectrum(12, CoinParams(0.6, 0.4, 1.6)).eigenvalues
    b = numerical_spectrum(build_step(12, CoinParams(0.6, 1.9, 0.1))).eigenvalues
    assert multiset_distance(a, b) <= 1e-9


def test_gap_closes_at_gamma_zero():
    rep = analytic_spectrum(128, CoinParams(0, 0, 0))
    assert rep.gap == 0
    ph = np.sort(np.mod(rep.eigenphases, 2 * PI))
    assert np.max(np.diff(np.append(ph, ph[0] + 2 * PI))) <= 2 * PI / 128 + 1e-12


def test_two_arcs_at_hadamard():
    rep = analytic_spectrum(128, CoinParams(PI / 4, 0, 0))
    offsets = np.angle(rep.eigenvalues * np.where(np.real(rep.eigenvalues) < 0, -1, 1))
    assert np.all(np.abs(offsets) <= PI / 4 + 1e-12)
    assert np.max(offsets) == pytest.approx(PI / 4, abs=2e-3)
    assert np.min(offsets) == pytest.approx(-PI / 4, abs=2e-3)
    assert np.allclose(np.sort(rep.eigenvalues.imag), np.sort(rep.eigenvalues.conj().imag), atol=1e-12)


def test_arcs_rotate_with_half_sum():
    a = analytic_spectrum(128, CoinParams(PI / 4, 0, 0)).eigenvalues
    b = analytic_spectrum(128, CoinParams.from_half_sum(PI / 4, PI / 4)).eigenvalues
    assert multiset_distance(a * np.exp(1j * PI / 4), b) <= 1e-12


def test_band_containment_numerical(rng):
    for _ in range(20):
        coin = CoinParams(rng.uniform(0, PI / 2), rng.uniform(0, 2 * PI), rng.uniform(0, 2 * PI))
        rep = numerical_spectrum(build_step(int(rng.integers(3, 40)), coin))
        assert np.all(in_bands(rep.eigenphases, coin, 1e-9))
        assert np.allclose(np.abs(rep.eigenvalues), 1, atol=1e-10)


def test_band_report_fields():
    coin = CoinParams(0.3, 0.2, 0.6)
    rep = analytic_spectrum(9, coin)
    assert rep.band_center == pytest.approx(0.4)
    assert rep.band_half_width == pytest.approx(PI / 2 - 0.3)
    assert rep.gap == pytest.approx(0.6)
    assert band_arcs(coin)[1][0] == pytest.approx(0.4 + PI)


def test_degeneracy_law_even_n():
    n = 16
    for m in range(n):
        coin = CoinParams.from_half_sum(PI / 4, m * PI / n)
        degenerate, got = degeneracy_index(n, coin)
        assert degenerate and got == m
        sizes = numerical_spectrum(build_step(n, coin)).cluster_sizes
        assert max(sizes) == 2
        assert sizes.count(2) >= n - 2


def test_no_pairing_for_incommensurate_half_sums(rng):
    n = 16
    for _ in range(50):
        h = (rng.integers(0, n) + rng.uniform(0.05, 0.95)) * PI / n
        coin = CoinParams.from_half_sum(PI / 4, h)
        assert degeneracy_index(n, coin) == (False, None)
        assert max(numerical_spectrum(build_step(n, coin)).cluster_sizes) == 1


def test_odd_n_pairs_at_half_integer_m():
    n = 9
    assert degeneracy_index(n, CoinParams.from_half_sum(PI / 4, 2 * PI / n))[0] is False
    coin = CoinParams.from_half_sum(PI / 4, 2.5 * PI / n)
    assert degeneracy_index(n, coin) == (True, 2)
    assert max(numerical_spectrum(build_step(n, coin)).cluster_sizes) == 2


def test_full_collapse_at_gamma_half_pi():
    assert degeneracy_index(10, CoinParams(PI / 2, 0.3, 0.3)) == (True, None)


def test_cluster_eigenphases_wraps_around():
    assert sorted(cluster_eigenphases([0.0, 2 * PI - 1e-12, 1.0, 2.0])) == [1, 1, 2]
    assert cluster_eigenphases([]) == []


def test_nondegenerate_eigenstates_are_flat():
    rep = analytic_spectrum(128, CoinParams.from_half_sum(PI / 4, 5 * PI / 14))
    assert not rep.degenerate
    assert np.max(np.abs(rep.distributions - 1 / 128)) <= 1e-9
    assert rep.mean_pr == pytest.approx(128, abs=1e-6)


def test_degenerate_pair_distributions_are_single_harmonics():
    n = 128
    coin = CoinParams.from_half_sum(PI / 4, 64 * PI / n)
    pairs = degenerate_pair_states(n, coin)
    assert len(pairs) == n - 2
    peak = 0.0
    for k, k2, _, amps in pairs:
        p = (np.abs(amps.reshape(n, 2)) ** 2).sum(axis=1)
        assert p.sum() == pytest.approx(1, abs=1e-12)
        spec = np.fft.fft(p)
        keep = {0, (k - k2) % n, (k2 - k) % n}
        rest = [abs(spec[j]) for j in range(n) if j not in keep]
        assert max(rest) <= 1e-12
        assert p.max() <= 2 / n
        peak = max(peak, p.max())
    assert peak > 1.99 / n


def test_participation_ratio_examples():
    assert participation_ratio(np.eye(10)[3]) == pytest.approx(1)
    assert participation_ratio(np.full(10, 0.1)) == pytest.approx(10)
    assert participation_ratio([0.5, 0.5, 0, 0, 0]) == pytest.approx(2)
    with pytest.raises(ValueError):
        participation_ratio(np.zeros(4))


def test_participation_ratio_permutation_invariant(rng):
    p = rng.random(20)
    p /= p.sum()
    assert participation_ratio(p) == pytest.approx(participation_ratio(rng.permutation(p)))
    assert participation_ratio(p) == pytest.approx(oracles.pr(p))
    assert np.allclose(participation_ratios(np.stack([p, p[::-1]])), participation_ratio(p))


def test_eigenstate_mean_pr_against_oracle():
    # the oracle diagonalizes a loop-built step matrix: 27.702346878995932 and 32
    lo = numerical_spectrum(build_step(32, CoinParams(PI / 4, 5 * PI / 32, 5 * PI / 32)))
    hi = numerical_spectrum(build_step(32, CoinParams(PI / 4, 5.5 * PI / 32, 5.5 * PI / 32)))
    assert mean_pr(lo) == pytest.approx(27.702346878995932, abs=1e-6)
    assert mean_pr(hi) == pytest.approx(32.0, abs=1e-9)


def test_participation_ratios_in_range(rng):
    coin = CoinParams(0.7, 1.0, 2.0)
    for rep in (analytic_spectrum(17, coin), numerical_spectrum(build_step(17, coin))):
        assert np.all(rep.participation_ratios >= 1 - 1e-12)
        assert np.all(rep.participation_ratios <= 17 + 1e-9)


def test_serialization():
    rep = analytic_spectrum(6, PRESETS["hadamard"])
    d = rep.to_dict()
    assert len(d["eigenvalues"]) == 12 and len(d["eigenvalues"][0]) == 2
    assert d["bands"][0]["half_width"] == pytest.approx(PI / 4)
    rows = list(rep.rows())
    assert len(rows) == 12 and len(rows[0]) == 5


def test_dense_limit():
    with pytest.raises((SpectrumError, ValueError)):
        numerical_spectrum(build_step(MAX_DENSE + 1, PRESETS["hadamard"]))
