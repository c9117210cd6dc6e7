import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spcoherence.errors import DomainError, EmptySliceError, MetricUndefinedError, ResolutionError
from spcoherence.postselect import (
    ElectronState,
    PhotonGrid,
    build_amplitudes,
    coincidence_pattern,
    envelope_overlap,
    traced_pattern,
    visibility,
)

KAPPA = 3.0
DX = 1.0  # conjugate separation; fringe period in q is 2 pi
PERIOD = 2 * math.pi / DX


def two_path(dk, sigma, c=(1, 1), dx=DX):
    return ElectronState([-dk / 2, dk / 2], list(c), sigma, positions=[0.0, dx])


def brute_traced(state, q, kf):
    """Direct double loop over (q, k_f) with unnormalized Gaussian envelopes."""
    out = np.zeros(q.size)
    for a, qq in enumerate(q):
        acc = 0.0
        for f in kf:
            amp = 0j
            for k, c, x in zip(state.momenta, state.amplitudes, state.positions):
                u = f - (k + KAPPA - qq)
                amp += c * np.exp(-1j * qq * x) * math.exp(-0.5 * (u / state.sigma_k) ** 2)
            acc += abs(amp) ** 2
        out[a] = acc
    return out / out.sum()


def test_state_normalization():
    s = ElectronState([0.0, 1.0, 2.0], [3.0, 4j, 1 - 1j], 0.5)
    assert np.sum(np.abs(s.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        ElectronState([0.0], [0.0], 0.5)
    with pytest.raises(DomainError):
        ElectronState([0.0, 1.0], [1.0], 0.5)


def test_photon_grid_invariants():
    g = PhotonGrid.for_state(two_path(1.0, 1.0), KAPPA)
    assert np.allclose(g.q, -g.q[::-1])
    assert PERIOD / g.spacing >= 8 - 1e-12
    with pytest.raises(DomainError):
        PhotonGrid(np.array([0.0, 1.0, 2.0]), KAPPA)


@given(st.floats(min_value=0.1, max_value=4.0), st.floats(min_value=0.2, max_value=3.0),
       st.floats(min_value=0.0, max_value=2 * math.pi))
def test_joint_normalization(dk, sigma, alpha):
    s = two_path(dk, sigma, c=(1, np.exp(1j * alpha)))
    A = build_amplitudes(s, PhotonGrid.for_state(s, KAPPA, periods=2))
    assert np.sum(A.probability()) == pytest.approx(1.0, abs=1e-10)
    t = traced_pattern(A)
    assert t.sum() == pytest.approx(1.0, abs=1e-12)
    c = coincidence_pattern(A, A.kf[A.kf.size // 2])
    assert c.sum() == pytest.approx(1.0, abs=1e-12)


def test_trace_identity_order_independent():
    s = two_path(1.0, 0.7)
    A = build_amplitudes(s, PhotonGrid.for_state(s, KAPPA))
    p = A.probability()
    by_q = np.sum(np.sum(p, axis=1))
    by_kf = np.sum(np.sum(p, axis=0))
    assert abs(by_q - by_kf) < 1e-12
    assert abs(np.sum(p.ravel()[::-1]) - by_q) < 1e-12


def test_resolution_error():
    s = two_path(1.0, 0.4)
    with pytest.raises(ResolutionError):
        build_amplitudes(s, PhotonGrid.for_state(s, KAPPA), kf_spacing=0.2)


def test_single_component_delta_is_permutation():
    s = ElectronState([0.0], [1.0], 0.0)
    g = PhotonGrid(np.arange(-10, 11) * 0.5, KAPPA)
    A = build_amplitudes(s, g)
    nz = np.abs(A.amplitude) > 0
    assert np.all(nz.sum(axis=1) == 1)
    assert np.all(nz.sum(axis=0) <= 1)
    cols = np.argmax(nz, axis=1)
    assert np.allclose(A.kf[cols], KAPPA - g.q)


def test_delta_requires_on_grid():
    s = ElectronState([0.0, 0.1234], [1.0, 1.0], 0.0)
    with pytest.raises(DomainError):
        build_amplitudes(s, PhotonGrid(np.arange(-4, 5) * 0.5, KAPPA))


def test_two_disjoint_peaks():
    dk, sigma = 20.0, 0.5
    s = two_path(dk, sigma)
    A = build_amplitudes(s, PhotonGrid.for_state(s, KAPPA, periods=1))
    for row, q in zip(A.probability(), A.q):
        big = row > 1e-8 * row.max()
        runs = np.count_nonzero(np.diff(big.astype(int)) == 1) + int(big[0])
        assert runs == 2
        peaks = [A.kf[big & (A.kf < KAPPA - q)], A.kf[big & (A.kf > KAPPA - q)]]
        assert np.mean(peaks[0]) == pytest.approx(KAPPA - dk / 2 - q, abs=0.05)
        assert np.mean(peaks[1]) == pytest.approx(KAPPA + dk / 2 - q, abs=0.05)


def test_coincidence_full_visibility_overlapping():
    dk = 1.0
    s = two_path(dk, 0.5 * dk, dx=2 * math.pi / 1e-4)
    g = PhotonGrid.for_state(s, KAPPA, periods=2)
    A = build_amplitudes(s, g)
    v = visibility(coincidence_pattern(A, KAPPA), g.q, 1e-4)
    assert abs(v - 1) < 1e-6


def test_single_component_no_fringes():
    # sigma_k far above the q window, so the single envelope itself is flat there
    s = ElectronState([0.0], [1.0], 1e3, positions=[0.0])
    g = PhotonGrid(np.linspace(-1e-3, 1e-3, 41), KAPPA)
    A = build_amplitudes(s, g)
    assert visibility(coincidence_pattern(A, KAPPA), g.q, 1e-3) < 1e-10
    assert visibility(traced_pattern(A), g.q, 1e-3) < 1e-10


@pytest.mark.parametrize("alpha", [0.5, 1.7, 3.0])
def test_phase_shift_moves_fringes(alpha):
    s = two_path(1.0, 3.0, c=(1, np.exp(1j * alpha)))
    g = PhotonGrid.for_state(s, KAPPA, periods=4)
    p = traced_pattern(build_amplitudes(s, g))
    sel = slice(0, 8 * 8)  # eight whole periods
    q, y = g.q[sel], p[sel]
    phase = np.angle(np.sum(y * np.exp(1j * q * DX)))
    # P(q) ~ 1 + V cos(q dx - alpha): fringe maximum moves to q = alpha/dx
    assert (phase - alpha + math.pi) % (2 * math.pi) - math.pi == pytest.approx(0.0, abs=1e-9)


def test_traced_distinguishable_is_incoherent_sum():
    dk, sigma = 20.0, 1.0
    c = (0.6, 0.8j)
    s = two_path(dk, sigma, c=c)
    g = PhotonGrid.for_state(s, KAPPA)
    mixed = traced_pattern(build_amplitudes(s, g))
    singles = [traced_pattern(build_amplitudes(ElectronState([k], [1.0], sigma, positions=[x]), g))
               for k, x in ((-dk / 2, 0.0), (dk / 2, DX))]
    assert np.max(np.abs(mixed - (0.36 * singles[0] + 0.64 * singles[1]))) < 1e-12
    assert visibility(mixed, g.q, PERIOD) < 1e-10


@pytest.mark.parametrize("dk", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("sigma", [0.5, 1.0])
def test_traced_matches_brute_force(dk, sigma):
    s = two_path(dk, sigma)
    g = PhotonGrid.for_state(s, KAPPA, periods=1)
    A = build_amplitudes(s, g)
    t = traced_pattern(A)
    assert np.max(np.abs(t - brute_traced(s, g.q, A.kf))) < 1e-12
    assert visibility(t, g.q, PERIOD) == pytest.approx(envelope_overlap(dk, sigma), rel=0.05)


@given(st.floats(min_value=0.1, max_value=4.0), st.floats(min_value=0.3, max_value=3.0))
def test_distinguishability_bound(dk, sigma):
    s = two_path(dk, sigma)
    g = PhotonGrid.for_state(s, KAPPA, periods=2)
    A = build_amplitudes(s, g)
    vt = visibility(traced_pattern(A), g.q, PERIOD)
    assert vt <= envelope_overlap(dk, sigma) + 0.02


def test_traced_never_exceeds_best_coincidence():
    s = two_path(1.5, 0.8)
    g = PhotonGrid.for_state(s, KAPPA, periods=2)
    A = build_amplitudes(s, g)
    vt = visibility(traced_pattern(A), g.q, PERIOD)
    weight = A.probability().sum(axis=0)
    vc = [visibility(coincidence_pattern(A, kf), g.q, PERIOD) for kf, w in zip(A.kf, weight) if w > 1e-300]
    assert vt <= max(vc)


def test_empty_slice():
    s = ElectronState([0.0], [1.0], 0.0)
    g = PhotonGrid(np.arange(-2, 3) * 0.5, KAPPA)
    A = build_amplitudes(s, g)
    empty = int(np.argmin(np.abs(A.amplitude).sum(axis=0)))
    assert not A.amplitude[:, empty].any()
    with pytest.raises(EmptySliceError):
        coincidence_pattern(A, A.kf[empty])


def test_off_grid_kf_rejected():
    s = two_path(1.0, 1.0)
    A = build_amplitudes(s, PhotonGrid.for_state(s, KAPPA, periods=1))
    with pytest.raises(DomainError):
        coincidence_pattern(A, A.kf[3] + 0.37 * (A.kf[1] - A.kf[0]))


def test_visibility_examples():
    q = np.linspace(-3 * math.pi, 3 * math.pi, 97)
    assert visibility(np.full(10, 0.2)) == 0.0
    assert visibility(np.cos(q / 2) ** 2, q, 2 * math.pi) == pytest.approx(1.0, abs=1e-10)
    assert visibility(0.5 + 0.3 * np.cos(q), q, 2 * math.pi) == pytest.approx(0.6, abs=1e-10)
    with pytest.raises(MetricUndefinedError):
        visibility(np.zeros(5))
    with pytest.raises(DomainError):
        visibility([])
