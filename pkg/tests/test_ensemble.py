import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spcoherence.diffraction import divergence_metrics, far_field, gaussian_aperture, l2_relative_error
from spcoherence.ensemble import (
    BeamSpec,
    cell_patterns,
    compare_models,
    default_angles,
    emitter_positions,
    fit_exponent,
    partition_beam,
    quantum_pattern,
    semiclassical_pattern,
)
from spcoherence.errors import ConvergenceError, DomainError

um = 1e-6
LAM = 0.6 * um
R = 100 * um


def ens(l_c, w=20 * um, **kw):
    return partition_beam(BeamSpec(w, l_c, **kw))


@pytest.mark.parametrize("l_c,n", [(0.2 * um, 100), (1 * um, 20), (4 * um, 5), (3 * um, 7)])
def test_partition_counts(l_c, n):
    e = ens(l_c)
    assert e.n_cells == n
    assert e.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(np.diff(e.centers), 20 * um / n)
    assert e.centers.mean() == pytest.approx(0.0, abs=1e-18)


def test_beam_spec_validation():
    with pytest.raises(DomainError):
        BeamSpec(1 * um, 2 * um)
    with pytest.raises(DomainError):
        BeamSpec(20 * um, 0.0)


def test_gaussian_weighting_option():
    e = ens(1 * um, weighting="gaussian")
    assert e.weights.sum() == pytest.approx(1.0)
    assert e.weights[e.n_cells // 2] > e.weights[0]


def test_single_cell_equals_far_field():
    a = default_angles()
    s = semiclassical_pattern(ens(4 * um, w=4 * um), a, LAM, R)
    ref = far_field(gaussian_aperture(4 * um, LAM), R, a, obliquity=True)
    assert np.max(np.abs(s.intensity - ref.intensity)) < 1e-12


def test_fwhm_ratio_four():
    a = default_angles()
    f1 = divergence_metrics(semiclassical_pattern(ens(1 * um), a, LAM, R)).fwhm
    f4 = divergence_metrics(semiclassical_pattern(ens(4 * um), a, LAM, R)).fwhm
    assert f1 / f4 == pytest.approx(4.0, rel=0.30)


@pytest.mark.parametrize("l_c", [1 * um, 4 * um])
def test_distance_invariance(l_c):
    a = default_angles(1201)
    s1 = semiclassical_pattern(ens(l_c), a, LAM, 100 * um)
    s2 = semiclassical_pattern(ens(l_c), a, LAM, 200 * um)
    assert np.max(np.abs(s1.intensity - s2.intensity)) < 1e-12
    # at finite r the angular width moves by no more than the parallax w_beam/r
    f1 = divergence_metrics(semiclassical_pattern(ens(l_c), a, LAM, 100 * um, geometry="arc")).fwhm
    f2 = divergence_metrics(semiclassical_pattern(ens(l_c), a, LAM, 200 * um, geometry="arc")).fwhm
    assert abs(f1 - f2) <= 20 * um / (100 * um)


def test_beam_width_does_not_set_divergence():
    a = default_angles(1201)
    for geometry in ("fraunhofer", "arc"):
        f_narrow = divergence_metrics(semiclassical_pattern(ens(2 * um, w=8 * um), a, LAM, R, geometry=geometry)).fwhm
        f_wide = divergence_metrics(semiclassical_pattern(ens(2 * um, w=20 * um), a, LAM, R, geometry=geometry)).fwhm
        assert abs(f_wide - f_narrow) < 20 * um / R


def test_fwhm_times_lc_constant():
    a = default_angles()
    prods = [divergence_metrics(semiclassical_pattern(ens(l * um), a, LAM, R)).fwhm * l * um for l in (1, 2, 4)]
    assert max(prods) / min(prods) - 1 < 0.15
    assert np.mean(prods) == pytest.approx(0.624 * LAM, rel=0.15)


def test_incoherent_additivity_and_order():
    a = default_angles(401)
    e = ens(1 * um)
    rows = cell_patterns(e, a, LAM, R)
    total = semiclassical_pattern(e, a, LAM, R)
    assert np.max(np.abs(rows.sum(0) / rows.sum(0).max() - total.intensity)) < 1e-12
    rng = np.random.default_rng(3)
    perm = rows[rng.permutation(len(rows))].sum(0)
    assert np.max(np.abs(perm - rows.sum(0))) / rows.sum(0).max() < 1e-12
    par = cell_patterns(e, a, LAM, R, workers=4)
    assert np.array_equal(par, rows)


def test_engine_error_carries_cell_index():
    with pytest.raises(ConvergenceError, match="cell 0") as exc:
        semiclassical_pattern(ens(1 * um), default_angles(101), LAM, R, engine="fdtd",
                              fdtd_options={"min_periods": 5, "max_periods": 3})
    assert exc.value.cell_index == 0


def test_option_validation():
    with pytest.raises(DomainError):
        semiclassical_pattern(ens(1 * um), None, LAM, -1.0)
    with pytest.raises(DomainError):
        semiclassical_pattern(ens(1 * um), None, LAM, R, engine="fdtd", geometry="arc", obliquity=False)


def test_one_point_emitter_flat():
    phi = np.radians(np.linspace(-30, 30, 301))
    s = quantum_pattern(ens(1 * um, w=1 * um), 1, phi, LAM, R, obliquity=False)
    assert np.ptp(s.intensity) < 1e-10


def test_quantum_fwhm_invariant():
    a = default_angles()
    fw = [divergence_metrics(quantum_pattern(ens(l * um), 1, a, LAM, R)).fwhm for l in (0.2, 1, 4)]
    assert max(fw) / min(fw) - 1 < 0.05


def test_doubling_emitters_unchanged():
    a = default_angles(801)
    for geometry in ("fraunhofer", "arc"):
        s1 = quantum_pattern(ens(1 * um), 1, a, LAM, R, geometry=geometry)
        s2 = quantum_pattern(ens(1 * um), 2, a, LAM, R, geometry=geometry)
        assert l2_relative_error(s2.intensity, s1.intensity) < 0.01


def test_random_sampling_seeded():
    e = ens(1 * um)
    p1, _ = emitter_positions(e, 3, "random", seed=7)
    p2, _ = emitter_positions(e, 3, "random", seed=7)
    p3, _ = emitter_positions(e, 3, "random", seed=8)
    assert np.array_equal(p1, p2) and not np.array_equal(p1, p3)
    s = quantum_pattern(e, 3, default_angles(201), LAM, R, sampling="random", seed=7)
    assert s.meta["seed"] == 7


def test_random_sampling_distribution():
    e = ens(4 * um, w=4 * um)
    p, _ = emitter_positions(e, 20000, "random", seed=0)
    # |psi|^2 of an amplitude FWHM l_c has standard deviation l_c / (4 sqrt(ln 2))
    assert np.std(p) == pytest.approx(4 * um / (4 * math.sqrt(math.log(2))), rel=0.02)


def test_compare_models_exponents():
    rep = compare_models([1 * um, 2 * um, 4 * um])
    assert rep.exponents["semiclassical"] == pytest.approx(-1.0, abs=0.15)
    assert abs(rep.exponents["quantum"]) < 0.05
    assert len(rep.rows) == 6


def test_compare_models_single_lc():
    with pytest.raises(ValueError, match="at least two"):
        compare_models([1 * um])


def test_compare_models_reports_undefined_fwhm():
    phi = np.radians(np.linspace(-30, 30, 201))
    rep = compare_models([1 * um, 2 * um], angles=phi, obliquity=False, models=("quantum",))
    assert all(math.isnan(r.fwhm) and r.error for r in rep.rows)
    assert all(np.isfinite(r.rms) for r in rep.rows)
    assert math.isnan(rep.exponents["quantum"])


@given(st.floats(min_value=0.5, max_value=20.0), st.floats(min_value=-1.5, max_value=0.5),
       st.floats(min_value=0.01, max_value=5.0))
def test_fit_exponent_recovers_power_law(base, s, amp):
    l = np.array([base, 2 * base, 4 * base]) * um
    assert fit_exponent(l, amp * l**s) == pytest.approx(s, abs=1e-9)


def test_fdtd_engine_matches_scalar_engine():
    a = default_angles(801)
    sf = semiclassical_pattern(ens(1 * um), a, LAM, R, engine="fdtd")
    ss = semiclassical_pattern(ens(1 * um), a, LAM, R)
    assert l2_relative_error(sf.intensity, ss.intensity) < 0.05
