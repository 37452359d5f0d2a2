import math

import numpy as np
import pytest

import mwselect as mw
from mwselect.breit_rabi import Level
from mwselect.phase_space import _atom_draws

DELTA_T = 28e-3


@pytest.fixture(scope="module")
def bands(cfg, pulse_first, pulse_second):
    b1 = mw.band_from_first_pulse(pulse_first, cfg, DELTA_T)
    b2 = mw.band_from_second_pulse(pulse_second, cfg)
    return b1, b2


@pytest.fixture(scope="module")
def cell(bands):
    return mw.selection_cell(*bands)


def _ensemble(**overrides):
    base = dict(
        n=200,
        z_mean=0.0,
        z_rms=1e-4,
        v_mean=0.7192,
        v_rms=3e-3,
        dz0=3e-6,
        seed=20260815,
    )
    base.update(overrides)
    return mw.EnsembleSpec(**base)


def test_band_membership_and_nan(bands):
    b1, _ = bands
    center_v = b1.center / b1.a_v  # v on the band axis at z = 0
    assert bool(b1.contains(0.0, center_v))
    assert not bool(b1.contains(0.0, center_v + 1.0))
    assert not bool(b1.contains(np.nan, np.nan))


def test_first_band_geometry(cfg, rb87, bands, pulse_first):
    b1, b2 = bands
    g = mw.g_effective(rb87, cfg.eta, Level.UPPER, 1)
    assert b1.a_z == 1.0
    assert b1.a_v == -DELTA_T
    assert b1.center == pytest.approx(0.5 * g * DELTA_T**2, rel=1e-12)
    assert b1.half_width == pytest.approx(
        0.5 * mw.position_width(pulse_first, cfg, 0.0), rel=1e-12
    )
    assert b2.a_v == 0.0
    assert b2.center == pytest.approx(1e-2, abs=1e-9)


def test_cell_center_and_widths(cfg, bands, cell):
    b1, b2 = bands
    assert cell.z_center == pytest.approx(b2.center, rel=1e-12)
    assert cell.v_center == pytest.approx((b2.center - b1.center) / DELTA_T, rel=1e-12)
    assert cell.v_center == pytest.approx(-4.8986e-3, rel=1e-3)
    want_support = 2.0 * (b1.half_width + b2.half_width) / DELTA_T
    assert cell.velocity_support == pytest.approx(want_support, rel=1e-12)
    want_area = 4.0 * b1.half_width * b2.half_width / DELTA_T
    assert cell.area == pytest.approx(want_area, rel=1e-12)


def test_cell_membership_matches_band_intersection(bands, cell):
    b1, b2 = bands
    rng = np.random.default_rng(7)
    z = cell.z_center + 4e-5 * rng.standard_normal(500)
    v = cell.v_center + 2e-3 * rng.standard_normal(500)
    np.testing.assert_array_equal(
        cell.contains(z, v), b1.contains(z, v) & b2.contains(z, v)
    )


def test_polygon_is_counterclockwise_and_on_boundaries(bands, cell):
    poly = mw.cell_polygon(cell)
    assert poly.shape == (4, 2)
    area2 = 0.0
    for i in range(4):
        z0, v0 = poly[i]
        z1, v1 = poly[(i + 1) % 4]
        area2 += z0 * v1 - z1 * v0
    assert area2 > 0.0
    assert 0.5 * area2 == pytest.approx(cell.area, rel=1e-9)
    b1, b2 = bands
    for z, v in poly:
        r1 = abs(b1.a_z * z + b1.a_v * v - b1.center)
        r2 = abs(b2.a_z * z + b2.a_v * v - b2.center)
        assert r1 == pytest.approx(b1.half_width, rel=1e-9)
        assert r2 == pytest.approx(b2.half_width, rel=1e-9)


def test_marginal_is_normalized_triangle(cell):
    v, density = mw.marginal_velocity(cell, resolution=4097)
    assert v[0] == pytest.approx(cell.v_center - 0.5 * cell.velocity_support)
    assert v[-1] == pytest.approx(cell.v_center + 0.5 * cell.velocity_support)
    assert density[0] == pytest.approx(0.0, abs=1e-9)
    assert density[-1] == pytest.approx(0.0, abs=1e-9)
    assert np.trapezoid(density, v) == pytest.approx(1.0, rel=1e-5)
    peak_at = v[np.argmax(density)]
    assert peak_at == pytest.approx(cell.v_center, abs=cell.velocity_support / 100)
    # nearly equal band widths: peak height is essentially 2/support
    assert density.max() == pytest.approx(2.0 / cell.velocity_support, rel=5e-3)


def test_marginal_support_matches_width_sum(cell, cfg, pulse_first, pulse_second):
    w1 = mw.position_width(pulse_first, cfg, 0.0)
    w2 = mw.position_width(pulse_second, cfg, 1e-2)
    v, density = mw.marginal_velocity(cell, resolution=2049)
    measured = v[density > 0.0]
    support = measured.max() - measured.min()
    assert support == pytest.approx((w1 + w2) / DELTA_T, rel=0.01)


def test_parallel_bands(cell):
    apart = mw.PhaseSpaceBand(1.0, 0.0, 0.0, 1e-5)
    far = mw.PhaseSpaceBand(1.0, 0.0, 1.0, 1e-5)
    with pytest.raises(mw.EmptyIntersectionError):
        mw.selection_cell(apart, far)
    overlapping = mw.PhaseSpaceBand(2.0, 0.0, 1e-5, 1e-5)
    with pytest.raises(ValueError, match="no finite cell"):
        mw.selection_cell(apart, overlapping)


def test_band_validation():
    with pytest.raises(ValueError):
        mw.PhaseSpaceBand(1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        mw.PhaseSpaceBand(0.0, 0.0, 0.0, 1.0)


def test_dilated_cell_scales_widths(cell):
    bigger = cell.dilated(2.0)
    assert bigger.band_first.half_width == 2.0 * cell.band_first.half_width
    assert bigger.velocity_support == pytest.approx(
        2.0 * cell.velocity_support, rel=1e-12
    )
    assert bigger.v_center == pytest.approx(cell.v_center, rel=1e-12)
    with pytest.raises(ValueError):
        cell.dilated(0.0)


def test_ensemble_spec_validation():
    with pytest.raises(ValueError):
        _ensemble(n=0)
    with pytest.raises(ValueError):
        _ensemble(dz0=0.0)
    with pytest.raises(ValueError):
        _ensemble(seed=-1)
    with pytest.raises(ValueError):
        _ensemble(probability_mode="exact")
    with pytest.raises(ValueError):
        _ensemble(decision_mode="maybe")
    with pytest.raises(ValueError):
        _ensemble(survival_efficiency=0.0)
    with pytest.raises(ValueError):
        _ensemble(sigma=3)


def test_atom_draws_are_keyed_by_index():
    spec = _ensemble()
    first = _atom_draws(spec.seed, 0, spec)
    again = _atom_draws(spec.seed, 0, spec)
    other = _atom_draws(spec.seed, 1, spec)
    assert first == again
    assert first != other
    for u in first[2:]:
        assert 0.0 <= u < 1.0


def test_monte_carlo_worker_partition_invariance(cfg, pulse_first, pulse_second):
    spec = _ensemble(n=300)
    runs = [
        mw.run_monte_carlo(spec, pulse_first, pulse_second, cfg, DELTA_T, workers=w)
        for w in (1, 2, 8)
    ]
    for other in runs[1:]:
        np.testing.assert_array_equal(runs[0].z0, other.z0)
        np.testing.assert_array_equal(runs[0].survived_both, other.survived_both)
        np.testing.assert_array_equal(runs[0].z_final, other.z_final)
        np.testing.assert_array_equal(runs[0].v_final, other.v_final)


def test_monte_carlo_band_mode_survivors_fill_cell(cfg, pulse_first, pulse_second):
    spec = _ensemble(n=20000, decision_mode="band")
    result = mw.run_monte_carlo(spec, pulse_first, pulse_second, cfg, DELTA_T)
    assert result.n_survived_both > 50
    inside = result.cell.contains(result.z_final, result.v_final)
    assert int(np.count_nonzero(inside)) == result.n_survived_both
    # non-survivors carry NaN finals
    lost = ~result.survived_both
    assert np.all(np.isnan(result.z_final[lost]))
    assert np.all(np.isnan(result.v_final[lost]))


def test_monte_carlo_final_state_kinematics(cfg, rb87, pulse_first, pulse_second):
    spec = _ensemble(n=2000, decision_mode="band")
    result = mw.run_monte_carlo(spec, pulse_first, pulse_second, cfg, DELTA_T)
    g = mw.g_effective(rb87, cfg.eta, Level.UPPER, 1)
    kept = result.survived_both
    z_expected = (
        result.z0[kept] + result.v0[kept] * DELTA_T - 0.5 * g * DELTA_T**2
    )
    np.testing.assert_allclose(result.z_final[kept], z_expected, rtol=1e-12)
    np.testing.assert_allclose(
        result.v_final[kept], result.v0[kept] - g * DELTA_T, rtol=1e-12
    )


def test_monte_carlo_survival_efficiency(cfg, pulse_first, pulse_second):
    full = mw.run_monte_carlo(
        _ensemble(n=4000, decision_mode="band"),
        pulse_first, pulse_second, cfg, DELTA_T,
    )
    lossy = mw.run_monte_carlo(
        _ensemble(n=4000, decision_mode="band", survival_efficiency=0.5),
        pulse_first, pulse_second, cfg, DELTA_T,
    )
    ratio = lossy.n_survived_first / full.n_survived_first
    assert 0.35 < ratio < 0.65
    # physics acceptance is unchanged; losses are a subset of the full run
    assert np.all(full.survived_first[lossy.survived_first])


def test_monte_carlo_decision_modes_differ(cfg, pulse_first, pulse_second):
    bern = mw.run_monte_carlo(
        _ensemble(n=3000), pulse_first, pulse_second, cfg, DELTA_T
    )
    band = mw.run_monte_carlo(
        _ensemble(n=3000, decision_mode="band"),
        pulse_first, pulse_second, cfg, DELTA_T,
    )
    point = mw.run_monte_carlo(
        _ensemble(n=3000, probability_mode="point"),
        pulse_first, pulse_second, cfg, DELTA_T,
    )
    counts = {
        bern.n_survived_first,
        band.n_survived_first,
        point.n_survived_first,
    }
    assert all(c > 0 for c in counts)
    # same cloud in every mode
    np.testing.assert_array_equal(bern.z0, band.z0)
    np.testing.assert_array_equal(bern.v0, point.v0)


def test_monte_carlo_validates_timing_and_sigma(cfg, branch, pulse_first, pulse_second):
    spec = _ensemble(n=10)
    with pytest.raises(ValueError, match="delta_t"):
        mw.run_monte_carlo(spec, pulse_first, pulse_second, cfg, DELTA_T / 2)
    minus = mw.EnsembleSpec(
        n=10, z_mean=0.0, z_rms=1e-4, v_mean=0.0, v_rms=1e-3, dz0=3e-6,
        seed=1, sigma=-1,
    )
    with pytest.raises(mw.LevelMismatchError):
        mw.run_monte_carlo(minus, pulse_first, pulse_second, cfg, DELTA_T)
    with pytest.raises(ValueError):
        mw.run_monte_carlo(spec, pulse_first, pulse_second, cfg, DELTA_T, workers=0)


def test_apex_point_lies_in_both_bands(bands, cell):
    b1, b2 = bands
    # the trajectory through (z_f, v_f) is the one both pulses address
    assert bool(b1.contains(cell.z_center, cell.v_center))
    assert bool(b2.contains(cell.z_center, cell.v_center))
    assert bool(cell.contains(cell.z_center, cell.v_center))


def test_first_band_survivors_trace_slope_one_over_delta_t(
    cfg, rb87, pulse_first, pulse_second
):
    spec = _ensemble(n=20000, v_rms=10e-3, decision_mode="band")
    result = mw.run_monte_carlo(spec, pulse_first, pulse_second, cfg, DELTA_T)
    g = mw.g_effective(rb87, cfg.eta, Level.UPPER, 1)
    kept = result.survived_first
    assert int(np.count_nonzero(kept)) > 500
    z2 = result.z0[kept] + result.v0[kept] * DELTA_T - 0.5 * g * DELTA_T**2
    v2 = result.v0[kept] - g * DELTA_T
    # the strip satisfies z = center + delta_t*v + s with |s| <= half width,
    # so regressing z on v recovers delta_t; its (z, v) axis slope is 1/dt
    slope = np.cov(v2, z2)[0, 1] / np.var(v2)
    assert slope == pytest.approx(DELTA_T, rel=0.02)


def _normal_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def test_band_survival_fraction_matches_analytic_integral(
    cfg, rb87, bands, cell, pulse_first, pulse_second
):
    b1, b2 = bands
    g = mw.g_effective(rb87, cfg.eta, Level.UPPER, 1)
    spec = mw.EnsembleSpec(
        n=30000, z_mean=0.0, z_rms=50e-6,
        v_mean=cell.v_center + g * DELTA_T, v_rms=1.5e-3,
        dz0=3e-6, seed=7777, decision_mode="band",
    )
    result = mw.run_monte_carlo(spec, pulse_first, pulse_second, cfg, DELTA_T)

    # oracle: P = int over the first band of phi(z0) * P(v0 in the window
    # that lands the atom inside the second band)
    nodes, weights = np.polynomial.legendre.leggauss(64)
    w1 = 2.0 * b1.half_width
    z0 = nodes * (w1 / 2.0)
    phi = np.exp(-0.5 * (z0 / spec.z_rms) ** 2) / (
        spec.z_rms * math.sqrt(2.0 * math.pi)
    )
    v_hit = (b2.center - z0 + 0.5 * g * DELTA_T**2) / DELTA_T
    v_half = b2.half_width / DELTA_T
    p_v = np.array([
        _normal_cdf((vc + v_half - spec.v_mean) / spec.v_rms)
        - _normal_cdf((vc - v_half - spec.v_mean) / spec.v_rms)
        for vc in v_hit
    ])
    fraction = float(np.sum(weights * phi * p_v) * (w1 / 2.0))

    expected = spec.n * fraction
    assert expected > 300
    assert result.n_survived_both == pytest.approx(expected, rel=0.15)


def test_cloud_inside_both_bands_survives_fully(cfg, rb87, cell):
    g = mw.g_effective(rb87, cfg.eta, Level.UPPER, 1)
    v0 = (cell.z_center + 0.5 * g * DELTA_T**2) / DELTA_T
    spec = mw.EnsembleSpec(
        n=64, z_mean=0.0, z_rms=0.0, v_mean=v0, v_rms=0.0,
        dz0=3e-6, seed=3, decision_mode="band",
    )
    p1 = mw.PulseSpec.resonant_at(0.0, cfg, t0=0.0, tau=1e-5,
                                  branch=mw.StretchedBranch(1))
    p2 = mw.PulseSpec.resonant_at(cell.z_center, cfg, t0=DELTA_T, tau=1e-5,
                                  branch=mw.StretchedBranch(1))
    result = mw.run_monte_carlo(spec, p1, p2, cfg, DELTA_T)
    assert result.summary()["fraction_both"] == 1.0


def test_summary_reports_counts(cfg, pulse_first, pulse_second):
    spec = _ensemble(n=500, decision_mode="band")
    result = mw.run_monte_carlo(spec, pulse_first, pulse_second, cfg, DELTA_T)
    s = result.summary()
    assert s["n_total"] == 500
    assert s["n_survived_both"] == result.n_survived_both
    assert s["cell_velocity_support_m_s"] == result.cell.velocity_support
    if result.n_survived_both:
        assert s["survivor_v_range_m_s"] <= result.cell.velocity_support * 1.001
