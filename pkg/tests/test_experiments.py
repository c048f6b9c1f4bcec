import dataclasses
import math

import numpy as np
import pytest

from bubblefocus.errors import ConfigMismatchError, DomainError, InvalidInputError, UnboundedWidthError
from bubblefocus.experiments import (
    ExperimentConfig,
    FieldMap,
    averaged_profiles,
    build_cloud,
    frequency_average,
    fwhm,
    green_map,
    native_omega_grid,
    run_forward,
    run_sweep,
    run_time_reversal,
)
from bubblefocus.physics import place_bubbles
from free_space import pulse_function, refocused_field

SMALL = ExperimentConfig(n_bubbles=40, line_samples=41)


class Silent:
    """A scattering model with zero amplitude at every frequency."""

    omega_M = 1.0

    def amplitude(self, omega):
        return 0.0


def test_config_validation():
    with pytest.raises(InvalidInputError):
        ExperimentConfig(receivers=((0.001, 0, 0),))
    with pytest.raises(InvalidInputError):
        ExperimentConfig(source=(0.02, 0, 0))
    with pytest.raises(InvalidInputError):
        ExperimentConfig(band_factor=100.0)
    with pytest.raises(ValueError):
        ExperimentConfig(variant="bogus")


def test_config_defaults_and_hash():
    cfg = ExperimentConfig()
    assert cfg.n_target == 381
    assert cfg.domega == pytest.approx(125.66, abs=0.01)
    assert cfg.line()[0, 0] == -0.01 and cfg.line()[-1, 0] == 0.01
    assert cfg.hash() == ExperimentConfig().hash()
    assert cfg.hash() != ExperimentConfig(seed=1).hash()


def test_cloud_respects_exclusions():
    cfg = ExperimentConfig()
    cloud = build_cloud(cfg)
    assert cloud.n == 381
    d = np.linalg.norm(cloud.centers[:, None, :] - cfg.exclusion_points()[None], axis=2)
    assert d.min() >= 2 * cfg.radius


def test_sweep_order_independent_of_threads():
    for threads in (1, 3, 8):
        out = np.zeros(50)

        def task(i):
            out[i] = i * i

        run_sweep(50, task, threads)
        assert np.array_equal(out, np.arange(50) ** 2)


def test_free_space_forward_is_delayed_scaled_pulse():
    cfg = ExperimentConfig(volume_fraction=0.0)
    rec = run_forward(cfg)
    assert len(rec.band) == 5750
    r1 = rec.channel(0).samples
    s = rec.pulse.samples
    delay = 0.02 / cfg.media.c_w
    assert delay == pytest.approx(1.39e-5, abs=1e-7)
    # circular cross-correlation peaks at the travel time, with negative sign (G < 0 at short range)
    xc = np.fft.irfft(np.fft.rfft(r1) * np.conj(np.fft.rfft(s)), n=len(s))
    lag = int(np.argmax(np.abs(xc)))
    assert xc[lag] < 0
    assert abs(lag * cfg.dt - delay) <= cfg.dt
    assert np.max(np.abs(r1)) / np.max(np.abs(s)) == pytest.approx(1 / (4 * math.pi * 0.02), rel=0.02)


def test_no_bubbles_equals_silent_bubbles():
    cfg0 = dataclasses.replace(SMALL, n_bubbles=0)
    rec0 = run_forward(cfg0)
    rec_silent = run_forward(SMALL, model=Silent())
    assert np.array_equal(rec0.signals.samples, rec_silent.signals.samples)


def test_bubbles_lengthen_the_recording():
    cfg = dataclasses.replace(SMALL, n_bubbles=150)
    bubbly = run_forward(cfg)
    free = run_forward(dataclasses.replace(cfg, n_bubbles=0))
    tail = bubbly.signals.times > cfg.t0 + cfg.window + 5e-4
    e_bubbly = np.sum(bubbly.signals.samples[0, tail] ** 2)
    e_free = np.sum(free.signals.samples[0, tail] ** 2)
    assert e_bubbly > 100 * e_free


def test_forward_is_deterministic_across_threads():
    a = run_forward(dataclasses.replace(SMALL, threads=1))
    b = run_forward(dataclasses.replace(SMALL, threads=4))
    assert np.array_equal(a.signals.samples, b.signals.samples)
    assert np.array_equal(a.transfer, b.transfer)


def test_pipeline_linearity():
    cfg = dataclasses.replace(SMALL, n_bubbles=15)
    scaled = dataclasses.replace(cfg, pulse_amplitude=-2.5)
    rec, rec2 = run_forward(cfg), run_forward(scaled)
    tol = 1e-12 * np.abs(rec.signals.samples).max()
    assert np.allclose(rec2.signals.samples, -2.5 * rec.signals.samples, rtol=0, atol=2.5 * tol)
    tr, tr2 = run_time_reversal(cfg, rec), run_time_reversal(scaled, rec2)
    peak = np.abs(tr.refocused.samples).max()
    assert np.allclose(tr2.refocused.samples, -2.5 * tr.refocused.samples, rtol=0, atol=1e-11 * peak)


def test_reversal_rejects_other_cloud():
    rec = run_forward(SMALL)
    other = place_bubbles(99, 40, SMALL.box_length, SMALL.radius)
    with pytest.raises(ConfigMismatchError):
        run_time_reversal(SMALL, rec, cloud=other)


def test_solver_errors_carry_frequency():
    class Failing:
        omega_M = 1.0

        def amplitude(self, omega):
            if omega > 1e5:
                raise DomainError("bad amplitude")
            return 0.0

    with pytest.raises(DomainError) as info:
        run_forward(dataclasses.replace(SMALL, n_bubbles=3), model=Failing())
    assert info.value.omega > 1e5
    assert "omega" in str(info.value)


def test_free_space_refocus_matches_closed_form(default_pipeline):
    cfg = default_pipeline["free_cfg"]
    tr = default_pipeline["free_reversal"]
    t_star = tr.peak_time
    x = tr.field.axis1
    pts = np.zeros((len(x), 3))
    pts[:, 0] = x
    s = pulse_function(cfg.omega_r, cfg.t0, cfg.window)
    oracle = refocused_field(pts, t_star, cfg.source, cfg.receivers, cfg.media.c_w, cfg.duration, s)
    ours = tr.spatial_profile(t_star)
    assert np.max(np.abs(ours - np.abs(oracle))) < 0.02 * np.abs(oracle).max()
    w_ours, w_oracle = fwhm(x, ours), fwhm(x, oracle)
    assert w_ours == pytest.approx(w_oracle, rel=0.02)
    wavelength = 2 * math.pi * cfg.media.c_w / cfg.omega_r
    assert w_ours == pytest.approx(wavelength / 2, rel=0.15)


def test_peak_time_tracks_reversed_pulse_centre(default_pipeline):
    cfg = default_pipeline["cfg"]
    expected = cfg.duration - cfg.t0 - cfg.window / 2
    for key in ("reversal", "free_reversal"):
        assert abs(default_pipeline[key].peak_time - expected) <= 5 * cfg.dt


def test_bubbles_sharpen_the_refocus(default_pipeline):
    assert default_pipeline["reversal"].focal_width() < default_pipeline["free_reversal"].focal_width()


def test_free_green_map():
    cfg = ExperimentConfig(volume_fraction=0.0, line_samples=101)
    grid = np.array([2e5, 4e5, 8e5])
    maps = green_map(cfg, grid)
    x = maps.free.axis1
    k = grid / cfg.media.c_w
    r = np.abs(x)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        expected = -np.sin(k[None, :] * r) / (4 * np.pi * r)
    at0 = x == 0
    expected[at0] = -k / (4 * np.pi)
    assert np.allclose(maps.free.values, expected, rtol=1e-13, atol=0)
    assert np.array_equal(maps.bubbly.values, maps.free.values)
    near = green_map(cfg, grid, x_line=np.array([[1e-7, 0, 0]]))
    assert near.free.values[0] == pytest.approx(-k / (4 * np.pi), rel=1e-9)


def test_green_map_around_resonance(default_pipeline):
    cfg = default_pipeline["cfg"]
    cloud = default_pipeline["cloud"]
    wM = cfg.omega_M
    above = green_map(cfg, native_omega_grid(cfg, 1.04 * wM, 1.1 * wM), cloud=cloud)
    # isolated spikes remain where the line grazes a bubble; on average the field is gone
    assert np.abs(above.bubbly.values).mean() < 0.01 * np.abs(above.free.values).mean()
    below = green_map(cfg, native_omega_grid(cfg, 0.95 * wM, 0.999 * wM), cloud=cloud)
    i0 = int(np.argmin(np.abs(below.bubbly.axis1)))
    w = below.bubbly.axis2
    assert abs(frequency_average(below.bubbly, w[0], w[-1])[i0]) > abs(frequency_average(below.free, w[0], w[-1])[i0])


def test_native_grid():
    cfg = ExperimentConfig()
    g = native_omega_grid(cfg, 1000.0, 2000.0)
    k = np.round(g / cfg.domega)
    assert np.allclose(g, k * cfg.domega, rtol=1e-15)
    assert g[0] >= 1000 and g[-1] <= 2000 and np.all(np.diff(k) == 1)


def test_frequency_average_of_constant_map():
    x = np.linspace(-1, 1, 7)
    w = np.linspace(10.0, 20.0, 11)
    profile = np.cos(x)
    fmap = FieldMap(x, w, np.repeat(profile[:, None], len(w), axis=1))
    assert np.allclose(frequency_average(fmap, 10.0, 20.0), profile, rtol=1e-15)
    assert np.allclose(frequency_average(fmap, 12.0, 17.0), profile, rtol=1e-15)
    with pytest.raises(InvalidInputError):
        frequency_average(fmap, 5.0, 15.0)


def test_frequency_average_of_linear_map():
    x = np.array([0.0, 1.0])
    w = np.linspace(0.0, 4.0, 9)
    fmap = FieldMap(x, w, np.vstack([w, 2 * w]))
    assert np.allclose(frequency_average(fmap, 0.0, 4.0), [2.0, 4.0])


def test_field_map_validation():
    with pytest.raises(InvalidInputError):
        FieldMap(np.arange(3.0), np.arange(2.0), np.zeros((2, 3)))
    with pytest.raises(InvalidInputError):
        FieldMap(np.arange(2.0), np.arange(2.0), np.array([[0, np.nan], [0, 0]]))


@pytest.mark.parametrize("half_base", [0.3, 0.01234])
def test_fwhm_triangle(half_base):
    x = np.linspace(-1, 1, 2001)
    tri = np.clip(1 - np.abs(x - 0.1) / half_base, 0, None)
    assert fwhm(x, 7.0 * tri) == pytest.approx(half_base, rel=1e-9)
    assert fwhm(x, -tri) == pytest.approx(half_base, rel=1e-9)


def test_fwhm_unbounded():
    x = np.linspace(0, 1, 11)
    with pytest.raises(UnboundedWidthError):
        fwhm(x, np.ones_like(x))
    with pytest.raises(UnboundedWidthError):
        fwhm(x, 1 - 0.3 * x)


def test_averaged_profile_peaks_at_origin():
    cfg = ExperimentConfig(volume_fraction=0.0)
    prof = averaged_profiles(cfg, 0.8, 0.99)
    assert abs(prof.x[np.argmax(np.abs(prof.free))]) < 1e-12
    assert prof.width_free == pytest.approx(0.0152, rel=0.1)
