import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblefocus.errors import (
    DegenerateConfigurationError,
    InvalidInputError,
    MediumRegimeWarning,
    PackingError,
)
from bubblefocus.physics import (
    BubbleCloud,
    MediaParams,
    bubble_count_for_fraction,
    derive_acoustics,
    place_bubbles,
    sphere_volume,
)


def test_water_sound_speed_and_contrast(media):
    d = derive_acoustics(media, 1e5, 5e-5)
    assert d.c_w == pytest.approx(1440, rel=2e-3)
    assert d.delta == pytest.approx(1.2e-3, rel=1e-15)
    assert d.c_b == pytest.approx(math.sqrt(1.27e5 / 1.2))
    assert d.k_w == pytest.approx(1e5 / d.c_w)
    assert d.x_b == pytest.approx(d.k_b * 5e-5)


def test_zero_frequency(media):
    d = derive_acoustics(media, 0.0, 5e-5)
    assert d.k_w == d.k_b == d.x_w == d.x_b == 0.0


@pytest.mark.parametrize("name", ["rho_w", "rho_b", "kappa_w", "kappa_b"])
@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_non_positive_media_rejected(name, bad):
    with pytest.raises(InvalidInputError, match=name):
        MediaParams(**{name: bad})


def test_inverted_regime_warns():
    with pytest.warns(MediumRegimeWarning):
        MediaParams(rho_w=1.0, rho_b=2.0)


@given(
    scale=st.floats(1e-3, 1e3),
    rho=st.floats(0.1, 1e4),
    kappa=st.floats(1e3, 1e10),
)
def test_sound_speed_is_homogeneous(scale, rho, kappa):
    base = MediaParams(rho_w=rho * 1e4, kappa_w=kappa * 1e4, rho_b=rho, kappa_b=kappa)
    scaled = MediaParams(rho_w=rho * 1e4, kappa_w=kappa * 1e4, rho_b=rho * scale, kappa_b=kappa * scale)
    assert scaled.c_b == pytest.approx(base.c_b, rel=1e-12)
    assert scaled.c_w == base.c_w


def test_default_bubble_count():
    # direct arithmetic: 2e-4 * 1e-6 / (4/3 pi 1.25e-13) = 381.97
    assert 2e-4 * 0.01**3 / (4 / 3 * math.pi * (5e-5) ** 3) == pytest.approx(381.9718634)
    assert bubble_count_for_fraction(2e-4, 0.01, 5e-5) == 381


def test_single_bubble_fraction():
    R, L = 5e-5, 0.01
    assert bubble_count_for_fraction(sphere_volume(R) / L**3, L, R) == 1
    assert bubble_count_for_fraction(7 * sphere_volume(R) / L**3, L, R) == 7


@pytest.mark.parametrize("phi", [0.0, 1e-12, -1e-3])
def test_vanishing_fraction_is_degenerate(phi):
    with pytest.raises(DegenerateConfigurationError):
        bubble_count_for_fraction(phi, 0.01, 5e-5)


@given(
    phi=st.floats(1e-5, 1e-2),
    dphi=st.floats(0, 1e-2),
    L=st.floats(5e-3, 2e-2),
    dL=st.floats(0, 1e-2),
    R=st.floats(2e-5, 1e-4),
    dR=st.floats(0, 1e-4),
)
def test_bubble_count_monotone(phi, dphi, L, dL, R, dR):
    def count(p, l, r):
        try:
            return bubble_count_for_fraction(p, l, r)
        except DegenerateConfigurationError:
            return 0

    n = count(phi, L, R)
    assert count(phi + dphi, L, R) >= n
    assert count(phi, L + dL, R) >= n
    assert count(phi, L, R + dR) <= n


def _min_pair_distance(c):
    d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2)
    np.fill_diagonal(d, np.inf)
    return d.min()


def test_default_cloud_exhaustive_distance_scan():
    R, L = 5e-5, 0.01
    cloud = place_bubbles(7, 381, L, R, exclusion_points=[(0, 0, 0)], exclusion_radius=2 * R)
    c = cloud.centers
    assert c.shape == (381, 3)
    worst = np.inf
    for i in range(len(c)):
        for j in range(i + 1, len(c)):
            worst = min(worst, math.dist(c[i], c[j]))
    assert worst >= 2 * R
    assert np.all(np.linalg.norm(c, axis=1) >= 2 * R)
    assert np.all(np.abs(c) <= L / 2)


def test_single_center_in_box():
    cloud = place_bubbles(3, 1, 0.01, 5e-5)
    assert cloud.n == 1 and np.all(np.abs(cloud.centers) <= 0.005)


def test_placement_is_deterministic():
    a = place_bubbles(11, 50, 0.01, 5e-5)
    b = place_bubbles(11, 50, 0.01, 5e-5)
    c = place_bubbles(12, 50, 0.01, 5e-5)
    assert np.array_equal(a.centers, b.centers)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != c.fingerprint()


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(0, 60),
    R=st.floats(1e-4, 6e-4),
    excl=st.floats(0, 2e-3),
)
def test_placement_satisfies_cloud_invariants(seed, n, R, excl):
    L = 0.01
    pts = np.array([[0, 0, 0], [0.004, 0, 0]])
    cloud = place_bubbles(seed, n, L, R, exclusion_points=pts, exclusion_radius=excl)
    c = cloud.centers
    assert c.shape == (n, 3)
    assert np.all(np.abs(c) <= L / 2)
    if n > 1:
        assert _min_pair_distance(c) >= 2 * R
    if n:
        assert np.min(np.linalg.norm(c[:, None, :] - pts[None], axis=2)) >= excl


def test_packing_budget_exhausted():
    with pytest.raises(PackingError) as info:
        place_bubbles(0, 100, 0.01, 2e-3, max_attempts=2000)
    assert info.value.attempts == 2000
    assert 0 < info.value.placed < 100


def test_cloud_rejects_overlap_and_outside():
    with pytest.raises(InvalidInputError):
        BubbleCloud(np.array([[0, 0, 0], [1e-5, 0, 0]]), 5e-5, 0.01)
    with pytest.raises(InvalidInputError):
        BubbleCloud(np.array([[0.006, 0, 0]]), 5e-5, 0.01)


def test_cloud_centers_read_only():
    cloud = place_bubbles(0, 5, 0.01, 5e-5)
    with pytest.raises(ValueError):
        cloud.centers[0, 0] = 1.0


def test_cloud_volume_fraction():
    cloud = place_bubbles(0, 381, 0.01, 5e-5)
    assert cloud.volume_fraction == pytest.approx(381 * sphere_volume(5e-5) / 1e-6)
