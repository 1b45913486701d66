import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.spatial import ConvexHull

from floatbody.body import (ConvexBody, GeometryError, affine_image, hrep_to_vrep,
                            make_standard_body, support, vrep_to_hrep)
from floatbody.measure import (ball_volume, cap_quantile, cap_volume_fraction, centroid,
                               covariance, decompose, marginal_density, mc_cap_quantile,
                               median_depth, order_stat_index, sample_uniform,
                               section_profile, volume)


def clipped_fraction(body, theta, t):
    """Oracle: hull volume of body ∩ {<x,theta> >= t} over hull volume of body."""
    theta = np.asarray(theta, dtype=float)
    if t >= support(body, theta) - 1e-12:
        return 0.0
    if t <= -support(body, -theta) + 1e-12:
        return 1.0
    cut = ConvexBody(body.dim, np.vstack([body.normals, -theta]),
                     np.append(body.offsets, -t * np.linalg.norm(theta)))
    part = hrep_to_vrep(cut)
    return ConvexHull(part.vertices).volume / ConvexHull(body.vertices).volume


def random_polytope(seed, d=3, n=20):
    pts = np.random.default_rng(seed).normal(size=(n, d))
    return vrep_to_hrep(pts)


# ---------------------------------------------------------------- volume and moments

@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_simplex_volume(d):
    k = make_standard_body("simplex", d)
    dec = decompose(k)
    assert len(dec.simplices) == 1
    assert volume(k) == pytest.approx(1 / math.factorial(d), rel=1e-12)


def test_unit_cube_decomposition():
    k = affine_image(make_standard_body("cube", 3), 0.5 * np.eye(3), [0.5, 0.5, 0.5])
    dec = decompose(k)
    assert len(dec.simplices) == 6
    np.testing.assert_allclose(dec.volumes, 1 / 6)
    assert dec.total_volume == pytest.approx(1.0)


def test_cross_polytope_area():
    dec = decompose(make_standard_body("cross_polytope", 2))
    assert len(dec.simplices) == 4
    np.testing.assert_allclose(dec.volumes, 0.5)
    assert dec.total_volume == pytest.approx(2.0)


@pytest.mark.parametrize("seed", range(5))
def test_volume_matches_qhull(seed):
    k = random_polytope(seed)
    assert volume(k) == pytest.approx(ConvexHull(k.vertices).volume, rel=1e-10)


def test_volume_delaunay_path():
    # no cached simplices in d = 4: a random hull goes through Delaunay
    pts = np.random.default_rng(3).normal(size=(30, 4))
    from scipy.spatial import ConvexHull as Hull

    hull = Hull(pts)
    k = ConvexBody(4, hull.equations[:, :4], -hull.equations[:, 4], pts[hull.vertices])
    assert volume(k) == pytest.approx(hull.volume, rel=1e-10)


def test_centroid_and_covariance_closed_form():
    k = make_standard_body("simplex", 2)
    np.testing.assert_allclose(centroid(k), [1 / 3, 1 / 3])
    np.testing.assert_allclose(covariance(k), [[1 / 18, -1 / 36], [-1 / 36, 1 / 18]],
                               atol=1e-14)
    unit = make_standard_body("cube", 3, unit_volume=True)
    np.testing.assert_allclose(covariance(unit), np.eye(3) / 12, atol=1e-14)


def test_covariance_matches_mc():
    k = make_standard_body("simplex", 2)
    n = 10 ** 6
    x = sample_uniform(k, n, seed=7)
    emp = np.cov(x.T)
    exact = covariance(k)
    # standard error of each entry from fourth moments of the sample
    xc = x - x.mean(axis=0)
    se = np.sqrt(np.var(xc[:, :, None] * xc[:, None, :], axis=0) / n)
    assert np.all(np.abs(emp - exact) <= 3 * se)


def test_affine_volume_scaling():
    k = make_standard_body("cross_polytope", 3)
    m = np.array([[2.0, 0.3, 0], [0, 1.0, 0.1], [0.2, 0, 0.5]])
    img = affine_image(k, m, [1.0, 2.0, 3.0])
    assert volume(img) == pytest.approx(volume(k) * abs(np.linalg.det(m)), rel=1e-12)
    np.testing.assert_allclose(centroid(img), m @ centroid(k) + [1, 2, 3], atol=1e-12)


# ---------------------------------------------------------------- caps

def test_cap_fraction_examples():
    cube = make_standard_body("cube", 2)
    assert cap_volume_fraction(cube, [1.0, 0.0], 0.8) == pytest.approx(0.1, abs=1e-14)
    for d in (2, 3, 4):
        k = make_standard_body("simplex", d)
        e1 = np.eye(d)[0]
        for t in (0.0, 0.3, 0.77, 1.0):
            assert cap_volume_fraction(k, e1, t) == pytest.approx((1 - t) ** d, abs=1e-13)


@pytest.mark.parametrize("shape", ["cube", "simplex", "cross_polytope"])
def test_full_and_empty_caps(shape):
    k = make_standard_body(shape, 3)
    th = np.array([0.3, -0.5, 0.8])
    th /= np.linalg.norm(th)
    assert cap_volume_fraction(k, th, -support(k, -th)) == pytest.approx(1.0, abs=1e-12)
    assert cap_volume_fraction(k, th, support(k, th)) == pytest.approx(0.0, abs=1e-12)


@given(st.integers(0, 1000), st.floats(0.01, 0.99))
def test_cap_fraction_matches_clipping(seed, frac):
    k = random_polytope(seed % 50)
    th = np.random.default_rng(seed).normal(size=3)
    th /= np.linalg.norm(th)
    lo, hi = -support(k, -th), support(k, th)
    t = lo + frac * (hi - lo)
    assert cap_volume_fraction(k, th, t) == pytest.approx(clipped_fraction(k, th, t), abs=1e-9)


@given(st.integers(0, 1000))
def test_cap_fraction_monotone(seed):
    k = random_polytope(seed % 20)
    th = np.random.default_rng(seed).normal(size=3)
    th /= np.linalg.norm(th)
    ts = np.linspace(-support(k, -th), support(k, th), 40)
    a = np.array([cap_volume_fraction(k, th, t) for t in ts])
    assert np.all(np.diff(a) <= 1e-14)


def test_vectorized_over_directions():
    k = make_standard_body("cross_polytope", 3)
    th = np.random.default_rng(0).normal(size=(7, 3))
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    many = cap_volume_fraction(k, th, 0.2)
    one = [cap_volume_fraction(k, u, 0.2) for u in th]
    np.testing.assert_allclose(many, one, atol=1e-15)


def test_cap_quantile_examples():
    cube = make_standard_body("cube", 2)
    assert cap_quantile(cube, [1.0, 0.0], 0.1) == pytest.approx(0.8, abs=1e-10)
    diag = np.array([1.0, 1.0]) / math.sqrt(2)
    want = (2 - math.sqrt(8 * 0.02)) / math.sqrt(2)
    assert cap_quantile(cube, diag, 0.02) == pytest.approx(want, abs=1e-10)
    assert want == pytest.approx(1.131371, abs=1e-6)
    for d in (2, 3, 5):
        k = make_standard_body("simplex", d)
        for delta in (0.001, 0.1, 0.3):
            assert cap_quantile(k, np.eye(d)[0], delta) == pytest.approx(
                1 - delta ** (1 / d), abs=1e-10)


@given(st.integers(0, 1000), st.floats(0.001, 0.999))
def test_quantile_inverts_fraction(seed, delta):
    k = random_polytope(seed % 20)
    th = np.random.default_rng(seed).normal(size=3)
    th /= np.linalg.norm(th)
    t = cap_quantile(k, th, delta)
    assert cap_volume_fraction(k, th, t) == pytest.approx(delta, abs=1e-9)


def test_cap_quantile_rejects_bad_delta():
    k = make_standard_body("cube", 2)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(GeometryError):
            cap_quantile(k, [1.0, 0.0], bad)


def test_median_depth():
    assert median_depth(make_standard_body("cube", 3), [0.6, 0.0, 0.8]) == pytest.approx(
        0.0, abs=1e-10)
    assert median_depth(make_standard_body("cross_polytope", 2), [1.0, 0.0]) == pytest.approx(
        0.0, abs=1e-10)
    assert median_depth(make_standard_body("simplex", 2), [1.0, 0.0]) == pytest.approx(
        1 - 2 ** -0.5, abs=1e-10)
    assert median_depth(make_standard_body("simplex", 3), [1.0, 0.0, 0.0]) == pytest.approx(
        0.206299, abs=1e-6)


# ---------------------------------------------------------------- sections

def test_section_examples():
    cube = make_standard_body("cube", 2)
    prof = section_profile(cube, [1.0, 0.0], 33)
    np.testing.assert_allclose(prof.psi[:-1], 0.5, atol=1e-12)
    k = make_standard_body("simplex", 2)
    prof = section_profile(k, [1.0, 0.0], 65)
    np.testing.assert_allclose(prof.psi[:-1], 2 * (1 - prof.grid[:-1]), atol=1e-12)
    np.testing.assert_allclose(prof.A, (1 - prof.grid) ** 2, atol=1e-12)


@pytest.mark.parametrize("shape", ["cube", "simplex", "cross_polytope"])
def test_section_is_derivative_of_cap(shape):
    k = make_standard_body(shape, 3)
    th = np.array([0.2, 0.5, -0.7])
    exact = section_profile(k, th, 129)
    diff = section_profile(k, th, 129, method="difference")
    inner = slice(2, -2)
    np.testing.assert_allclose(exact.psi[inner], diff.psi[inner], atol=1e-5)
    # integral of psi over the support is 1
    assert trapezoid(exact.psi, exact.grid) == pytest.approx(1.0, abs=2e-3)


def test_marginal_density_simplex():
    for d in (2, 3, 4):
        k = make_standard_body("simplex", d)
        for t in (0.1, 0.5, 0.9):
            assert marginal_density(k, np.eye(d)[0], t) == pytest.approx(
                d * (1 - t) ** (d - 1), rel=1e-10)


def test_profile_rejects_small_grid():
    with pytest.raises(GeometryError):
        section_profile(make_standard_body("cube", 2), [1.0, 0.0], 8)


def test_profile_csv_header():
    text = section_profile(make_standard_body("cube", 2), [1.0, 0.0], 16).to_csv()
    assert text.splitlines()[0] == "t,psi,A"
    assert len(text.splitlines()) == 17


# ---------------------------------------------------------------- sampling

def test_sample_mean_cube3():
    n = 10 ** 6
    x = sample_uniform(make_standard_body("cube", 3), n, seed=1)
    sigma = 1 / math.sqrt(3)
    assert np.all(np.abs(x.mean(axis=0)) <= 3 * sigma / math.sqrt(n))


def test_sample_cov_unit_square():
    n = 10 ** 6
    x = sample_uniform(make_standard_body("cube", 2, unit_volume=True), n, seed=2)
    emp = np.cov(x.T)
    # variance of x_i^2 for uniform on [-1/2,1/2] is 1/80 - 1/144; of x_1 x_2 it is 1/144
    se_diag = math.sqrt((1 / 80 - 1 / 144) / n)
    se_off = math.sqrt((1 / 144) / n)
    assert np.all(np.abs(np.diag(emp) - 1 / 12) <= 3 * se_diag)
    assert abs(emp[0, 1]) <= 3 * se_off


def test_sample_determinism():
    k = make_standard_body("simplex", 3)
    a = sample_uniform(k, 1000, seed=42)
    b = sample_uniform(k, 1000, seed=42)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_uniform(k, 1000, seed=43))


def test_hit_and_run_is_uniform():
    k = make_standard_body("simplex", 5)
    x = sample_uniform(k, 200_000, seed=0)
    assert np.all(x >= -1e-12) and np.all(x.sum(axis=1) <= 1 + 1e-12)
    # first coordinate of a uniform 5-simplex point has mean 1/6 and cap masses (1-t)^5
    assert x[:, 0].mean() == pytest.approx(1 / 6, abs=3e-3)
    assert np.mean(x[:, 0] >= 0.3) == pytest.approx(0.7 ** 5, abs=5e-3)


def test_mc_quantile_examples():
    cube = make_standard_body("cube", 2)
    hits = 0
    for seed in range(20):
        x = sample_uniform(cube, 10 ** 6, seed=seed)
        hits += abs(mc_cap_quantile(x, [1.0, 0.0], 0.1) - 0.8) <= 0.01
    assert hits >= 19
    pts = np.random.default_rng(0).normal(size=(50, 2))
    top = mc_cap_quantile(pts, [1.0, 0.0], 0.01, min_tail=0)
    assert top == pts[:, 0].max()
    same = np.tile([0.3, -0.7], (100, 1))
    assert mc_cap_quantile(same, [0.6, 0.8], 0.2) == pytest.approx(0.3 * 0.6 - 0.7 * 0.8)


def test_mc_quantile_needs_tail():
    with pytest.raises(GeometryError):
        mc_cap_quantile(np.zeros((50, 2)), [1.0, 0.0], 0.1)


def test_order_stat_index():
    assert order_stat_index(10, 0.1) == 9
    assert order_stat_index(1000, 0.0001) == 1000
    assert order_stat_index(5, 0.99) == 1


def test_ball_volume():
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert ball_volume(4) == pytest.approx(math.pi ** 2 / 2)
    assert ball_volume(4) == pytest.approx(4.9348, abs=1e-4)
