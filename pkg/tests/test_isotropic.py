import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from floatbody.body import ConvexBody, GeometryError, affine_image, make_standard_body
from floatbody.isotropic import (IsotropicForm, check_central_section,
                                 check_halfspace_depth_bracket, inverse_sqrt_spd,
                                 isotropic_constant, isotropy_residuals, to_isotropic)
from floatbody.measure import sample_uniform

LK_CUBE = 1 / math.sqrt(12)


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_unit_cube_is_isotropic(d):
    k = make_standard_body("cube", d, unit_volume=True)
    iso, form = to_isotropic(k)
    assert form.LK == pytest.approx(LK_CUBE, rel=1e-12)
    np.testing.assert_allclose(form.matrix, np.eye(d), atol=1e-12)
    np.testing.assert_allclose(form.shift, 0.0, atol=1e-14)


def test_rectangle_whitening():
    k = ConvexBody(2, [[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 1, 0.25, 0.25],
                   [[-1, -0.25], [1, -0.25], [1, 0.25], [-1, 0.25]])
    iso, form = to_isotropic(k)
    assert form.LK == pytest.approx(LK_CUBE, rel=1e-12)
    np.testing.assert_allclose(np.abs(iso.vertices), 0.5, atol=1e-12)
    assert iso.label == "iso"


def test_simplex_isotropic_mc():
    iso, form = to_isotropic(make_standard_body("simplex", 2))
    res = isotropy_residuals(iso, form.LK)
    assert max(res.values()) < 1e-12
    n = 10 ** 6
    x = sample_uniform(iso, n, seed=3)
    emp = np.cov(x.T)
    xc = x - x.mean(axis=0)
    se = np.sqrt(np.var(xc[:, :, None] * xc[:, None, :], axis=0) / n)
    assert np.all(np.abs(emp - form.LK ** 2 * np.eye(2)) <= 3 * se)
    # the triangle constant is 3^(-1/4)/sqrt(6), the largest value in the plane
    assert form.LK == pytest.approx(3 ** -0.25 / math.sqrt(6), rel=1e-12)


@given(st.integers(0, 10_000))
def test_affine_invariance_of_LK(seed):
    r = np.random.default_rng(seed)
    m = r.normal(size=(3, 3)) + 2 * np.eye(3)
    if abs(np.linalg.det(m)) < 0.2:
        return
    k = affine_image(make_standard_body("cube", 3), m, r.normal(size=3))
    assert isotropic_constant(k) == pytest.approx(LK_CUBE, rel=1e-10)
    iso, form = to_isotropic(k)
    assert max(isotropy_residuals(iso, form.LK).values()) < 1e-10


def test_form_roundtrip_and_apply():
    k = make_standard_body("simplex", 3)
    iso, form = to_isotropic(k)
    again = IsotropicForm.from_dict(form.to_dict())
    np.testing.assert_allclose(again.apply(k.vertices), iso.vertices, atol=1e-12)


def test_ill_conditioned_rejected():
    with pytest.raises(GeometryError):
        inverse_sqrt_spd(np.diag([1.0, 1e-12]))
    w = inverse_sqrt_spd(np.array([[4.0, 0.0], [0.0, 9.0]]))
    np.testing.assert_allclose(w, np.diag([0.5, 1 / 3]))


def test_depth_bracket_examples():
    iso, form = to_isotropic(make_standard_body("cube", 2))
    rep = check_halfspace_depth_bracket(iso, [1.0, 0.0], 0.1, form.LK)
    (_, lo, t, hi), = rep.rows
    assert t == pytest.approx(0.4, abs=1e-10)
    assert lo == pytest.approx(0.0774, abs=1e-4)
    assert hi == pytest.approx(10 * math.log(20) * LK_CUBE, rel=1e-12)
    assert hi == pytest.approx(8.649, abs=2e-3)  # printed value uses LK rounded to 0.2887
    assert rep.passed
    iso, form = to_isotropic(make_standard_body("simplex", 2))
    ang = 2 * np.pi * np.arange(16) / 16
    rep = check_halfspace_depth_bracket(iso, np.column_stack([np.cos(ang), np.sin(ang)]),
                                        0.05, form.LK)
    assert len(rep.rows) == 16 and rep.passed
    rep = check_halfspace_depth_bracket(iso, [1.0, 0.0], math.exp(-1) - 1e-9, form.LK)
    assert rep.rows[0][1] < 1e-8 and rep.rows[0][2] >= 0
    with pytest.raises(GeometryError):
        check_halfspace_depth_bracket(iso, [1.0, 0.0], 0.5, form.LK)


def test_central_section_examples():
    iso, form = to_isotropic(make_standard_body("cube", 2))
    rep = check_central_section(iso, [[1.0, 0.0]], form.LK)
    assert rep.value("psi[0](0)") == pytest.approx(1.0, abs=1e-12)
    assert rep.rows[0][1] == pytest.approx(0.4330, abs=1e-4)
    assert rep.rows[0][3] == pytest.approx(3.4641, abs=1e-4)
    ang = 2 * np.pi * np.arange(32) / 32
    fan = np.column_stack([np.cos(ang), np.sin(ang)])
    rep = check_central_section(iso, fan, form.LK)
    assert rep.passed
    # the square's central chord grows to sqrt(2) on the diagonals
    assert rep.value("max/min") == pytest.approx(math.sqrt(2), abs=1e-9)
    iso, form = to_isotropic(make_standard_body("simplex", 2))
    assert check_central_section(iso, fan, form.LK).passed
