import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conemink.cone import (Cone, chart, chart_inverse, chart_inverse_many, chart_many, delta_boundary,
                           dual_cone, projected_domain)
from conemink.verify import random_cone_3d


def test_planar_cone_geometry():
    c = Cone.planar(math.pi / 4)
    assert c.dim == 2
    assert c.beta0 == math.pi / 4
    np.testing.assert_allclose(c.axis, [-1.0, 0.0])
    # rays lie on the cone boundary and are orthogonal to one dual normal each
    assert np.allclose(np.abs(c.rays @ c.dual_normals.T).min(axis=1), 0.0)
    assert c.contains([-1.0, 0.0])
    assert not c.contains([1.0, 0.0])


@pytest.mark.parametrize("beta0", [0.0, math.pi / 2, -0.3])
def test_planar_rejects_bad_angle(beta0):
    with pytest.raises(ValueError):
        Cone.planar(beta0)


@given(st.floats(0.05, 1.5), st.floats(-1.0, 1.0))
def test_planar_delta_is_angle_to_boundary(beta0, frac):
    c = Cone.planar(beta0)
    th = frac * beta0
    assert delta_boundary(c, [math.cos(th), math.sin(th)]) == pytest.approx(beta0 - abs(th), abs=1e-12)


def test_delta_outside_domain_rejected():
    c = Cone.planar(0.3)
    with pytest.raises(ValueError):
        delta_boundary(c, [math.cos(0.6), math.sin(0.6)])


def test_circular_cone():
    c = Cone.circular()
    assert c.is_circular and c.dim == 3
    assert c.contains([-1.0, 0.5, 0.5])
    assert not c.contains([-1.0, 1.0, 1.0])
    assert delta_boundary(c, [1.0, 0.0, 0.0]) == pytest.approx(math.pi / 4)
    p = c.polyhedral(8)
    assert len(p.dual_normals) == 8 and not p.is_circular


def test_dual_cone_involution():
    c = Cone.from_rays([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [-1.0, -1.0, 0.0], [-1.0, 0.0, -1.0]])
    cc = dual_cone(dual_cone(c))
    a = np.sort(np.round(c.user_rays, 12), axis=0)
    b = np.sort(np.round(cc.user_rays, 12), axis=0)
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_skewed_cone_facets_are_supporting():
    rng = np.random.default_rng(0)
    for _ in range(20):
        c = random_cone_3d(rng)
        # every dual normal supports C: <r, g> <= 0 on all rays, with at least two tight rays
        s = c.rays @ c.dual_normals.T
        assert np.all(s <= 1e-12)
        assert np.all(np.sum(np.abs(s) < 1e-10, axis=0) >= 2)


def test_non_pointed_rejected():
    with pytest.raises(ValueError):
        Cone.from_rays([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])


def test_user_frame_roundtrip():
    c = Cone.circular(math.pi / 4, axis=[0.0, 0.0, -1.0])
    np.testing.assert_allclose(c.user_axis, [0.0, 0.0, -1.0], atol=1e-15)
    np.testing.assert_allclose(c.frame @ c.user_axis, c.axis, atol=1e-15)


@settings(max_examples=50)
@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_chart_roundtrip(x, y):
    c = Cone.circular(math.pi / 4)
    if math.hypot(x, y) >= 0.99:
        return
    d = chart(c, [x, y])
    assert np.linalg.norm(d.v) == pytest.approx(1.0)
    np.testing.assert_allclose(chart_inverse(c, d), [x, y], atol=1e-14)
    np.testing.assert_allclose(chart_inverse_many(chart_many([[x, y]])), [[x, y]], atol=1e-14)


def test_projected_domain_planar():
    dom = projected_domain(Cone.planar(math.pi / 4))
    np.testing.assert_allclose(dom.vertices.ravel(), [-1.0, 1.0], atol=1e-15)
    assert dom.contains(np.array([0.5]))
    assert not dom.contains(np.array([1.5]))
    assert dom.diameter == pytest.approx(2.0)
