import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conemink.cone import Cone
from conemink.pseudocone import (PseudoCone, hausdorff_truncated, is_asymptotic, localization_height,
                                 minkowski_sum, normalize_translation, scale, slice_at, support,
                                 support_exact, support_many, translate)
from conemink.verify import random_domain_directions, random_pseudocone_3d


def half_plane_set(beta0=math.pi / 4, h=-1.0):
    return PseudoCone.from_cuts(Cone.planar(beta0), [[1.0, 0.0]], [h])


def test_full_set_has_zero_support():
    k = PseudoCone.full(Cone.planar(0.5))
    assert support(k, [1.0, 0.0]) == 0.0
    assert is_asymptotic(k).asymptotic


def test_single_cut_planar_vertices_and_support():
    k = half_plane_set()
    np.testing.assert_allclose(k.vertices, [[-1.0, -1.0], [-1.0, 1.0]], atol=1e-15)
    assert support_exact(k, [1.0, 0.0]) == Fraction(-1)
    # the support on the boundary rays is zero, so the set is asymptotic
    assert is_asymptotic(k).asymptotic


def test_nonnegative_offsets_are_dropped():
    k = PseudoCone.from_cuts(Cone.planar(0.5), [[1.0, 0.0], [math.cos(0.2), math.sin(0.2)]], [0.5, -1.0])
    assert len(k.normals) == 1


def test_duplicate_cuts_merge_to_tightest():
    k = PseudoCone.from_cuts(Cone.planar(0.5), [[1.0, 0.0], [1.0, 0.0]], [-1.0, -2.0])
    assert list(k.offsets) == [Fraction(-2)]


def test_cut_outside_domain_rejected():
    with pytest.raises(ValueError):
        PseudoCone.from_cuts(Cone.planar(0.3), [[math.cos(1.0), math.sin(1.0)]], [-1.0])


def test_boundary_cut_is_not_asymptotic():
    c = Cone.planar(math.pi / 4)
    k = PseudoCone.from_cuts(c, [c.dual_normals[0]], [-1.0])
    assert not is_asymptotic(k).asymptotic
    np.testing.assert_allclose(normalize_translation(k).normals.shape, (0, 2))


def test_scale_and_translate_planar():
    k = half_plane_set()
    assert support_exact(scale(k, 3.0), [1.0, 0.0]) == Fraction(-3)
    moved = translate(k, [-1.0, 0.0])
    assert support(moved, [1.0, 0.0]) == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        translate(k, [1.0, 0.0])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_minkowski_sum_adds_supports_3d(seed):
    rng = np.random.default_rng(seed)
    k = random_pseudocone_3d(rng)
    l = random_pseudocone_3d(rng, cone=k.cone)
    s = minkowski_sum(k, l)
    v = random_domain_directions(k.cone, 30, rng)
    np.testing.assert_allclose(support_many(s, v), support_many(k, v) + support_many(l, v), atol=1e-9)


def test_minkowski_sum_planar_is_exact():
    c = Cone.planar(0.7)
    k = PseudoCone.from_cuts(c, [[1.0, 0.0]], [-1.0])
    l = PseudoCone.from_cuts(c, [[math.cos(0.3), math.sin(0.3)]], [-0.5])
    s = minkowski_sum(k, l)
    for v in ([1.0, 0.0], [math.cos(0.3), math.sin(0.3)], [math.cos(-0.6), math.sin(-0.6)]):
        assert support_exact(s, v) == support_exact(k, v) + support_exact(l, v)


def test_support_is_monotone_under_inclusion():
    rng = np.random.default_rng(3)
    k = random_pseudocone_3d(rng)
    bigger = PseudoCone.from_cuts(k.cone, k.normals, [h * 0.5 for h in k.offsets])
    v = random_domain_directions(k.cone, 20, rng)
    assert np.all(support_many(bigger, v) >= support_many(k, v) - 1e-12)


def test_slices_and_hausdorff():
    k = half_plane_set()
    sl = slice_at(k, 3.0)
    assert np.max(sl.vertices @ k.cone.axis) == pytest.approx(3.0)
    assert hausdorff_truncated(k, k, 3.0) == 0.0
    with pytest.raises(ValueError):
        slice_at(k, 0.5)


def test_localization_height_bounds_touching_set():
    rng = np.random.default_rng(4)
    k = random_pseudocone_3d(rng)
    v = random_domain_directions(k.cone, 1, rng)[0]
    top = localization_height(k, v)
    touch = k.vertices[np.abs(k.vertices @ v - support(k, v)) < 1e-9]
    assert np.all(touch @ k.cone.axis <= top + 1e-9)


def test_facets_tile_the_boundary_3d():
    rng = np.random.default_rng(5)
    k = random_pseudocone_3d(rng, cuts=4)
    interior = [f for f in k.facets if f.interior]
    assert interior and all(f.area > 0 for f in interior)
    assert all(any(np.allclose(f.normal, v) for v in k.normals) for f in interior)
