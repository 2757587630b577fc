import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conemink.cone import Cone
from conemink.errors import PreconditionError
from conemink.families import LayerFamily, TailFamily
from conemink.functionals import (LayerProfile, convert, family_table, gamma_functional, j_functional,
                                  quadrature_oracle, schneider_bound, schneider_family)
from conemink.mink2d import AngularMeasure, solve2d
from conemink.pseudocone import PseudoCone
from conemink.sam import DiscreteMeasure

layers = st.lists(st.tuples(st.floats(0.01, 1.5), st.floats(0.01, 10.0)), min_size=1, max_size=12)


def profile(pairs):
    d, w = zip(*pairs)
    return LayerProfile.from_layers(d, w)


def test_two_atom_example():
    p = LayerProfile.from_layers([0.2, 0.4], [1.0, 3.0])
    assert j_functional(p, 1.0) == pytest.approx(1.4, abs=1e-15)


@pytest.mark.parametrize("m", [0.3, 1.0, 2.5])
def test_single_layer(m):
    p = LayerProfile.from_layers([0.7], [3.0])
    assert j_functional(p, m) == pytest.approx(0.7 * 3.0 ** (1 / m), rel=1e-15)
    assert gamma_functional(p, m) == pytest.approx(3.0 * 0.7 ** (m + 1) / (m + 1), rel=1e-15)


def test_empty_measure():
    empty = DiscreteMeasure.empty(Cone.planar(0.5))
    assert j_functional(empty, 1.0) == 0.0 and gamma_functional(empty, 1.0) == 0.0


def test_profile_is_right_continuous_step():
    p = LayerProfile.from_layers([0.2, 0.4], [1.0, 3.0])
    assert p(0.4) == 0.0 and p(0.39) == 3.0 and p(0.2) == 3.0 and p(0.1) == 4.0


@pytest.mark.parametrize("bad", [0.0, -0.5])
def test_j_needs_positive_m(bad):
    with pytest.raises(ValueError):
        LayerProfile.from_layers([0.3], [1.0]).j(bad)


def test_gamma_needs_m_above_minus_one():
    with pytest.raises(ValueError):
        LayerProfile.from_layers([0.3], [1.0]).gamma(-1.0)


@settings(max_examples=30, deadline=None)
@given(layers, st.floats(0.2, 3.0))
def test_closed_forms_match_quadrature(pairs, m):
    p = profile(pairs)
    assert gamma_functional(p, m) == pytest.approx(quadrature_oracle(p, m, "gamma"), rel=1e-10, abs=1e-12)
    assert j_functional(p, m) == pytest.approx(quadrature_oracle(p, m, "j"), rel=1e-10, abs=1e-12)


@settings(max_examples=50)
@given(layers, layers, st.floats(-0.9, 3.0))
def test_gamma_is_linear(a, b, m):
    lhs = gamma_functional(profile(a + b), m)
    rhs = gamma_functional(profile(a), m) + gamma_functional(profile(b), m)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@settings(max_examples=50)
@given(layers, st.floats(0.1, 10.0), st.floats(0.2, 3.0))
def test_j_is_homogeneous(pairs, lam, m):
    p = profile(pairs)
    q = profile([(d, lam * w) for d, w in pairs])
    assert j_functional(q, m) == pytest.approx(lam ** (1 / m) * j_functional(p, m), rel=1e-12)


def test_schneider_single_atom_planar():
    k = solve2d(AngularMeasure.from_atoms(math.pi / 4, [(0.0, 2.0)]))
    rep = schneider_bound(k)
    assert rep["sup"] == pytest.approx(2 * math.pi / 4, rel=1e-14)
    assert rep["sup_at"] == pytest.approx(math.pi / 4)
    assert rep["eventually_nonincreasing_to_zero"]
    assert all(f["finite"] for f in rep["j_flags"].values())


def test_schneider_on_cone_is_zero():
    rep = schneider_bound(PseudoCone.full(Cone.planar(0.5)))
    assert rep["sup"] == 0.0 and all(r["value"] == 0.0 for r in rep["table"])


def test_schneider_refuses_non_asymptotic():
    c = Cone.planar(0.5)
    with pytest.raises(PreconditionError):
        schneider_bound(PseudoCone.from_cuts(c, [c.dual_normals[0]], [-1.0]))


def test_harmonic_family_diverges_while_gamma_stays_bounded():
    # M(alpha) ~ 1/alpha: J_1 is harmonic, Gamma_eps is bounded
    fam = LayerFamily("1/k", "1")
    assert family_table(fam, "j", 1.0)["verdict"] == "diverging"
    assert family_table(fam, "gamma", 0.5)["verdict"] == "bounded"
    rep = convert(fam, 1.0, 0.5)
    assert rep["forward_holds"] and rep["converse_holds"] and not rep["forward_applies"]


def test_monotone_in_m_on_a_family():
    fam = LayerFamily("1/k", "1/k")
    small = family_table(fam, "j", 0.5)["verdict"]
    large = family_table(fam, "j", 2.0)["verdict"]
    assert not (small == "bounded" and large == "diverging")


def test_convert_on_finite_measure_is_vacuous():
    rep = convert(LayerProfile.from_layers([0.2, 0.4], [1.0, 3.0]), 1.0, 0.1)
    assert rep["vacuous"] and rep["forward_holds"]
    assert rep["c0"] == pytest.approx(max(0.4 * 3.0, 0.2 * 4.0))


def test_schneider_family_rows():
    fam = TailFamily("beta0 - 1/k**2", "1", math.pi / 4, start=2)
    rep = schneider_family(fam, 2, depths=(10, 100, 1000))
    assert [r["depth"] for r in rep["rows"]] == [10, 100, 1000]
    sups = [r["sup"] for r in rep["rows"]]
    assert sups == sorted(sups)


def test_profile_csv():
    text = LayerProfile.from_layers([0.2, 0.4], [1.0, 3.0]).to_csv().splitlines()
    assert text[0] == "delta,cumulative_mass" and len(text) == 3
