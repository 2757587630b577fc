"""Acceptance criteria 1-11.

Each test prints exactly one ``PASS``/``FAIL`` line with the measured value
and the tolerance it was held to, then asserts.  Run directly with
``python3 tests/test_acceptance.py`` for the summary lines alone.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from conemink import zoo3d
from conemink.functionals import LayerProfile, gamma_functional, schneider_bound
from conemink.ma import SolverOptions, blaschke_sum, domain_from_polygon, solve, solve_dirichlet, solve_dominated
from conemink.mink2d import AngularMeasure, necessity_check, solve2d
from conemink.pseudocone import hausdorff_truncated, minkowski_sum, support_many
from conemink.sam import surface_measure
from conemink.verify import (random_angular_measure, random_cone_3d, random_pseudocone_3d, run_suite,
                             suite_roundtrip2d)


def report(capsys, number: int, passed: bool, detail: str) -> None:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


def _all(rows):
    return all(r["passed"] for r in rows)


# ---------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    rows = suite_roundtrip2d(seed=1, count=200)
    elapsed = time.perf_counter() - t0
    worst = max(r["value"] for r in rows)
    rng = np.random.default_rng(2)
    same = True
    for _ in range(20):
        mu = random_angular_measure(rng)
        perm = rng.permutation(len(mu))
        k1 = solve2d(mu)
        k2 = solve2d(AngularMeasure.from_atoms(mu.beta0, list(zip(mu.thetas[perm], mu.weights[perm]))))
        same &= np.array_equal(k1.normals, k2.normals) and list(k1.offsets) == list(k2.offsets)
    ok = _all(rows) and same and elapsed <= 5.0
    return ok, (f"max rel error {worst:.2e} (tol 1e-12), permutation invariant {same}, "
                f"runtime {elapsed:.2f} s (limit 5 s)")


def criterion_2():
    rows = run_suite("necessity2d", seed=3, count=200)
    worst = min(r["value"] for r in rows)
    rep = necessity_check(solve2d(AngularMeasure.from_atoms(math.pi / 4, [(0.0, 2.0)])))
    # the projected length of the upper boundary part meets the distance bound 1/sqrt(2)
    eq = max(abs(rep[side]["P"] - rep[side]["dist"]) for side in ("upper", "lower"))
    eq = max(eq, abs(rep["upper"]["P"] - 1 / math.sqrt(2)))
    ok = _all(rows) and eq <= 1e-12
    return ok, f"min slack {worst:.2e} (tol -1e-12), single-atom equality gap {eq:.2e} (tol 1e-12)"


def criterion_3():
    rows = run_suite("fubini", seed=4, count=100)
    worst = max(r["value"] for r in rows)
    return _all(rows), f"max layer-cake vs closed form difference {worst:.2e} (tol 1e-12)"


def criterion_4():
    square = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    f = solve_dirichlet(np.zeros((1, 2)), [2.0], domain_from_polygon(square), SolverOptions(tol=1e-12))
    fixed = abs(float(f.values[0]) + 1.0)
    rows = run_suite("ma-roundtrip", seed=5, count=50)
    worst = max(r["value"] for r in rows)
    mass = max(r["mass_error"] for r in rows)
    its = max(r["iterations"] for r in rows)
    ok = fixed <= 1e-9 and _all(rows)
    return ok, (f"|u0 + 1| = {fixed:.2e} (tol 1e-9), roundtrip value error {worst:.2e} (tol 1e-6), "
                f"mass error {mass:.2e} (tol 1e-9), max iterations {its}")


def criterion_5():
    rows = run_suite("pullback", seed=6, count=20)
    worst = max(r["value"] for r in rows)
    return _all(rows), f"max relative error {worst:.2e} over {len(rows)} sets (tol 1e-8)"


def criterion_6():
    rng = np.random.default_rng(7)
    worst_dh, worst_gap, contains = 0.0, math.inf, True
    for _ in range(5):
        L = random_pseudocone_3d(rng)
        S = surface_measure(L)
        K, rep = solve_dominated(S, L)
        heights = rep["heights"]
        worst_dh = max(worst_dh, max(hausdorff_truncated(K, L, h) for h in heights))
        K2, rep2 = solve_dominated(S.scaled(0.5), L)
        worst_gap = min(worst_gap, float(np.min(support_many(K2, S.directions) - support_many(L, S.directions))))
        contains &= all(e["contains_L"] for e in rep2["levels"])
    ok = worst_dh <= 1e-8 and worst_gap >= -1e-12 and contains
    return ok, (f"max d_H(K, L) {worst_dh:.2e} (tol 1e-8), min h_K - h_L at atoms for half mass "
                f"{worst_gap:.3f} (must be >= 0), every iterate contains L {contains}")


def criterion_7():
    rng = np.random.default_rng(8)
    err2 = 0.0
    for _ in range(20):
        b0 = float(rng.choice([math.pi / 6, math.pi / 4, 1.2]))
        K = solve2d(random_angular_measure(rng, beta0=b0))
        L = solve2d(random_angular_measure(rng, beta0=b0))
        Q, _ = blaschke_sum(K, L)
        mu = surface_measure(K) + surface_measure(L)
        Q2, _ = solve(mu)
        h1, h2 = support_many(Q, mu.directions), support_many(Q2, mu.directions)
        err2 = max(err2, float(np.max(np.abs(h1 - h2) / np.maximum(1.0, np.abs(h1)))))
    err3 = 0.0
    for _ in range(5):
        cone = random_cone_3d(rng)
        K = random_pseudocone_3d(rng, cuts=3, cone=cone)
        L = random_pseudocone_3d(rng, cuts=3, cone=cone)
        Q, _ = blaschke_sum(K, L)
        target, got = surface_measure(K) + surface_measure(L), surface_measure(Q)
        idx = target.match(got, 1e-7)
        if None in idx or len(got) != len(target):
            err3 = math.inf
            break
        err3 = max(err3, float(np.max(np.abs(got.weights[idx] - target.weights) / target.weights)))
    sup_gap = math.inf
    for _ in range(20):
        cone = random_cone_3d(rng)
        K, L = random_pseudocone_3d(rng, cone=cone), random_pseudocone_3d(rng, cone=cone)
        total = surface_measure(K) + surface_measure(L)
        both = surface_measure(minkowski_sum(K, L))
        idx = total.match(both, 1e-9)
        if None in idx:
            sup_gap = -math.inf
            break
        sup_gap = min(sup_gap, float(np.min((both.weights[idx] - total.weights) / total.weights)))
    ok = err2 <= 1e-12 and err3 <= 1e-6 and sup_gap >= -1e-9
    return ok, (f"2D merge vs solver {err2:.2e} (tol 1e-12), 3D atomwise {err3:.2e} (tol 1e-6), "
                f"min relative superadditivity gap {sup_gap:.2e} on 20 pairs (must be >= -1e-9)")


def criterion_8():
    exact = zoo3d.a_set_mass(math.pi / 4, 1.0) == math.pi
    order = zoo3d.polygonal_convergence(math.pi / 8)["order"]
    worst = 0.0
    for alpha in (0.1, 0.4, math.pi / 4):
        for m in (-0.5, 0.5, 2.0):
            a = zoo3d.ASet(alpha)
            want = a.mass * alpha ** (m + 1) / (m + 1)
            worst = max(worst, abs(gamma_functional(a.measure_profile(), m) - want) / want)
    ok = exact and abs(order - 2.0) <= 0.3 and worst <= 1e-12
    return ok, f"a_set_mass == pi {exact}, polygonal order {order:.3f} (2 +- 0.3), Gamma error {worst:.2e} (tol 1e-12)"


def criterion_9():
    t0 = time.perf_counter()
    sups, gammas, certified = [], [], []
    for depth in range(1, 6):
        _, rep = zoo3d.layered_set(depth, m=0.5)
        prof: LayerProfile = rep["_profile"]
        sups.append(schneider_bound((prof, 3))["sup"])
        gammas.append(rep["cumulative_gamma"])
        certified.append(sum(r["certified"] for r in rep["layers"]))
    elapsed = time.perf_counter() - t0
    ratios = [b / a for a, b in zip(sups, sups[1:])]
    growth = [b - a for a, b in zip(gammas, gammas[1:])]
    per_layer = all(g >= c for g, c in zip(gammas, certified))
    ok = (max(ratios) <= 1.1 and min(growth) >= 1.0 and per_layer and certified[-1] == 6 and elapsed <= 60)
    return ok, (f"max sup ratio {max(ratios):.4f} (limit 1.1), min Gamma growth per depth {min(growth):.3f} "
                f"(>= 1), Gamma at depth 5 {gammas[-1]:.3f} with {certified[-1]} certified layers, "
                f"runtime {elapsed:.1f} s (limit 60 s)")


def criterion_10():
    mu, rep = zoo3d.divergent_measure(10, m=2.0)
    certs = all(t["gamma"] < 2.0 ** -t["i"] for t in rep["terms"])
    radii = [t["excluded_radius"] for t in rep["terms"]]
    mono = all(b > a for a, b in zip(radii, radii[1:]))
    total = gamma_functional(mu, rep["m_prime"])
    ok = certs and mono and total <= 1.0 and len(rep["terms"]) == 10
    return ok, f"10 term certificates {certs}, radii monotone {mono}, total Gamma {total:.4f} (<= 1)"


def criterion_11():
    rows = run_suite("hausdorff", seed=9, count=100)
    slack = min(r["value"] for r in rows)
    bad = sum(not r["passed"] for r in rows)
    return bad == 0, f"{bad} violations in {len(rows)} nested pairs, min slack {slack:.3e}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number - 1]()
    report(capsys, number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for i, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        report(None, i, ok, detail)
        failures += not ok
    raise SystemExit(1 if failures else 0)
