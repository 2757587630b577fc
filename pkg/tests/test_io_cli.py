import json
import math
from fractions import Fraction

import numpy as np
import pytest

from conemink import io
from conemink.cli import main
from conemink.cone import Cone
from conemink.families import LayerFamily, TailFamily
from conemink.mink2d import AngularMeasure, solve2d
from conemink.pseudocone import support_many
from conemink.sam import DiscreteMeasure, surface_measure
from conemink.verify import random_pseudocone_3d


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def planar_measure_doc(atoms, beta0=math.pi / 4):
    return {"schema": "measure", "version": 1, "cone": {"kind": "planar", "beta0": beta0},
            "atoms": [{"theta": t, "weight": w} for t, w in atoms]}


# ---------------------------------------------------------------------------
# documents


def test_planar_pseudocone_roundtrip_is_exact():
    k = solve2d(AngularMeasure.from_atoms(0.9, [(-0.4, 1.3), (0.1, 0.7), (0.6, 2.2)]))
    back = io.pseudocone_from_json(json.loads(io.dumps(io.pseudocone_to_json(k))))
    assert back.cone.beta0 == 0.9
    assert list(back.offsets) == list(k.offsets)
    assert all(isinstance(h, Fraction) for h in back.offsets)


def test_rays_cone_pseudocone_roundtrip():
    rng = np.random.default_rng(0)
    k = random_pseudocone_3d(rng)
    back = io.pseudocone_from_json(json.loads(io.dumps(io.pseudocone_to_json(k))))
    v = surface_measure(k).directions
    np.testing.assert_allclose(support_many(back, v), support_many(k, v), atol=1e-12)


def test_measure_roundtrip_with_rotated_axis():
    c = Cone.circular(math.pi / 4, axis=[0.0, 1.0, 0.0])
    mu = DiscreteMeasure.from_atoms(c, [[1.0, 0.2, 0.1], [1.0, -0.3, 0.0]], [1.0, 2.0])
    back = io.measure_from_json(json.loads(io.dumps(io.measure_to_json(mu))))
    np.testing.assert_allclose(back.directions, mu.directions, atol=1e-15)
    np.testing.assert_array_equal(back.weights, mu.weights)


def test_exact_deltas_are_written():
    mu = DiscreteMeasure.from_atoms(Cone.circular(), [[1.0, 0.0, 0.0]], [1.0], deltas=[1e-25])
    back = io.measure_from_json(io.measure_to_json(mu))
    assert back.exact_deltas.tolist() == [1e-25]


def test_family_roundtrip():
    for fam in (TailFamily("beta0 - 1/k", "k", 0.7, start=2), LayerFamily("1/k", "2**-k")):
        back = io.family_from_json(io.family_to_json(fam))
        assert back.to_dict() == fam.to_dict()


@pytest.mark.parametrize("doc, where", [
    ({"version": 1}, "$"),
    ({"schema": "measure", "version": 7, "cone": {}, "atoms": []}, "$.version"),
    ({"schema": "measure", "version": 1, "cone": {"kind": "moebius"}, "atoms": []}, "$.cone.kind"),
    ({"schema": "measure", "version": 1, "cone": {"kind": "planar", "beta0": 0.5},
      "atoms": [{"direction": [1.0, 0.0, 0.0], "weight": 1.0}]}, "$.atoms[0].direction"),
    ({"schema": "measure", "version": 1, "cone": {"kind": "planar", "beta0": 0.5},
      "atoms": [{"theta": 0.1, "weight": "heavy"}]}, "$.atoms[0].weight"),
])
def test_malformed_documents_name_the_location(doc, where):
    with pytest.raises(io.InputError) as info:
        io.measure_from_json(doc)
    assert info.value.location == where


def test_family_expressions_are_sandboxed():
    with pytest.raises(io.InputError):
        io.family_from_json({"schema": "family", "version": 1, "kind": "tail",
                             "theta": "__import__('os').getcwd()", "w": "1", "beta0": 0.5})


def test_syntax_error_reports_line_and_column(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "schema": "measure",\n  oops\n}')
    with pytest.raises(io.InputError) as info:
        io.load_json(p)
    assert ":3:" in info.value.location


def test_obj_export_planar_and_3d():
    k2 = solve2d(AngularMeasure.from_atoms(math.pi / 4, [(0.0, 2.0)]))
    text = io.export_obj(k2, 3.0)
    assert text.count("\nv ") >= 4 and "\nl " in text
    k3 = random_pseudocone_3d(np.random.default_rng(1))
    text = io.export_obj(k3, 5.0)
    assert "\nf " in text


# ---------------------------------------------------------------------------
# command line


def test_solve2d_command(tmp_path, capsys):
    m = write(tmp_path / "m.json", planar_measure_doc([(0.0, 2.0)]))
    out = tmp_path / "k.json"
    assert main(["solve2d", "--measure", m, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == "pseudocone"
    assert doc["report"]["atomwise_residual"] <= 1e-12
    assert len(doc["report"]["config_hash"]) == 16
    assert Fraction(doc["cuts"][0]["offset_exact"]) == pytest.approx(-1.0, abs=1e-15)


def test_outputs_are_deterministic(tmp_path):
    m = write(tmp_path / "m.json", planar_measure_doc([(-0.2, 1.0), (0.5, 3.0)]))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve2d", "--measure", m, "--out", str(a)]) == 0
    assert main(["solve2d", "--measure", m, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_hash_tracks_input_bytes(tmp_path):
    m1 = write(tmp_path / "m1.json", planar_measure_doc([(0.0, 1.0)]))
    m2 = write(tmp_path / "m2.json", planar_measure_doc([(0.0, 1.5)]))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["solve2d", "--measure", m1, "--out", str(a)])
    main(["solve2d", "--measure", m2, "--out", str(b)])
    assert json.loads(a.read_text())["report"]["config_hash"] != json.loads(b.read_text())["report"]["config_hash"]


def test_malformed_input_exits_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["solve2d", "--measure", str(p)]) == 1
    assert "bad.json:1:" in capsys.readouterr().err
    assert main(["solve2d", "--measure", str(tmp_path / "missing.json")]) == 1


def test_precondition_exits_2_and_names_hypothesis(tmp_path, capsys):
    rng = np.random.default_rng(2)
    L = random_pseudocone_3d(rng, cuts=3)
    bound = write(tmp_path / "L.json", io.pseudocone_to_json(L))
    big = write(tmp_path / "mu.json", io.measure_to_json(surface_measure(L).scaled(2.0)))
    assert main(["dominated", "--measure", big, "--bound", bound]) == 2
    err = capsys.readouterr().err
    assert "hypothesis failed at atom" in err and "mu <= S_L" in err


def test_non_convergence_exits_3(tmp_path):
    c = Cone.circular()
    mu = DiscreteMeasure.from_atoms(c, [[1.0, 0.1, 0.0], [1.0, -0.1, 0.2], [1.0, 0.0, -0.3]], [1.0, 2.0, 1.5])
    m = write(tmp_path / "mu.json", io.measure_to_json(mu))
    assert main(["solve", "--measure", m, "--q", "16", "--max-iter", "1", "--tol", "1e-15"]) == 3


def test_solve_and_measure_commands(tmp_path):
    c = Cone.circular()
    mu = DiscreteMeasure.from_atoms(c, [[1.0, 0.1, 0.0], [1.0, -0.1, 0.2]], [1.0, 2.0])
    m = write(tmp_path / "mu.json", io.measure_to_json(mu))
    k = tmp_path / "k.json"
    assert main(["solve", "--measure", m, "--q", "32", "--out", str(k)]) == 0
    assert json.loads(k.read_text())["report"]["atomwise_residual"] <= 1e-9
    s = tmp_path / "s.json"
    assert main(["measure", "--pseudocone", str(k), "--out", str(s)]) == 0
    back = io.measure_from_json(json.loads(s.read_text()))
    idx = mu.match(back, 1e-9)
    np.testing.assert_allclose(back.weights[idx], mu.weights, rtol=1e-8)


def test_blaschke_command_planar(tmp_path):
    c = Cone.planar(math.pi / 4)
    from conemink.pseudocone import PseudoCone
    a = write(tmp_path / "a.json", io.pseudocone_to_json(PseudoCone.from_cuts(c, [[1.0, 0.0]], [-1.0])))
    b = write(tmp_path / "b.json", io.pseudocone_to_json(PseudoCone.from_cuts(c, [[1.0, 0.0]], [-1.5])))
    out = tmp_path / "q.json"
    assert main(["blaschke", "--first", a, "--second", b, "--out", str(out)]) == 0
    q = io.pseudocone_from_json(json.loads(out.read_text()))
    assert surface_measure(q).weights.tolist() == [5.0]


def test_check_family_table_and_refusal(tmp_path, capsys):
    fam = write(tmp_path / "f.json", {"schema": "family", "version": 1, "kind": "tail",
                                       "theta": "beta0 - 1/k", "w": "k", "beta0": 0.7, "start": 2})
    out = tmp_path / "t.csv"
    assert main(["check", "--functional", "j", "--m", "1", "--family", fam, "--out", str(out)]) == 0
    assert out.read_text().startswith("# config_hash ")
    assert main(["check", "--functional", "approximate", "--family", fam]) == 2


def test_zoo_and_verify_commands(tmp_path):
    out = tmp_path / "z.json"
    assert main(["zoo", "--kind", "a_set", "--alpha", str(math.pi / 4), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["mass"] == math.pi
    meas = tmp_path / "d.json"
    assert main(["zoo", "--kind", "divergent", "--depth", "2", "--out", str(out),
                 "--measure-out", str(meas)]) == 0
    assert json.loads(out.read_text())["total_within_budget"]
    assert len(io.measure_from_json(json.loads(meas.read_text()))) == 2
    v = tmp_path / "v.csv"
    assert main(["verify", "--suite", "fubini", "--count", "5", "--out", str(v)]) == 0
    assert "5/5 passed" in v.read_text()


def test_zoo_scenario_file(tmp_path):
    sc = write(tmp_path / "s.json", {"schema": "zoo", "version": 1, "kind": "layered", "depth": 1, "q": 32})
    out = tmp_path / "z.json"
    assert main(["zoo", "--scenario", sc, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["layers"][1]["certified"]


def test_export_command(tmp_path):
    k = solve2d(AngularMeasure.from_atoms(math.pi / 4, [(0.0, 2.0)]))
    p = write(tmp_path / "k.json", io.pseudocone_to_json(k))
    out = tmp_path / "k.obj"
    assert main(["export", "--pseudocone", p, "--height", "3", "--out", str(out)]) == 0
    assert out.read_text().startswith("# truncation")


def test_thread_count_does_not_change_results(monkeypatch):
    from conemink.verify import suite_pullback
    monkeypatch.setenv("CONEMINK_THREADS", "1")
    one = suite_pullback(seed=3, count=4)
    monkeypatch.setenv("CONEMINK_THREADS", "4")
    four = suite_pullback(seed=3, count=4)
    assert one == four
