import json

import numpy as np
import pytest

from minionlab.cli import dumps, run
from minionlab.quantum import Certificate, QElement, SpaceConfig, sample_qelement
from minionlab.structures import structure_from_dict, structure_to_dict, zoo_ref


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def call_json(capsys, *argv):
    code, out, _ = call(capsys, *argv)
    return code, json.loads(out)


def test_classify_graph_example(capsys):
    code, doc = call_json(capsys, "classify", "--graph", "zoo:C5", "--dim", "3")
    assert code == 0 and doc["verdict"] == "advantage"


def test_consistency_example(capsys):
    code, doc = call_json(capsys, "consistency", "--k", "2", "zoo:C5", "zoo:K2")
    assert code == 1 and doc["status"] == "inconsistent"


def test_qcert_verify_q1_violation(capsys, tmp_path):
    code, doc = call_json(capsys, "qcert", "from-hom", "zoo:K2", "zoo:K2", "--map", "0,1", "--dim", "2")
    assert code == 0
    for key in doc["matrices"]:
        doc["matrices"][key] = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, rep = call_json(capsys, "qcert", "verify", str(bad))
    assert code == 1
    assert "Q1" in rep["failed_conditions"] and rep["residuals"]["Q1"] == pytest.approx(1.0)


def test_qcert_round_trip(capsys, tmp_path):
    code, doc = call_json(capsys, "qcert", "from-hom", "zoo:C5", "zoo:K3", "--dim", "3")
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    assert call(capsys, "qcert", "verify", str(path))[0] == 0
    code, rep = call_json(capsys, "qcert", "roundtrip", str(path))
    assert code == 0 and rep["max_projector_distance"] <= 1e-8
    code, _ = call_json(capsys, "qcert", "from-hom", "zoo:C5", "zoo:K2")
    assert code == 1


@pytest.mark.parametrize("argv,code", [
    (["hom", "zoo:C5", "zoo:K3"], 0),
    (["hom", "zoo:C5", "zoo:K2"], 1),
    (["relax", "clp", "zoo:C3", "zoo:K2"], 1),
    (["relax", "clp", "zoo:C6", "zoo:K2"], 0),
    (["relax", "sdp", "zoo:K3", "zoo:K2"], 1),
    (["relax", "sdp", "zoo:P3", "zoo:K2"], 0),
    (["classify", "--pair", "zoo:K3", "zoo:K5", "--dim", "3"], 2),
    (["classify", "--pair", "zoo:Z", "zoo:Z'", "--dim", "3"], 1),
    (["dictator-search", "zoo:K2", "--L", "3"], 1),
    (["dictator-search", "zoo:K3", "--L", "2"], 0),
    (["poly", "zoo:K2", "--ell", "3", "--count-only"], 0),
    (["power", "zoo:K2", "--ell", "2"], 0),
    (["zoo", "C5"], 0),
    (["zoo", "cycle", "6"], 0),
    (["hopf", "--vector", "1,0,0,0"], 0),
    (["hopf", "--vector", "0,0,1,0"], 1),
    (["minion", "check", "skeletal", "--samples", "50"], 0),
    (["minion", "map-check", "xi-c", "--samples", "50"], 0),
    (["minion", "map-check", "dictator-into-sdp", "--samples", "50"], 0),
])
def test_exit_codes(capsys, argv, code):
    assert call(capsys, *argv)[0] == code


def test_errors(capsys, tmp_path):
    assert call(capsys, "hom", "zoo:Q9", "zoo:K2")[0] == 3
    assert call(capsys, "hom", str(tmp_path / "missing.json"), "zoo:K2")[0] == 3
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert call(capsys, "qcert", "verify", str(broken))[0] == 3
    assert call(capsys, "hom", "zoo:K3")[0] == 4
    assert call(capsys, "hom", "zoo:K3", "zoo:K3", "--frobnicate")[0] == 4
    assert call(capsys, "frobnicate")[0] == 4
    assert call(capsys, "hom", "zoo:K3", "zoo:K3", "--tol", "-1")[0] == 4
    assert call(capsys, "classify", "--dim", "3")[0] == 4
    assert call(capsys, "hom", "zoo:K3", "zoo:Z")[0] == 3


def test_structure_files(capsys, tmp_path):
    code, doc = call_json(capsys, "zoo", "C5")
    path = tmp_path / "c5.json"
    path.write_text(json.dumps(doc))
    code, res = call_json(capsys, "hom", str(path), "zoo:K3")
    assert code == 0 and len(res["map"]) == 5


def test_xi_and_freetest(capsys, tmp_path):
    q = sample_qelement(np.random.default_rng(1), SpaceConfig("complex", 2), 3)
    path = tmp_path / "q.json"
    path.write_text(json.dumps(q.to_doc()))
    code, d = call_json(capsys, "xi", "d", str(path))
    assert code == 0 and d["kind"] == "dictator"
    code, s = call_json(capsys, "xi", "s", str(path))
    assert s["kind"] == "matrix"
    code, c = call_json(capsys, "xi", "c", str(path))
    assert c["kind"] == "skeletal"
    M1 = QElement(SpaceConfig("complex", 2), [np.eye(2)[:, :1], np.eye(2)[:, 1:]])
    M2 = QElement(SpaceConfig("complex", 2), [np.eye(2)[:, 1:], np.eye(2)[:, :1]])
    ft = tmp_path / "ft.json"
    ft.write_text(json.dumps({"Y": "zoo:K2", "relation": "E", "elements": [M1.to_doc(), M2.to_doc()]}))
    code, rep = call_json(capsys, "freetest", str(ft))
    assert code == 0 and rep["status"] == "member"
    ft.write_text(json.dumps({"Y": "zoo:K2", "relation": "E", "elements": [M1.to_doc(), M1.to_doc()]}))
    assert call(capsys, "freetest", str(ft))[0] == 1


def test_identical_invocations_are_byte_identical(capsys):
    for argv in (["minion", "check", "sdp-complex", "--samples", "40", "--seed", "7"],
                 ["relax", "sdp", "zoo:C5", "zoo:K3", "--witness"],
                 ["relax", "clp", "zoo:C5", "zoo:K2", "--order-seed", "3"],
                 ["dictator-search", "zoo:K2", "--L", "3"]):
        first = call(capsys, *argv)
        second = call(capsys, *argv)
        assert first == second


def test_env_seed_fallback(capsys, monkeypatch):
    argv = ["minion", "check", "quantum", "--samples", "20"]
    explicit = call(capsys, *argv, "--seed", "5")
    monkeypatch.setenv("MINIONLAB_SEED", "5")
    assert call(capsys, *argv) == explicit
    monkeypatch.setenv("MINIONLAB_SEED", "6")
    assert call(capsys, *argv)[1] != explicit[1]


def test_text_format(capsys):
    code, out, _ = call(capsys, "hom", "zoo:C5", "zoo:K3", "--format", "text")
    assert code == 0
    assert 'status: "found"' in out


def test_float_formatting():
    assert dumps(0.1) == "0.10000000000000001"
    assert dumps([1.0, float("nan")]) == "[1, null]"
    assert json.loads(dumps({"a": [0.1, 2], "b": {"c": 1e-300}})) == {"a": [0.1, 2], "b": {"c": 1e-300}}


def test_inputs_round_trip_through_serialiser(capsys):
    # parse -> serialise -> parse is the identity on certificates, structures and elements
    code, doc = call_json(capsys, "qcert", "from-hom", "zoo:P4", "zoo:K2", "--dim", "2")
    cert = Certificate.from_doc(doc, resolve=structure_from_dict)
    assert json.loads(dumps(cert.to_doc())) == doc
    for name in ("C5", "Z", "Z'"):
        d = structure_to_dict(zoo_ref(name))
        assert structure_to_dict(structure_from_dict(json.loads(dumps(d)))) == d
    q = sample_qelement(np.random.default_rng(3), SpaceConfig("complex", 3), 4)
    qd = json.loads(dumps(q.to_doc()))
    assert json.loads(dumps(QElement.from_doc(qd).to_doc())) == qd
