"Tests for the report module."

import json

import pytest # type: ignore
from sympy.polys.domains import QQ # type: ignore

from qeslab.error import Error
from qeslab.models import EuclidParams, SphereParams, build_L_chain, build_qes_sphere
from qeslab.report import (
    contraction_document,
    dumps,
    items_document,
    spectrum_document,
    write,
)
from qeslab.repspace import joint_eigenbasis, matrix_rep, spectrum
from qeslab.verify import ConformanceItem, Status, contraction_probes

F1 = SphereParams.make(1, [0, 0], "-5/8", 1)
F2 = SphereParams.make(2, [0, 0, 0], "1/2", 1)

def test_spectrum_document():
    "Test exact eigenvalues by decreasing value."
    lines = spectrum(matrix_rep(build_qes_sphere(F1), 1, 1))
    document = spectrum_document(lines, {"n": 1})
    assert document["values"] == ["1/4", "-5/4"]
    assert [row["eigenvalue_approx"] for row in document["rows"]] == ["0.25", "-1.25"]
    assert all(row["exact"] for row in document["rows"])

def test_spectrum_document_joint():
    "Test joint rows carry the separation labels."
    lines = spectrum(matrix_rep(build_qes_sphere(F2), 2, 1))
    joint = joint_eigenbasis(build_L_chain(F2) + [build_qes_sphere(F2)], 2, 1)
    document = spectrum_document(lines, {"n": 2}, joint)
    assert document["values"] == ["-1/2", "-1", "-3/2"]
    assert [row["eigenvalue"] for row in document["rows"]] == ["-1/2", "-1", "-3/2"]
    assert all(len(row["labels"]) == 1 for row in document["rows"])

def test_items_document():
    "Test the status summary."
    items = [
        ConformanceItem("A", "first", Status.PASS, "0"),
        ConformanceItem("B", "second", Status.DEVIATION, "1/2", "x", ("n=1",)),
        ConformanceItem("C", "third", Status.PASS, "0"),
    ]
    document = items_document(items, {})
    assert document["summary"] == {"pass": 2, "deviation": 1}
    assert document["rows"][1] == {"anchor": "second", "corrected": "x", "draws": ["n=1"],
                                   "id": "B", "residual": "1/2", "status": "deviation"}

def test_contraction_document():
    "Test one row per ε with exact and approximate differences."
    p = EuclidParams.make(1, ["1/3"], 2, "1/5", 1)
    (_, probes) = contraction_probes(p, [QQ(1, 2), QQ(1, 4)])
    document = contraction_document(probes, [], True, {})
    assert [row["eps"] for row in document["rows"]] == ["1/2", "1/4"]
    assert [row["order_approx"] for row in document["rows"]] == ["", ""]
    assert len(document["euclid_matrix"]) == 2
    assert document["limit_matches"]

def test_dumps_json():
    "Test sorted, indented JSON."
    text = dumps({"rows": [], "b": 1, "a": [True]}, "json")
    assert text.endswith("}\n")
    assert json.loads(text) == {"a": [True], "b": 1, "rows": []}
    assert text.index('"a"') < text.index('"b"')

def test_dumps_csv():
    "Test CSV rows with sorted columns, joined lists and lowercase booleans."
    document = {"rows": [
        {"value": "1/4", "labels": ["0", "-1"], "exact": True},
        {"value": "-5/4", "labels": [], "exact": False},
    ]}
    assert dumps(document, "csv") == ("exact,labels,value\n"
                                      "true,0 | -1,1/4\n"
                                      "false,,-5/4\n")

def test_dumps_error():
    "Test an unknown format."
    with pytest.raises(Error):
        dumps({"rows": []}, "xml")

def test_write(tmp_path, capsys):
    "Test writing to a file and to stdout."
    path = tmp_path / "report.csv"
    write({"rows": [{"a": 1}]}, "csv", path)
    assert path.read_text(encoding="utf-8") == "a\n1\n"
    write({"rows": [{"a": 1}]}, "csv")
    assert capsys.readouterr().out == "a\n1\n"
    with pytest.raises(Error):
        write({"rows": []}, "json", tmp_path / "missing" / "report.json")
