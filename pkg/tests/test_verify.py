"Tests for the verify module."

import pytest # type: ignore
from sympy.polys.domains import QQ # type: ignore

from qeslab.error import Error
from qeslab.models import EuclidParams, SphereParams
from qeslab.verify import (
    ConformanceItem,
    Status,
    SuiteOptions,
    contraction_probes,
    exit_status,
    run_suite,
    show,
)

def _statuses(items):
    return {item.id: item.status for item in items}

def test_unknown_suite():
    "Test an unknown selector."
    with pytest.raises(Error):
        run_suite("everything", SuiteOptions())

@pytest.mark.parametrize("statuses,expected", [
    ([], 0),
    ([Status.PASS, Status.DEVIATION], 0),
    ([Status.PASS, Status.INCONCLUSIVE], 1),
])
def test_exit_status(statuses, expected):
    "Test only inconclusive items fail the run."
    items = [ConformanceItem(f"ID-{i}", "anchor", s, "0") for (i, s) in enumerate(statuses)]
    assert exit_status(items) == expected

@pytest.mark.parametrize("value,expected", [
    (QQ(-3, 4), "-3/4"),
    (3, "3"),
    ([QQ(1, 2), "x"], "[1/2, x]"),
])
def test_show(value, expected):
    "Test deterministic text of exact values."
    assert show(value) == expected

def test_integrals_suite():
    "Test the commutation identities hold and the printed I_i deviates."
    statuses = _statuses(run_suite("integrals", SuiteOptions(n=2, draws=2)))
    for suffix in ("HES-IIJ", "HES-II", "HQES-IIJ", "HQES-II-NONZERO", "DECOMP", "LCHAIN",
                   "INDEPENDENT"):
        assert statuses[f"INT-N2-{suffix}"] is Status.PASS, suffix
    assert statuses["INT-N2-II-PRINTED"] is Status.DEVIATION

def test_integrals_suite_n1():
    "Test there are no integrals on the circle."
    assert not run_suite("integrals", SuiteOptions(n=1, draws=1))

def test_suite_deterministic():
    "Test equal seeds give equal items."
    opts = SuiteOptions(n=2, draws=2, seed=7)
    assert run_suite("integrals", opts) == run_suite("integrals", opts)

def test_closedforms_suite():
    "Test the exactly solvable law holds and the printed n=2, k=1 pair deviates."
    items = run_suite("closedforms", SuiteOptions(n=2, k=1))
    statuses = _statuses(items)
    assert statuses["EQ-HAM-E-N2-K1"] is Status.PASS
    assert statuses["SPECTRUM-PERMUTATION-N2-K1"] is Status.PASS
    assert statuses["S34-N2-K1-EPM"] is Status.DEVIATION
    pair = [item for item in items if item.id == "S34-N2-K1-EPM"][0]
    assert "discriminant match" in pair.residual
    assert "center derived -3/4, printed 3/4" in pair.residual

def test_closedforms_suite_n1():
    "Test the printed circle spectrum and eigenfunctions hold."
    statuses = _statuses(run_suite("closedforms", SuiteOptions(n=1, k=1)))
    assert statuses["S34-N1-K1-EPM"] is Status.PASS
    assert statuses["S34-N1-K1-PHI"] is Status.PASS

def test_contraction_suite():
    "Test the ε → 0 limit reproduces the Euclidean matrix."
    p = EuclidParams.make(1, ["1/3"], 2, "1/5", 1)
    statuses = _statuses(run_suite("contraction", SuiteOptions(n=1, k=1, euclid=p)))
    assert statuses["CONTRACTION-LIMIT-N1-K1"] is Status.PASS
    assert statuses["CONTRACTION-PRINTED-MAP-N1"] is Status.DEVIATION

@pytest.mark.parametrize("draws", [0, 2])
def test_gauge_suite(draws):
    "Test the Euclidean rotation yields the sextic potential with coefficient b^2/16."
    p = EuclidParams.make(1, ["1/3"], 2, "1/5", 1)
    items = run_suite("gauge", SuiteOptions(n=1, k=1, draws=draws, euclid=p))
    statuses = _statuses(items)
    assert Status.INCONCLUSIVE not in statuses.values()
    for item_id in ("GAUGE-EUCLID-FIRSTORDER-N1", "GAUGE-EUCLID-POTENTIAL-N1",
                    "GAUGE-EUCLID-SEXTIC-N1", "GAUGE-ROUNDTRIP-N1"):
        assert statuses[item_id] is Status.PASS, item_id
    sextic = [item for item in items if item.id == "GAUGE-EUCLID-SEXTIC-N1"][0]
    assert sextic.draws[0] == "n=1;k=1;gamma'=[1/3];omega=2;b=1/5"

@pytest.mark.parametrize("p", [
    SphereParams.make(2, [0, 0, 0], "1/2", 1),
    SphereParams.make(2, [0, 0, 0], "1/2", 2),
    SphereParams.make(3, [0, 0, 0, 0], "1/2", 1),
])
def test_separation_suite(p):
    "Test every separation chain is solved and the chains exhaust P_k."
    items = run_suite("radial", SuiteOptions(n=p.n, k=p.k, draws=1, sphere=p))
    statuses = _statuses(items)
    assert Status.INCONCLUSIVE not in statuses.values()
    assert statuses[f"SEP-COMPLETENESS-N{p.n}-K{p.k}"] is Status.PASS
    assert statuses[f"SEP-EXPONENT-N{p.n}"] is Status.PASS
    assert f"SEP-RADIAL-N{p.n}" in statuses

def test_inconclusive():
    "Test a failing check becomes an inconclusive item."
    items = run_suite("contraction", SuiteOptions(n=1, k=1, epsilons=(QQ(0),)))
    assert [item.status for item in items] == [Status.INCONCLUSIVE]
    assert items[0].id == "CONTRACTION-N1"
    assert exit_status(items) == 1

def test_contraction_probes():
    "Test one probe per ε against the same Euclidean matrix."
    p = EuclidParams.make(1, ["1/3"], 2, "1/5", 1)
    (_, probes) = contraction_probes(p, [QQ(1, 2), QQ(1, 4)])
    assert [probe.eps for probe in probes] == [QQ(1, 2), QQ(1, 4)]
    assert probes[0].euclid == probes[1].euclid
    with pytest.raises(Error):
        contraction_probes(p, [QQ(-1, 2)])

def test_geometry_suite():
    "Test the sphere metric determinant and curvature."
    statuses = _statuses(run_suite("geometry", SuiteOptions(n=2)))
    assert statuses["GEOM-DET-N2"] is Status.PASS
    assert statuses["GEOM-CURVATURE-N2"] is Status.PASS
    assert "APP-N2-FIRSTORDER" in statuses
