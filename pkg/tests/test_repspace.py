"Tests for the repspace module."

import pytest # type: ignore
from sympy.polys.domains import QQ # type: ignore

from qeslab.diffop import apply, gl_generator
from qeslab.error import DomainError, Error
from qeslab.exactalg import charpoly, coordinate_field, poly_ring
from qeslab.models import SphereParams, build_L_chain, build_es_sphere, build_qes_sphere
from qeslab.repspace import (
    basis,
    closed_form_catalog,
    dimension,
    es_catalog,
    joint_eigenbasis,
    label_count,
    matrix_rep,
    phi_coefficient_residual,
    printed_dimension,
    spectrum,
)

# One-dimensional sphere, γ = (0, 0), a = -5/8, k = 1.
F1 = SphereParams.make(1, [0, 0], "-5/8", 1)
# Two-dimensional sphere, γ = (0, 0, 0), a = 1/2, k = 1.
F2 = SphereParams.make(2, [0, 0, 0], "1/2", 1)

@pytest.mark.parametrize("n,k,expected", [
    (3, 2, 10),
    (2, 2, 6),
    (1, 2, 3),
    (3, 1, 4),
    (2, 0, 1),
])
def test_dimension(n, k, expected):
    "Test dim P_k = C(n+k, n) and the basis size."
    assert dimension(n, k) == expected
    assert basis(n, k).size == expected

def test_printed_dimension():
    "Test the printed count leaves out the constants."
    assert printed_dimension(3, 2) == 9
    assert printed_dimension(2, 1) == 2

def test_basis_order():
    "Test ascending graded-lex order."
    assert basis(1, 2).monomials == ((0,), (1,), (2,))
    assert basis(2, 1).monomials == ((0, 0), (0, 1), (1, 0))
    with pytest.raises(Error):
        basis(0, 1)

def test_basis_coordinates():
    "Test coordinates of polynomials in the basis."
    b = basis(2, 1)
    (x1, x2) = poly_ring(2).gens
    assert b.coordinates(x1 * 3 + 1) == [1, 0, 3]
    assert b.polynomial([1, 0, 3]) == x1 * 3 + 1
    with pytest.raises(DomainError):
        b.coordinates(x1 * x2)

def test_matrix_f1():
    "Test the matrix of the degree-one block on the circle."
    rep = matrix_rep(build_qes_sphere(F1), 1, 1)
    assert rep.invariant
    assert rep.matrix.to_list() == [[0, QQ(1, 2)], [QQ(5, 8), -1]]

def test_spectrum_f1():
    "Test the circle energies 1/4 and -5/4."
    lines = spectrum(matrix_rep(build_qes_sphere(F1), 1, 1))
    assert [line.eigenvalue.value for line in lines] == [QQ(1, 4), QQ(-5, 4)]
    assert [line.multiplicity for line in lines] == [1, 1]

def test_spectrum_f2():
    "Test the two-sphere energies -1/2, -1 and -3/2."
    lines = spectrum(matrix_rep(build_qes_sphere(F2), 2, 1))
    assert [line.eigenvalue.value for line in lines] == [QQ(-1, 2), -1, QQ(-3, 2)]

def test_spectrum_es():
    "Test the exactly solvable spectrum with multiplicities at a = 0."
    p = SphereParams.make(2, [0, 0, 0], 0, 2)
    lines = spectrum(matrix_rep(build_qes_sphere(p), 2, 2))
    assert [(line.eigenvalue.value, line.multiplicity) for line in lines] == [
        (0, 1), (QQ(-3, 2), 2), (-5, 3)]
    assert es_catalog(2, 2, QQ(0)) == [(0, 1), (QQ(-3, 2), 2), (-5, 3)]

@pytest.mark.parametrize("p", [
    SphereParams.make(1, ["1/3", "2/5"], 0, 3),
    SphereParams.make(2, ["1/3", "2/5", "-1/7"], 0, 2),
    SphereParams.make(3, ["1/3", "2/5", "-1/7", "3"], 0, 2),
])
def test_es_charpoly(p):
    "Test the exactly solvable characteristic polynomial against the energy law."
    rep = matrix_rep(build_es_sphere(p), p.n, p.k)
    expected = None
    for (value, mult) in es_catalog(p.n, p.k, p.G):
        factor = charpoly(rep.matrix).ring.gens[0] - value
        expected = factor ** mult if expected is None else expected * factor ** mult
    assert charpoly(rep.matrix) == expected

def test_non_invariant():
    "Test the QES operator leaves P_{k+1} but not P_k."
    op = build_qes_sphere(F2)
    assert not matrix_rep(op, 2, 2).invariant
    assert matrix_rep(op, 2, 2).overflow
    with pytest.raises(DomainError):
        spectrum(matrix_rep(op, 2, 2))

def test_matrix_rep_error():
    "Test operators that cannot be represented."
    op = build_qes_sphere(F2)
    with pytest.raises(Error):
        matrix_rep(op, 3, 1)
    field = coordinate_field(1, "x", ("a",))
    symbolic = SphereParams(1, (QQ(0), QQ(0)), field.gens[1], 1)
    with pytest.raises(Error):
        matrix_rep(build_qes_sphere(symbolic, field), 1, 1)

def test_joint_eigenbasis_f2():
    "Test joint eigenvalues of L_1 and h on the two-sphere block."
    ops = build_L_chain(F2) + [build_qes_sphere(F2)]
    joint = joint_eigenbasis(ops, 2, 1)
    assert sum(entry.multiplicity for entry in joint) == 3
    assert sorted(entry.energy.value for entry in joint) == [QQ(-3, 2), -1, QQ(-1, 2)]
    h = build_qes_sphere(F2)
    for entry in joint:
        assert not entry.defective
        for vector in entry.vectors:
            assert apply(h, vector) == vector * entry.energy.value

def test_joint_eigenbasis_commuting():
    "Test non-commuting operators are rejected."
    ops = [gl_generator("diag", (1, 2), None, 2), gl_generator("diag", (2, 1), None, 2)]
    with pytest.raises(Error):
        joint_eigenbasis(ops, 2, 1)
    with pytest.raises(Error):
        joint_eigenbasis([], 2, 1)

def test_catalog_f1():
    "Test the printed circle energies match the matrix exactly."
    (entry,) = closed_form_catalog(1, 1, F1)
    assert entry.id == "S34-N1-K1-EPM"
    assert entry.polynomial == charpoly(matrix_rep(build_qes_sphere(F1), 1, 1).matrix)
    assert entry.center == QQ(-1, 2)
    assert entry.discriminant == QQ(9, 4)

def test_catalog_f2():
    "Test the printed two-sphere center is off while the discriminant matches."
    entries = {entry.id: entry for entry in closed_form_catalog(2, 1, F2)}
    assert set(entries) == {"S34-N2-K1-Q1", "S34-N2-K1-EPM"}
    pair = entries["S34-N2-K1-EPM"]
    assert pair.center == QQ(3, 4)
    assert pair.discriminant == QQ(1, 4)
    # The matrix roots on this block are -1/2 and -1: center -3/4, same discriminant.
    lam = charpoly(matrix_rep(build_qes_sphere(F2), 2, 1).matrix).ring.gens[0]
    assert pair.polynomial != (lam + QQ(1, 2)) * (lam + 1)
    assert pair.polynomial == (lam - QQ(1, 2)) * (lam - 1)

def test_catalog_error():
    "Test there is no printed spectrum beyond n = 3, k = 2."
    with pytest.raises(DomainError):
        closed_form_catalog(4, 1, SphereParams.make(4))
    with pytest.raises(DomainError):
        closed_form_catalog(2, 3, SphereParams.make(2))

@pytest.mark.parametrize("n,s,expected", [
    (1, 0, 1),
    (2, 3, 1),
    (3, 2, 3),
    (4, 1, 3),
])
def test_label_count(n, s, expected):
    "Test the number of label tuples with a given sum."
    assert label_count(n, s) == expected

def test_phi_residual_f1():
    "Test the printed circle eigenfunctions are eigenvectors."
    rep = matrix_rep(build_qes_sphere(F1), 1, 1)
    assert not phi_coefficient_residual(rep, F1)
    with pytest.raises(DomainError):
        phi_coefficient_residual(matrix_rep(build_qes_sphere(F2), 2, 1), F2)
