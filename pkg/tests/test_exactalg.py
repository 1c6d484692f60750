"Tests for the exactalg module."

from fractions import Fraction

import pytest # type: ignore
from sympy.polys.domains import QQ # type: ignore

from qeslab.error import DomainError, Error
from qeslab.exactalg import (
    Root,
    as_poly,
    charpoly,
    charpoly_ring,
    coordinate_field,
    evaluate,
    evaluate_point,
    format_poly,
    format_rational,
    kernel_basis,
    monomials,
    poly_arith,
    poly_ring,
    qmatrix,
    qmatrix_from_columns,
    rational,
    real_roots,
    solve_linear,
    substitute,
)

@pytest.mark.parametrize("value,expected", [
    ("3/6", QQ(1, 2)),
    (" -5/8 ", QQ(-5, 8)),
    ("0.25", QQ(1, 4)),
    (7, QQ(7)),
    (Fraction(2, 3), QQ(2, 3)),
    (QQ(4, 5), QQ(4, 5)),
])
def test_rational(value, expected):
    "Test rational parsing."
    assert rational(value) == expected

@pytest.mark.parametrize("value", ["", "abc", "1/0", True, None])
def test_rational_error(value):
    "Test invalid rationals."
    with pytest.raises(Error):
        rational(value)

@pytest.mark.parametrize("value,expected", [
    (QQ(-3, 4), "-3/4"),
    (QQ(2), "2"),
    (QQ(0), "0"),
    (QQ(10, 4), "5/2"),
])
def test_format_rational(value, expected):
    "Test rational serialization."
    assert format_rational(value) == expected

def test_format_poly():
    "Test polynomial serialization order and coefficients."
    (x1, x2) = poly_ring(2).gens
    assert format_poly(x1 ** 2 * 3 - x2 + QQ(1, 2)) == "3 * x1^2 + -1 * x2 + 1/2"
    assert format_poly(poly_ring(2).zero) == "0"

def test_monomials():
    "Test monomial enumeration by descending first exponent."
    assert list(monomials(2, 2)) == [(2, 0), (1, 1), (0, 2)]
    assert list(monomials(1, 3)) == [(3,)]
    assert len(list(monomials(3, 2))) == 6

def test_poly_arith():
    "Test polynomial dispatch."
    (x1, x2) = poly_ring(2).gens
    assert poly_arith("add", x1, x2) == x1 + x2
    assert poly_arith("mul", x1, x2) == x1 * x2
    assert poly_arith("scale", x1, "1/3") == x1 * QQ(1, 3)
    assert poly_arith("diff", x1 ** 2 * x2, 0) == x1 * x2 * 2
    assert poly_arith("substitute", x1 * x2, [x2, x1 + 1]) == x2 * x1 + x2

@pytest.mark.parametrize("args", [
    ("add", poly_ring(2).gens[0], poly_ring(3).gens[0]),
    ("diff", poly_ring(2).gens[0], 2),
    ("frobnicate", poly_ring(2).gens[0]),
])
def test_poly_arith_error(args):
    "Test invalid polynomial operations."
    with pytest.raises(Error):
        poly_arith(*args)

def test_substitute_field():
    "Test substitution into a rational-function field."
    field = coordinate_field(2)
    (x1, x2) = field.gens
    assert substitute(x1 / x2, [x2, x1], field) == x2 / x1
    with pytest.raises(DomainError):
        substitute(x1 / x2, [x1, field.zero], field)

def test_as_poly():
    "Test conversion of rational functions with constant denominators."
    field = coordinate_field(2)
    (x1, x2) = field.gens
    assert as_poly((x1 * 2 + x2) / 2) == field.ring.gens[0] + field.ring.gens[1] * QQ(1, 2)
    with pytest.raises(DomainError):
        as_poly(x1 / x2)

def test_evaluate_point():
    "Test point evaluation."
    field = coordinate_field(2)
    (x1, x2) = field.gens
    assert evaluate_point(x1 / (x2 + 1), ["1/2", 1]) == QQ(1, 4)
    with pytest.raises(DomainError):
        evaluate_point(x1 / (x2 - 1), [1, 1])
    assert evaluate(charpoly_ring().gens[0] ** 2 - 2, 3) == 7

def test_qmatrix_error():
    "Test ragged and empty matrices."
    with pytest.raises(Error):
        qmatrix([[1], [1, 2]])
    with pytest.raises(Error):
        qmatrix([])

def test_qmatrix_from_columns():
    "Test column-wise construction."
    assert qmatrix_from_columns([[1, 2], [3, 4]]).to_list() == [[1, 3], [2, 4]]

def test_charpoly():
    "Test the characteristic polynomial of the one-dimensional degree-one block."
    lam = charpoly_ring().gens[0]
    matrix = qmatrix([[0, "1/2"], ["5/8", -1]])
    assert charpoly(matrix) == lam ** 2 + lam - QQ(5, 16)
    with pytest.raises(Error):
        charpoly(qmatrix([[1, 2]]))

def test_kernel_basis():
    "Test primitive kernel vectors."
    assert kernel_basis(qmatrix([[1, 2], [2, 4]])) == [[2, -1]]
    assert kernel_basis(qmatrix([[1, 0], [0, 1]])) == []

def test_solve_linear():
    "Test exact linear solves."
    assert solve_linear(qmatrix([[1, 1], [1, -1]]), [3, 1]) == [2, 1]
    assert solve_linear(qmatrix([[1, 1], [1, 1]]), [1, 2]) is None
    with pytest.raises(Error):
        solve_linear(qmatrix([[1, 1]]), [1, 2])

def test_real_roots_rational():
    "Test exact rational roots with multiplicities, by decreasing value."
    lam = charpoly_ring().gens[0]
    roots = real_roots((lam - 1) ** 2 * (lam + 2))
    assert roots.roots == (Root(QQ(1), QQ(1), 2), Root(QQ(-2), QQ(-2), 1))
    assert roots.total_multiplicity() == 3
    assert all(root.is_exact for root in roots.roots)

def test_real_roots_f1():
    "Test the degree-one block energies 1/4 and -5/4."
    lam = charpoly_ring().gens[0]
    roots = real_roots(lam ** 2 + lam - QQ(5, 16))
    assert [root.value for root in roots.roots] == [QQ(1, 4), QQ(-5, 4)]
    assert [root.format() for root in roots.roots] == ["1/4", "-5/4"]

def test_real_roots_irrational():
    "Test isolating intervals of ±sqrt(2)."
    lam = charpoly_ring().gens[0]
    roots = real_roots(lam ** 2 - 2, 64)
    assert len(roots.real()) == 2
    (positive, negative) = roots.roots
    assert not positive.is_exact
    assert positive.lower ** 2 < 2 < positive.upper ** 2
    assert positive.upper - positive.lower <= QQ(1, 2 ** 64)
    assert negative.upper < 0
    with pytest.raises(Error):
        _ = positive.value

def test_real_roots_complex():
    "Test complex pairs of λ² + 1."
    lam = charpoly_ring().gens[0]
    roots = real_roots(lam ** 2 + 1)
    assert roots.real() == []
    (pair,) = roots.complex_pairs()
    assert not pair.is_real
    assert pair.imag[0] <= 1 <= pair.imag[1]
    assert roots.total_multiplicity() == 2

@pytest.mark.parametrize("poly,precision", [
    (charpoly_ring().zero, 128),
    (poly_ring(2).gens[0], 128),
    (charpoly_ring().gens[0], 0),
])
def test_real_roots_error(poly, precision):
    "Test invalid root isolation requests."
    with pytest.raises(Error):
        real_roots(poly, precision)
