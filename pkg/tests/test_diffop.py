"Tests for the diffop module."

import pytest # type: ignore
from sympy.polys.domains import QQ # type: ignore

from qeslab.diffop import (
    DiffOp,
    GaugeFactor,
    apply,
    change_coordinates,
    commutator,
    compose,
    coord_map,
    fit_combination,
    format_op,
    gauge_conjugate,
    gl_generator,
    indices_up_to,
    specialize,
    split_variable,
)
from qeslab.error import DomainError, Error
from qeslab.exactalg import coordinate_field, named_field

def _line():
    field = coordinate_field(1)
    return (field, DiffOp.partial(field, 1, 0), DiffOp.multiplication(field, 1, field.gens[0]))

def test_heisenberg():
    "Test [d/dx, x] = 1."
    (field, d, x) = _line()
    assert commutator(d, x) == DiffOp.multiplication(field, 1, 1)
    assert commutator(x, d) == DiffOp.multiplication(field, 1, -1)

def test_order():
    "Test operator orders."
    (field, d, x) = _line()
    assert (d * d).order == 2
    assert (x * d).order == 1
    assert x.order == 0
    assert DiffOp.zero(field, 1).order == -1
    assert not DiffOp.zero(field, 1)

def test_compose_leibniz():
    "Test d∘x∘d = x d² + d."
    (field, d, x) = _line()
    expected = DiffOp(field, 1, {(2,): field.gens[0], (1,): 1})
    assert compose(d, compose(x, d)) == expected

def test_apply():
    "Test application to polynomials and rational functions."
    (field, d, x) = _line()
    t = field.ring.gens[0]
    assert apply(d * d, t ** 3) == t * 6
    assert apply(x * d, t ** 2) == t ** 2 * 2
    assert apply(d, 1 / field.gens[0]) == -1 / field.gens[0] ** 2

def test_scale():
    "Test left multiplication by rationals and functions."
    (field, d, _) = _line()
    assert (d * QQ(1, 2)).coefficient((1,)) == QQ(1, 2)
    assert d.scale(field.gens[0]).coefficient((1,)) == field.gens[0]

def test_mismatch():
    "Test operators over different variable counts."
    (_, d, _) = _line()
    other = DiffOp.partial(coordinate_field(2), 2, 0)
    with pytest.raises(Error):
        _ = d + other
    with pytest.raises(Error):
        compose(d, other)

@pytest.mark.parametrize("nvars,terms", [
    (0, {}),
    (2, {}),
    (1, {(1, 0): 1}),
    (1, {(-1,): 1}),
])
def test_diffop_error(nvars, terms):
    "Test invalid operators."
    with pytest.raises(Error):
        DiffOp(coordinate_field(1), nvars, terms)

def test_indices_up_to():
    "Test multi-index enumeration."
    assert indices_up_to(2, 1) == [(0, 0), (0, 1), (1, 0)]
    assert len(indices_up_to(3, 2)) == 10

def test_format_op():
    "Test deterministic operator text."
    (field, d, x) = _line()
    assert format_op(d) == "(1) * d1"
    assert format_op(x * d + x) == "(1 * x1) * d1 + (1 * x1)"
    assert format_op(DiffOp.zero(field, 1)) == "0"

def test_gl_closure():
    "Test [x1 d2, x2 d1] = x1 d1 - x2 d2."
    left = gl_generator("diag", (1, 2), None, 2)
    right = gl_generator("diag", (2, 1), None, 2)
    expected = gl_generator("diag", (1, 1), None, 2) - gl_generator("diag", (2, 2), None, 2)
    assert commutator(left, right) == expected

@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_raise_preserves_degree(k):
    "Test the raising generator annihilates the top monomial."
    field = coordinate_field(1)
    t = field.ring.gens[0]
    assert not apply(gl_generator("raise", (1,), k, 1), t ** k)
    assert apply(gl_generator("euler", (), k, 1), t ** k) == 0

@pytest.mark.parametrize("args", [
    ("lower", (3,), None, 2),
    ("raise", (1,), None, 2),
    ("euler", (1,), 1, 2),
    ("twist", (1,), 1, 2),
])
def test_gl_generator_error(args):
    "Test invalid generators."
    with pytest.raises(Error):
        gl_generator(*args)

def test_gauge_exponential():
    "Test e^x d e^-x = d - 1."
    (field, d, _) = _line()
    gauge = GaugeFactor((), field.gens[0])
    assert gauge_conjugate(d, gauge) == d - DiffOp.multiplication(field, 1, 1)
    assert gauge_conjugate(d, gauge, forward=False) == d + DiffOp.multiplication(field, 1, 1)

def test_gauge_roundtrip():
    "Test forward then backward conjugation is the identity."
    (field, d, x) = _line()
    t = field.gens[0]
    op = d * d + x * d + x
    gauge = GaugeFactor(((t, QQ(1, 2)), (1 - t, QQ(-3, 4))), t ** 2 * QQ(1, 3))
    assert gauge_conjugate(gauge_conjugate(op, gauge), gauge, forward=False) == op
    assert gauge_conjugate(op, gauge.times(gauge.inverse())) == op

def test_gauge_zero_base():
    "Test a gauge factor with a zero base."
    (field, d, _) = _line()
    with pytest.raises(DomainError):
        gauge_conjugate(d, GaugeFactor(((field.zero, QQ(1)),)))

def test_specialize():
    "Test substituting inert parameters."
    field = coordinate_field(1, "x", ("a",))
    (t, a) = field.gens
    op = DiffOp(field, 1, {(1,): a * t, (0,): a ** 2})
    plain = coordinate_field(1)
    expected = DiffOp(plain, 1, {(1,): plain.gens[0] * 3, (0,): 9})
    assert specialize(op, {"a": 3}) == expected
    with pytest.raises(Error):
        specialize(op, {"b": 1})
    with pytest.raises(Error):
        specialize(op, {"x1": 1})

def test_split_variable():
    "Test A = T + (1/x1) B."
    field = coordinate_field(2)
    x1 = field.gens[0]
    op = DiffOp(field, 2, {(2, 0): x1, (1, 0): 1, (0, 2): 1 / x1, (0, 1): 2 / x1})
    (head, tail) = split_variable(op, 0)
    head_field = named_field(("x1",))
    tail_field = named_field(("x2",))
    assert head == DiffOp(head_field, 1, {(2,): head_field.gens[0], (1,): 1})
    assert tail == DiffOp(tail_field, 1, {(2,): 1, (1,): 2})

def test_split_variable_mixed():
    "Test a term mixing both sides."
    field = coordinate_field(2)
    op = DiffOp(field, 2, {(1, 0): field.gens[1]})
    with pytest.raises(Error):
        split_variable(op, 0)
    with pytest.raises(Error):
        split_variable(DiffOp.partial(coordinate_field(1), 1, 0), 0)

def test_change_coordinates_scaling():
    "Test y = 2x turns d/dx into 2 d/dy."
    old = coordinate_field(1)
    new = coordinate_field(1, "y")
    mapping = coord_map(old, 1, new, 1, [old.gens[0] * 2], [new.gens[0] / 2])
    (_, d, x) = _line()
    assert change_coordinates(d, mapping) == DiffOp(new, 1, {(1,): 2})
    assert change_coordinates(x * d, mapping) == DiffOp(new, 1, {(1,): new.gens[0]})

def test_change_coordinates_square():
    "Test Y = y² turns d²/dy² into 4Y d² + 2d without an inverse."
    old = coordinate_field(1, "y")
    new = coordinate_field(1, "Y")
    mapping = coord_map(old, 1, new, 1, [old.gens[0] ** 2])
    op = DiffOp(old, 1, {(2,): 1})
    assert change_coordinates(op, mapping) == DiffOp(new, 1, {(2,): new.gens[0] * 4, (1,): 2})

def test_coord_map_error():
    "Test singular and inconsistent maps."
    old = coordinate_field(1)
    new = coordinate_field(1, "y")
    with pytest.raises(DomainError):
        coord_map(old, 1, new, 1, [1])
    with pytest.raises(DomainError):
        coord_map(old, 1, new, 1, [old.gens[0] * 2], [new.gens[0]])
    with pytest.raises(Error):
        coord_map(old, 1, new, 1, [old.gens[0], old.gens[0]])

def test_fit_combination():
    "Test exact linear fits of operators."
    (_, d, x) = _line()
    assert fit_combination(d * 2 + x * 3, [d, x]) == [2, 3]
    assert fit_combination(x, [d]) is None
    assert fit_combination(d, []) is None
