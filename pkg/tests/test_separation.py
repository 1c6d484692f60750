"Tests for the separation module."

import pytest # type: ignore
from sympy.polys.domains import QQ # type: ignore

from qeslab.error import DomainError, Error
from qeslab.exactalg import named_field, poly_ring
from qeslab.models import SphereParams
from qeslab.repspace import dimension
from qeslab.separation import (
    admissible_labels,
    assemble,
    completeness,
    derive_separation_ops,
    exponent_roots,
    heun_spectrum,
    hypergeometric_factor,
    label_constants,
    printed_separation_ops,
    solve_all,
    spherical_map,
)

# Two-dimensional sphere, γ = (0, 0, 0), a = 1/2, k = 1.
F2 = SphereParams.make(2, [0, 0, 0], "1/2", 1)

def _energies(solution):
    return [line.energy.value for line in solution.energies]

def test_spherical_map():
    "Test x_1 = u_1 u_2 and x_2 = (1 - u_1) u_2."
    mapping = spherical_map(2)
    (u1, u2) = mapping.new.gens
    assert list(mapping.inverse) == [u1 * u2, (1 - u1) * u2]
    with pytest.raises(Error):
        spherical_map(0)

def test_derive_separation_ops():
    "Test one angular and one radial operator on the two-sphere."
    chain = derive_separation_ops(F2)
    assert [op.nvars for op in chain.operators] == [1, 1]
    assert [op.field for op in chain.operators] == [named_field(("u1",)), named_field(("u2",))]
    assert chain.operators[0].order == 2
    printed = printed_separation_ops(F2)
    assert [op.field for op in printed] == [op.field for op in chain.operators]

@pytest.mark.parametrize("n,k,count", [
    (2, 1, 2),
    (2, 2, 3),
    (3, 1, 3),
    (3, 2, 6),
    (1, 2, 1),
])
def test_admissible_labels(n, k, count):
    "Test label tuples with Σq ≤ k."
    labels = admissible_labels(n, k)
    assert len(labels) == count
    assert all(len(q) == n - 1 and sum(q) <= k for q in labels)

def test_label_constants():
    "Test exponents and separation constants of q = (1,)."
    assert label_constants(F2, (1,)) == ([0, 1], [-1])
    assert label_constants(F2, (0,)) == ([0, 0], [0])
    with pytest.raises(Error):
        label_constants(F2, (1, 0))
    with pytest.raises(Error):
        label_constants(F2, (-1,))

def test_exponent_roots():
    "Test the exponent equation has the label exponent as a root."
    assert 1 in exponent_roots(F2, 2, QQ(-1))
    assert exponent_roots(F2, 1, QQ(0)) == [QQ(1, 2), 0]

def test_hypergeometric_factor():
    "Test ₂F₁(-1, 1; 1/2; u) = 1 - 2u."
    u = named_field(("u1",)).ring.gens[0]
    assert hypergeometric_factor(1, 1, F2, QQ(0)) == 1 - u * 2
    assert hypergeometric_factor(1, 0, F2, QQ(0)) == 1
    with pytest.raises(Error):
        hypergeometric_factor(1, -1, F2, QQ(0))

def test_heun_spectrum():
    "Test the radial blocks of the two-sphere."
    chain = derive_separation_ops(F2)
    assert [line.energy.value for line in heun_spectrum(chain, QQ(-1), QQ(1))] == [QQ(-3, 2)]
    assert [line.energy.value for line in heun_spectrum(chain, QQ(0), QQ(0))] == [QQ(-1, 2), -1]
    with pytest.raises(DomainError):
        heun_spectrum(chain, QQ(-1), QQ(2))

def test_assemble():
    "Test (1 - 2u_1) u_2 is x_2 - x_1 with energy -3/2."
    chain = derive_separation_ops(F2)
    factors = [hypergeometric_factor(1, 1, F2, QQ(0)), named_field(("u2",)).ring.one]
    function = assemble(chain, (1,), factors, QQ(-3, 2))
    (x1, x2) = poly_ring(2).gens
    assert function.polynomial == x2 - x1
    assert function.exponents == (1,)
    assert function.constants == (-1,)
    with pytest.raises(Error):
        assemble(chain, (1,), factors, QQ(0))

def test_assemble_radial():
    "Test radial eigenpolynomials of the Heun block assemble into eigenfunctions."
    chain = derive_separation_ops(F2)
    angular = hypergeometric_factor(1, 0, F2, QQ(0))
    lines = heun_spectrum(chain, QQ(0), QQ(0))
    for line in lines:
        (radial,) = line.polynomials
        function = assemble(chain, (0,), [angular, radial], line.energy.value)
        assert function.energy == line.energy.value
        assert function.polynomial
        assert max(sum(m) for m in function.polynomial.keys()) <= 1
    assert len(lines) == 2

def test_solve_all_f2():
    "Test the two chains of the two-sphere and their eigenfunctions."
    solutions = {s.labels: s for s in solve_all(F2)}
    assert set(solutions) == {(0,), (1,)}
    assert _energies(solutions[(1,)]) == [QQ(-3, 2)]
    assert _energies(solutions[(0,)]) == [QQ(-1, 2), -1]
    assert solutions[(1,)].factor_degrees == (1, 0)
    assert solutions[(0,)].factor_degrees == (0, 1)
    assert sum(len(s.eigenfunctions) for s in solutions.values()) == 3

def test_solve_all_ground():
    "Test k = 0 has the single constant solution with E = 0."
    (solution,) = solve_all(SphereParams.make(2, [0, 0, 0], "1/2", 0))
    assert solution.labels == (0,)
    assert _energies(solution) == [0]
    assert solution.eigenfunctions[0].polynomial == 1

@pytest.mark.parametrize("p", [
    F2,
    SphereParams.make(2, [0, 0, 0], "1/2", 2),
    SphereParams.make(3, [0, 0, 0, 0], "1/2", 1),
])
def test_completeness(p):
    "Test the separated blocks fill P_k and match the joint eigenspaces."
    solutions = solve_all(p)
    assert sum(s.degree + 1 for s in solutions) == dimension(p.n, p.k)
    check = completeness(p, solutions)
    assert check.complete
    assert not check.mismatches
    assert check.chain_count == len(admissible_labels(p.n, p.k))
    assert check.dimension == dimension(p.n, p.k)
