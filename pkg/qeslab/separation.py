"""Separation of h^(QES) in spherical coordinates.

x_1 = u_1⋯u_n and x_i = (1 − u_{i−1}) u_i⋯u_n turn the operator into the nested form
T_n + (1/u_n)(T_{n−1} + (1/u_{n−1})(⋯ + (1/u_2) T_1)). Each level is solved in turn: the angular
levels by terminating ₂F₁ polynomials, the radial level by a finite confluent Heun block.
"""

import itertools
import logging
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from sympy.polys.domains import QQ # type: ignore
from sympy.polys.fields import FracElement # type: ignore
from sympy.polys.rings import PolyElement # type: ignore

from qeslab.diffop import (
    CoordMap,
    DiffOp,
    GaugeFactor,
    apply,
    change_coordinates,
    coord_map,
    gauge_conjugate,
    split_variable,
)
from qeslab.error import DomainError, Error
from qeslab.exactalg import (
    DEFAULT_PRECISION,
    MultiPoly,
    Rational,
    Root,
    as_poly,
    charpoly,
    charpoly_ring,
    coordinate_field,
    kernel_basis,
    named_field,
    rational,
    real_roots,
    substitute,
    to_field,
)
from qeslab.models import SphereParams, build_L_chain, build_qes_sphere
from qeslab.repspace import basis, dimension, joint_eigenbasis, matrix_rep

_logger = logging.getLogger(__name__)

def spherical_map(n: int) -> CoordMap:
    "x ↦ u with u_ℓ = S_ℓ / S_{ℓ+1} (ℓ < n) and u_n = S_n, S_ℓ = x_1 + ... + x_ℓ."
    if n < 1:
        raise Error(f"dimension must be positive: {n}")
    old = coordinate_field(n)
    new = coordinate_field(n, "u")
    x = old.gens[:n]
    u = new.gens[:n]
    sums = [sum(x[:ell], old.zero) for ell in range(1, n + 1)]
    forward = [sums[ell] / sums[ell + 1] for ell in range(n - 1)] + [sums[n - 1]]
    inverse = []
    for i in range(n):
        tail = new.one
        for v in u[i:]:
            tail *= v
        inverse.append(tail if i == 0 else (1 - u[i - 1]) * tail)
    return coord_map(old, n, new, n, forward, inverse)

def peel_chain(op: DiffOp) -> List[DiffOp]:
    "[T_1, ..., T_n] with op = T_n + (1/u_n)(T_{n−1} + ...), each over its own one-variable field."
    levels = []
    rest = op
    while rest.nvars > 1:
        (head, rest) = split_variable(rest, rest.nvars - 1)
        levels.append(head)
    levels.append(rest)
    return list(reversed(levels))

class SeparationChain(NamedTuple):
    "The one-dimensional operators of the separated problem."

    params: SphereParams
    # T_1..T_{n−1} (angular) then T_n (radial), in u_ℓ.
    operators: Tuple[DiffOp, ...]

    @property
    def n(self) -> int:
        "Dimension."
        return self.params.n

    @property
    def k(self) -> int:
        "Degree bound."
        return self.params.k

def derive_separation_ops(p: SphereParams) -> SeparationChain:
    "Mechanically transform h^(QES) to spherical coordinates and peel off its levels."
    op = change_coordinates(build_qes_sphere(p), spherical_map(p.n))
    chain = SeparationChain(p, tuple(peel_chain(op)))
    _logger.debug("derived %d separation operators for n=%d", len(chain.operators), p.n)
    return chain

def _univariate(name: str):
    return named_field((name,))

def printed_separation_ops(p: SphereParams) -> List[DiffOp]:
    """Printed one-dimensional operators over the same fields as derive_separation_ops.

    Angular: u(1−u)d² + (G_ℓ + ℓ/2 − u(G_{ℓ+1} + (ℓ+1)/2))d.
    Radial: u(1−u)d² + (G_n + n/2 − u(G − (n+1)/2) + au²)d − aku.
    """

    ops = []
    for ell in range(1, p.n + 1):
        field = _univariate(f"u{ell}")
        u = field.gens[0]
        g_ell = rational(p.partial_sum(ell))
        if ell < p.n:
            shift = rational(p.partial_sum(ell + 1)) + QQ(ell + 1, 2)
            ops.append(DiffOp(field, 1, {(2,): u * (1 - u), (1,): g_ell + QQ(ell, 2) - shift * u}))
        else:
            a = rational(p.a)
            first = g_ell + QQ(ell, 2) - u * (rational(p.G) - QQ(p.n + 1, 2)) + a * u ** 2
            ops.append(DiffOp(field, 1, {(2,): u * (1 - u), (1,): first, (0,): -a * p.k * u}))
    return ops

def exponent_roots(p: SphereParams, ell: int, incoming: Rational) -> List[Rational]:
    "Rational roots of A² + A(G_ℓ + ℓ/2 − 1) + c_{ℓ−1} = 0, largest first."
    lam = charpoly_ring().gens[0]
    quadratic = lam ** 2 + (rational(p.partial_sum(ell)) + QQ(ell, 2) - 1) * lam + incoming
    return [root.value for root in real_roots(quadratic).roots if root.is_exact]

def label_constants(p: SphereParams, q: Sequence[int]) -> Tuple[List[Rational], List[Rational]]:
    """Exponents A_1..A_n with A_ℓ = Σ_{i<ℓ} q_i, and separation constants
    c_ℓ = −A_{ℓ+1}(A_{ℓ+1} + G_{ℓ+1} + (ℓ−1)/2) for ℓ = 1..n−1.
    """

    if len(q) != p.n - 1 or any(v < 0 for v in q):
        raise Error(f"expected {p.n - 1} nonnegative labels, got {list(q)}")
    exponents = [QQ(sum(q[:ell - 1])) for ell in range(1, p.n + 1)]
    constants = [-exponents[ell] * (exponents[ell] + rational(p.partial_sum(ell + 1)) + QQ(ell - 1, 2))
                 for ell in range(1, p.n)]
    return (exponents, constants)

def reduce_hypergeometric(chain: SeparationChain, ell: int, incoming: Rational,
                          target: Optional[Rational] = None) -> Tuple[Rational, DiffOp]:
    """u^{−A}(T_ℓ + c_{ℓ−1}/u)u^{A} with A a root of the exponent quadratic.

    The root equal to `target` is taken; without a target, the largest nonnegative integer root.
    """

    if not 1 <= ell <= chain.n:
        raise Error(f"level must be in 1..{chain.n}, got {ell}")
    roots = exponent_roots(chain.params, ell, incoming)
    if target is not None:
        if rational(target) not in roots:
            raise DomainError(f"A = {target} does not solve the level-{ell} exponent equation")
        exponent = rational(target)
    else:
        integral = [r for r in roots if r >= 0 and r.denominator == 1]
        if not integral:
            raise DomainError(f"no admissible exponent at level {ell} for c = {incoming}")
        exponent = integral[0]
    op = chain.operators[ell - 1]
    u = op.field.gens[0]
    shifted = op + DiffOp.multiplication(op.field, 1, to_field(incoming, op.field) / u)
    reduced = gauge_conjugate(shifted, GaugeFactor(((u, exponent),)), forward=False)
    if not reduced.is_polynomial():
        raise Error(f"level-{ell} reduction left a singular term")
    return (exponent, reduced)

def _pochhammer(value: Rational, j: int) -> Rational:
    result = QQ(1)
    for i in range(j):
        result *= value + i
    return result

def hypergeometric_factor(ell: int, q: int, p: SphereParams, exponent: Rational) -> MultiPoly:
    "₂F₁(−q, 2A + q + G_{ℓ+1} + (ℓ−1)/2; 2A + G_ℓ + ℓ/2; u_ℓ), a polynomial of degree q."

    if q < 0:
        raise Error(f"label must be nonnegative: {q}")
    upper = 2 * exponent + q + rational(p.partial_sum(ell + 1)) + QQ(ell - 1, 2)
    lower = 2 * exponent + rational(p.partial_sum(ell)) + QQ(ell, 2)
    ring = _univariate(f"u{ell}").ring
    coeffs = {}
    for j in range(q + 1):
        denom = _pochhammer(lower, j)
        if not denom:
            raise DomainError(f"₂F₁ denominator vanishes at term {j} (c = {lower})")
        coeffs[(j,)] = _pochhammer(QQ(-q), j) * _pochhammer(upper, j) / (denom * _pochhammer(QQ(1), j))
    poly = ring.from_dict({m: c for (m, c) in coeffs.items() if c})
    if poly.degree() != q:
        raise DomainError(f"₂F₁ factor has degree {poly.degree()}, expected {q}")
    return poly

class HeunLine(NamedTuple):
    "An energy of the radial block and, for rational energies, its eigenpolynomials."

    energy: Root
    polynomials: Tuple[MultiPoly, ...]

def heun_block(chain: SeparationChain, incoming: Rational, exponent: Rational) -> Tuple[DiffOp, Any]:
    "The reduced radial operator and its matrix on 1..u^m, m = k − A_n."
    (exponent, reduced) = reduce_hypergeometric(chain, chain.n, incoming, exponent)
    degree = chain.k - exponent
    if degree < 0 or degree.denominator != 1:
        raise DomainError(f"m = k − A_n = {degree} is not a nonnegative integer")
    rep = matrix_rep(reduced, 1, int(degree))
    if not rep.invariant:
        raise Error("radial block does not preserve its polynomial space")
    return (reduced, rep)

def heun_spectrum(chain: SeparationChain, incoming: Rational, exponent: Rational,
                  precision: int = DEFAULT_PRECISION) -> List[HeunLine]:
    "Energies of the (m+1)×(m+1) radial block with confluent Heun eigenpolynomials."
    (_, rep) = heun_block(chain, incoming, exponent)
    return _heun_lines(rep, precision)

def _heun_lines(rep: Any, precision: int) -> List[HeunLine]:
    lines = []
    for root in real_roots(charpoly(rep.matrix), precision).roots:
        polys: Tuple[MultiPoly, ...] = ()
        if root.is_exact:
            shifted = rep.matrix - rep.matrix.eye(rep.matrix.shape, QQ) * root.value
            polys = tuple(rep.basis.polynomial(v) for v in kernel_basis(shifted))
        lines.append(HeunLine(root, polys))
    return lines

class SeparatedEigenfunction(NamedTuple):
    "Ψ = u_2^{A_2}⋯u_n^{A_n} Π V_ℓ(u_ℓ) re-expressed in x."

    factors: Tuple[MultiPoly, ...]
    exponents: Tuple[Rational, ...]
    labels: Tuple[int, ...]
    constants: Tuple[Rational, ...]
    energy: Rational
    polynomial: MultiPoly

def _level_factor(factor: Any, u: Any, field: Any) -> Any:
    "A one-variable factor, from whichever ring it was built in, as a function of u."
    if isinstance(factor, (PolyElement, FracElement)):
        return substitute(factor, [u], field)
    return to_field(factor, field)

def assemble(chain: SeparationChain, q: Sequence[int], factors: Sequence[MultiPoly],
             energy: Rational) -> SeparatedEigenfunction:
    "Reassemble Ψ in x and check it is an eigenpolynomial of h^(QES) in P_k."

    p = chain.params
    (exponents, constants) = label_constants(p, q)
    mapping = spherical_map(p.n)
    u_field = mapping.new
    psi = u_field.one
    for ell in range(1, p.n + 1):
        factor = factors[ell - 1]
        psi *= _level_factor(factor, u_field.gens[ell - 1], u_field)
        psi *= u_field.gens[ell - 1] ** int(exponents[ell - 1])
    try:
        poly = as_poly(substitute(psi, mapping.forward_images(), mapping.old))
    except DomainError as ex:
        raise DomainError(f"eigenfunction for q={list(q)} is not a polynomial") from ex
    if poly and max(sum(m) for m in poly.keys()) > p.k:
        raise DomainError(f"eigenfunction for q={list(q)} leaves P_{p.k}")
    image = apply(build_qes_sphere(p), poly)
    if image != poly * energy:
        raise Error(f"assembled function for q={list(q)} is not an eigenfunction")
    return SeparatedEigenfunction(tuple(factors), tuple(exponents[1:]), tuple(q),
                                  tuple(constants), energy, poly)

def admissible_labels(n: int, k: int) -> List[Tuple[int, ...]]:
    "All (q_1..q_{n−1}) of nonnegative integers with Σq ≤ k."
    return [q for q in itertools.product(range(k + 1), repeat=n - 1) if sum(q) <= k]

class ChainSolution(NamedTuple):
    "One admissible label tuple solved through every level."

    labels: Tuple[int, ...]
    exponents: Tuple[Rational, ...]
    constants: Tuple[Rational, ...]
    # m = k − A_n.
    degree: int
    heun_charpoly: MultiPoly
    energies: Tuple[HeunLine, ...]
    eigenfunctions: Tuple[SeparatedEigenfunction, ...]

    @property
    def factor_degrees(self) -> Tuple[int, ...]:
        "Degrees q_1..q_{n−1} of the angular factors, then the radial bound m."
        return self.labels + (self.degree,)

def solve_chain(chain: SeparationChain, q: Sequence[int],
                precision: int = DEFAULT_PRECISION) -> ChainSolution:
    "Solve the levels for one label tuple and assemble the rational-energy eigenfunctions."

    p = chain.params
    (exponents, constants) = label_constants(p, q)
    incoming = QQ(0)
    factors = []
    for ell in range(1, p.n):
        (exponent, reduced) = reduce_hypergeometric(chain, ell, incoming, exponents[ell - 1])
        factor = hypergeometric_factor(ell, q[ell - 1], p, exponent)
        if apply(reduced, factor) != factor * constants[ell - 1]:
            raise Error(f"₂F₁ factor at level {ell} is not an eigenfunction")
        factors.append(factor)
        incoming = constants[ell - 1]
    (_, rep) = heun_block(chain, incoming, exponents[-1])
    lines = _heun_lines(rep, precision)
    functions = []
    for line in lines:
        for radial in line.polynomials:
            functions.append(assemble(chain, q, factors + [radial], line.energy.value))
    return ChainSolution(tuple(q), tuple(exponents), tuple(constants), rep.basis.k,
                         charpoly(rep.matrix), tuple(lines), tuple(functions))

def solve_all(p: SphereParams, precision: int = DEFAULT_PRECISION) -> List[ChainSolution]:
    "Every admissible chain; their blocks together fill P_k."
    chain = derive_separation_ops(p)
    solutions = [solve_chain(chain, q, precision) for q in admissible_labels(p.n, p.k)]
    total = sum(s.degree + 1 for s in solutions)
    if total != dimension(p.n, p.k):
        raise Error(f"chains cover {total} dimensions of {dimension(p.n, p.k)}")
    return solutions

class Completeness(NamedTuple):
    "Separated blocks against the joint eigendecomposition, per label tuple."

    complete: bool
    # Label tuples whose characteristic polynomials disagree.
    mismatches: Tuple[Tuple[Any, ...], ...]
    chain_count: int
    dimension: int

def completeness(p: SphereParams, solutions: Optional[List[ChainSolution]] = None,
                 precision: int = DEFAULT_PRECISION) -> Completeness:
    "Compare Π(Heun block charpolys) per c-label tuple with the joint eigenspaces of L_ℓ and h."

    solutions = solutions if solutions is not None else solve_all(p, precision)
    ops = (build_L_chain(p) if p.n > 1 else []) + [build_qes_sphere(p)]
    separated: Dict[Tuple[Any, ...], MultiPoly] = {}
    for s in solutions:
        separated[s.constants] = separated.get(s.constants, charpoly_ring().one) * s.heun_charpoly
    joint: Dict[Tuple[Any, ...], MultiPoly] = {}
    for entry in joint_eigenbasis(ops, p.n, p.k, precision):
        joint[entry.labels] = entry.block_charpoly
    mismatches = tuple(sorted((labels for labels in set(separated) | set(joint)
                               if separated.get(labels) != joint.get(labels)), key=repr))
    size = basis(p.n, p.k).size
    return Completeness(not mismatches, mismatches, len(solutions), size)
