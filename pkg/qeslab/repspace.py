"Invariant polynomial subspaces: bases, matrices, spectra and the closed-form catalog."

import logging
import math
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from sympy.polys.domains import QQ # type: ignore
from sympy.polys.matrices import DomainMatrix # type: ignore

from qeslab.diffop import DiffOp, apply
from qeslab.error import DomainError, Error
from qeslab.exactalg import (
    DEFAULT_PRECISION,
    MultiPoly,
    QMatrix,
    Rational,
    Root,
    charpoly,
    charpoly_ring,
    kernel_basis,
    monomials,
    poly_ring,
    qmatrix,
    qmatrix_from_columns,
    rational,
    real_roots,
    solve_linear,
)

_logger = logging.getLogger(__name__)

class Basis(NamedTuple):
    "Monomials of total degree at most k in n variables, in ascending graded-lex order."

    n: int
    k: int
    monomials: Tuple[Tuple[int, ...], ...]

    @property
    def size(self) -> int:
        "Number of monomials."
        return len(self.monomials)

    def position(self, monom: Tuple[int, ...]) -> Optional[int]:
        "Index of an exponent vector, or None outside the basis."
        return _positions(self).get(monom)

    def polynomial(self, coords: Sequence[Rational]) -> MultiPoly:
        "Polynomial with the given coordinates in this basis."
        ring = poly_ring(self.n)
        return ring.from_dict({m: c for (m, c) in zip(self.monomials, coords) if c})

    def coordinates(self, poly: MultiPoly) -> List[Rational]:
        "Coordinates of a polynomial of degree at most k."
        coords = [QQ.zero] * self.size
        for (monom, coeff) in poly.iterterms():
            index = self.position(monom)
            if index is None:
                raise DomainError(f"monomial {monom} lies outside P_{self.k}")
            coords[index] = coeff
        return coords

_POSITIONS: Dict[Tuple[int, int], Dict[Tuple[int, ...], int]] = {}

def _positions(b: Basis) -> Dict[Tuple[int, ...], int]:
    key = (b.n, b.k)
    if key not in _POSITIONS:
        _POSITIONS[key] = {m: i for (i, m) in enumerate(b.monomials)}
    return _POSITIONS[key]

def basis(n: int, k: int) -> Basis:
    "The monomial basis of P_k in n variables."
    if n < 1 or k < 0:
        raise Error(f"basis needs n >= 1 and k >= 0, got n={n}, k={k}")
    monoms = []
    for degree in range(k + 1):
        monoms.extend(reversed(list(monomials(n, degree))))
    return Basis(n, k, tuple(monoms))

def dimension(n: int, k: int) -> int:
    "dim P_k = C(n+k, n)."
    return math.comb(n + k, n)

def printed_dimension(n: int, k: int) -> int:
    "Σ_{j=1}^k (n)_j / j!, the printed count, which leaves out the constants."
    return sum(math.comb(n + j - 1, j) for j in range(1, k + 1))

class OperatorMatrix(NamedTuple):
    "Matrix of an operator on P_k: column j holds the image of basis monomial j."

    basis: Basis
    matrix: QMatrix
    invariant: bool
    # (column, monomial, coefficient) for every image term outside P_k.
    overflow: Tuple[Tuple[int, Tuple[int, ...], Rational], ...]

def matrix_rep(op: DiffOp, n: int, k: int) -> OperatorMatrix:
    "Exact matrix of a polynomial-coefficient operator on P_k."

    if op.nvars != n:
        raise Error(f"operator acts on {op.nvars} variables, expected {n}")
    if op.field.ngens != n:
        raise Error("specialize parameters before taking a matrix")
    if not op.is_polynomial():
        raise DomainError("matrix representation needs polynomial coefficients")
    b = basis(n, k)
    ring = op.field.ring
    rows = [[QQ.zero] * b.size for _ in range(b.size)]
    overflow = []
    for (j, monom) in enumerate(b.monomials):
        image = apply(op, ring.from_dict({monom: QQ.one}))
        for (term, coeff) in image.iterterms():
            i = b.position(term)
            if i is None:
                overflow.append((j, term, coeff))
            else:
                rows[i][j] = coeff
    result = OperatorMatrix(b, qmatrix(rows), not overflow, tuple(overflow))
    _logger.debug("matrix on P_%d (n=%d): %dx%d, invariant=%s", k, n, b.size, b.size, result.invariant)
    return result

class SpectralLine(NamedTuple):
    "One eigenvalue with its algebraic multiplicity."

    eigenvalue: Root
    multiplicity: int
    labels: Tuple[Any, ...] = ()
    provenance: str = "matrix"

def _conjugate(root: Root) -> Root:
    (low, high) = root.imag or (QQ.zero, QQ.zero)
    return root._replace(imag=(-high, -low))

def lines_of(poly: MultiPoly, precision: int = DEFAULT_PRECISION,
             labels: Tuple[Any, ...] = ()) -> List[SpectralLine]:
    "Spectral lines of a characteristic polynomial, both members of complex pairs included."
    lines = []
    for root in real_roots(poly, precision).roots:
        lines.append(SpectralLine(root, root.multiplicity, labels))
        if not root.is_real:
            lines.append(SpectralLine(_conjugate(root), root.multiplicity, labels))
    return lines

def spectrum(m: OperatorMatrix, precision: int = DEFAULT_PRECISION) -> List[SpectralLine]:
    "Roots of the characteristic polynomial, by decreasing real part."
    if not m.invariant:
        raise DomainError(f"operator does not leave P_{m.basis.k} invariant")
    return lines_of(charpoly(m.matrix), precision)

def restrict(matrix: QMatrix, columns: QMatrix) -> QMatrix:
    "R with M B = B R for an invariant subspace spanned by the columns of B."
    (_, dim) = columns.shape
    image = (matrix * columns).to_list()
    result = []
    for j in range(dim):
        coords = solve_linear(columns, [row[j] for row in image])
        if coords is None:
            raise DomainError("subspace is not invariant")
        result.append(coords)
    return qmatrix_from_columns(result)

class JointEigen(NamedTuple):
    "A joint eigenvalue of L_1..L_{n−1} and h^(QES) on P_k."

    # c_1..c_{n−1}: rationals, or the irreducible factor when a label is irrational.
    labels: Tuple[Any, ...]
    energy: Root
    multiplicity: int
    # Eigenpolynomials, present for rational energies.
    vectors: Tuple[MultiPoly, ...]
    # Characteristic polynomial of h^(QES) on the joint L-eigenspace.
    block_charpoly: MultiPoly
    # A Jordan-type cell occurred while splitting.
    defective: bool = False

def _factor_spaces(block: QMatrix) -> List[Tuple[Any, MultiPoly, int, List[List[Rational]], bool]]:
    "(label, factor, multiplicity, generalized-eigenspace basis, defective) per irreducible factor."
    (size, _) = block.shape
    spaces = []
    (_, factors) = charpoly(block).factor_list()
    for (factor, mult) in factors:
        dense = factor.to_dense()
        power = block.eval_poly(dense) ** mult if mult > 1 else block.eval_poly(dense)
        space = kernel_basis(power)
        if len(space) != mult * factor.degree():
            raise Error("generalized eigenspace has the wrong dimension")
        defective = len(kernel_basis(block.eval_poly(dense))) < len(space)
        label = -dense[1] / dense[0] if len(dense) == 2 else factor
        spaces.append((label, factor, mult, space, defective))
    _logger.debug("split a %dx%d block into %d factor spaces", size, size, len(spaces))
    return spaces

def _in_full(columns: QMatrix, local: List[List[Rational]]) -> QMatrix:
    return columns * qmatrix_from_columns(local)

def joint_eigenbasis(ops: Sequence[DiffOp], n: int, k: int,
                     precision: int = DEFAULT_PRECISION) -> List[JointEigen]:
    """Simultaneous eigendecomposition of commuting operators; the last one is the Hamiltonian.

    The space is split along the generalized eigenspaces of each L in turn, then the Hamiltonian
    is diagonalized on every joint eigenspace.
    """

    if not ops:
        raise Error("joint_eigenbasis needs at least the Hamiltonian")
    mats = [matrix_rep(op, n, k) for op in ops]
    if not all(m.invariant for m in mats):
        raise DomainError(f"every operator must leave P_{k} invariant")
    for (i, left) in enumerate(mats):
        for right in mats[i + 1:]:
            if (left.matrix * right.matrix).to_list() != (right.matrix * left.matrix).to_list():
                raise Error("operators do not commute")
    b = mats[0].basis
    result: List[JointEigen] = []

    def split(level: int, columns: QMatrix, labels: Tuple[Any, ...], defective: bool):
        block = restrict(mats[level].matrix, columns)
        if level < len(mats) - 1:
            for (label, _, _, space, bad) in _factor_spaces(block):
                split(level + 1, _in_full(columns, space), labels + (label,), defective or bad)
            return
        poly = charpoly(block)
        for (energy, factor, mult, space, bad) in _factor_spaces(block):
            if factor.degree() == 1:
                eigen = kernel_basis(block - DomainMatrix.eye(block.shape, QQ) * energy)
                vectors = tuple(b.polynomial([row[0] for row in _in_full(
                    columns, [v]).to_list()]) for v in eigen)
                result.append(JointEigen(labels, Root(energy, energy, mult), mult, vectors, poly,
                                         defective or bad))
            else:
                for root in real_roots(factor, precision).roots:
                    result.append(JointEigen(labels, root, mult, (), poly, defective or bad))
                    if not root.is_real:
                        result.append(JointEigen(labels, _conjugate(root), mult, (), poly,
                                                 defective or bad))

    split(0, DomainMatrix.eye(b.size, QQ).to_dense(), (), False)
    return result

class CatalogEntry(NamedTuple):
    "A printed closed-form prediction for one group of separation labels."

    id: str
    # Σq of the label group.
    label_sum: int
    # Number of label tuples sharing the prediction.
    multiplicity: int
    # Size of the per-label Hamiltonian block, k − Σq + 1.
    block_size: int
    # Monic polynomial in E whose roots are the predicted energies.
    polynomial: MultiPoly
    # Printed center and discriminant of E± = center ± √D / 2.
    center: Optional[Rational] = None
    discriminant: Optional[Rational] = None

def _linear(value: Rational) -> MultiPoly:
    lam = charpoly_ring().gens[0]
    return lam - value

def _pair(center: Rational, disc: Rational) -> MultiPoly:
    lam = charpoly_ring().gens[0]
    return lam ** 2 - 2 * center * lam + (center ** 2 - disc / 4)

def _cubic(c2: Rational, c1: Rational, c0: Rational) -> MultiPoly:
    lam = charpoly_ring().gens[0]
    return lam ** 3 + c2 * lam ** 2 + c1 * lam + c0

def es_energy(j: int, n: int, big_g: Rational) -> Rational:
    "ε_j = −j(j + G + (n−1)/2)."
    return -j * (j + big_g + QQ(n - 1, 2))

def es_catalog(n: int, k: int, big_g: Rational) -> List[Tuple[Rational, int]]:
    "Exactly solvable energies on P_k with multiplicities C(j+n−1, n−1)."
    return [(es_energy(j, n, big_g), math.comb(j + n - 1, n - 1)) for j in range(k + 1)]

def label_count(n: int, s: int) -> int:
    "Number of (q_1..q_{n−1}) with Σq = s."
    return 1 if n == 1 else math.comb(s + n - 2, n - 2)

def closed_form_catalog(n: int, k: int, p: Any) -> List[CatalogEntry]:
    "Printed QES spectra for n ≤ 3, k ≤ 2."

    if not (1 <= n <= 3 and 0 <= k <= 2):
        raise DomainError(f"no closed-form spectrum is printed for n={n}, k={k}")
    big_g = rational(p.G)
    g_n = rational(p.partial_sum(n))
    a = rational(p.a)
    half = QQ(1, 2)
    entries: List[CatalogEntry] = []

    def add(s: int, poly: MultiPoly, suffix: str = "", center: Optional[Rational] = None,
            disc: Optional[Rational] = None):
        tag = suffix or f"-Q{s}"
        entries.append(CatalogEntry(f"S34-N{n}-K{k}{tag}", s, label_count(n, s),
                                    k - s + 1, poly, center, disc))

    def pair(s: int, center: Rational, disc: Rational):
        add(s, _pair(center, disc), "-EPM", center, disc)

    if k == 0:
        add(0, _linear(QQ.zero))
    elif n == 1:
        if k == 1:
            pair(0, -big_g / 2 - half, (big_g + 1) ** 2 - 2 * a * (1 + 2 * g_n))
        else:
            add(0, _cubic(3 * big_g + 5, 2 * (2 * a * (g_n + 1) + (big_g + 2) * (big_g + 1)),
                          2 * a * (2 * g_n + 1) * (big_g + 2)), "-CUBIC")
    elif n == 2:
        if k == 1:
            add(1, _linear(QQ(3, 2) - big_g))
            pair(0, QQ(3, 4) - big_g / 2, (big_g - QQ(3, 2)) ** 2 - 4 * a * (1 + g_n))
        else:
            add(2, _linear(1 - 2 * big_g))
            pair(1, QQ(5, 4) - 3 * big_g / 2, (big_g + half) ** 2 - 4 * a * (3 + g_n))
            add(0, _cubic((6 * big_g - 5) * half,
                          (4 * a * (3 + 2 * g_n) + (1 - 2 * big_g) * (3 - 2 * big_g)) * half,
                          2 * a * (g_n + 1) * (2 * big_g - 1)), "-CUBIC")
    else:
        if k == 1:
            add(1, _linear(2 - big_g))
            pair(0, 1 - big_g / 2, (big_g - 2) ** 2 - 2 * a * (3 + 2 * g_n))
        else:
            add(2, _linear(2 * (1 - big_g)))
            pair(1, 2 - 3 * big_g / 2, big_g ** 2 - 2 * a * (7 + 2 * g_n))
            add(0, _cubic(3 * big_g - 4, 2 * (2 * a * (g_n + 2) + (big_g - 1) * (big_g - 2)),
                          2 * a * (2 * g_n + 3) * (big_g - 1)), "-CUBIC")
    return entries

def phi_coefficient_residual(m: OperatorMatrix, p: Any) -> MultiPoly:
    """Remainder, modulo the n=1, k=1 characteristic polynomial, of the eigen-relations for
    φ± = x + (1 + 2G_1)/(2E±) cleared of denominators; zero iff both φ± are eigenvectors.
    """

    if m.basis.n != 1 or m.basis.k != 1:
        raise DomainError("φ± is printed for n=1, k=1 only")
    ((m00, m01), (m10, m11)) = m.matrix.to_list()
    lam = charpoly_ring().gens[0]
    beta_num = 1 + 2 * rational(p.gammas[0])
    cp = charpoly(m.matrix)
    # With β = β_num / (2E): M00 β + M01 = E β and M10 β + M11 = E.
    first = (m00 * beta_num + 2 * m01 * lam - lam * beta_num).rem(cp)
    second = (m10 * beta_num + 2 * m11 * lam - 2 * lam ** 2).rem(cp)
    return first * first + second * second
