"Exact arithmetic substrate: rationals, polynomials, rational functions, matrices and roots."

import functools
import logging
import math
from fractions import Fraction
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import mpmath # type: ignore
from sympy.external.gmpy import MPQ # type: ignore
from sympy.polys.densetools import dup_eval # type: ignore
from sympy.polys.domains import QQ # type: ignore
from sympy.polys.fields import FracElement, FracField # type: ignore
from sympy.polys.matrices import DomainMatrix # type: ignore
from sympy.polys.orderings import grlex # type: ignore
from sympy.polys.rings import PolyElement, PolyRing # type: ignore
from sympy.polys.rootisolation import ( # type: ignore
    dup_isolate_complex_roots_sqf,
    dup_isolate_real_roots_sqf,
)

from qeslab.error import DomainError, Error

_logger = logging.getLogger(__name__)

# Canonical arbitrary-precision rational (gcd = 1, positive denominator).
Rational = MPQ
# Sparse multivariate polynomial over QQ.
MultiPoly = PolyElement
# Normalized quotient of two MultiPoly values.
RatFunc = FracElement
# Dense exact matrix over QQ.
QMatrix = DomainMatrix

# Anything accepted where a rational scalar is expected.
RationalLike = Union[int, str, Fraction, Any]

DEFAULT_PRECISION = 128

def rational(value: RationalLike) -> Rational:
    "Convert an int, `Fraction`, rational or \"p/q\"/decimal string into a canonical rational."

    if isinstance(value, MPQ):
        return value
    if isinstance(value, bool):
        raise Error(f"not a rational: {value!r}")
    try:
        frac = Fraction(value.strip() if isinstance(value, str) else value)
    except (TypeError, ValueError, ZeroDivisionError) as ex:
        raise Error(f"not a rational: {value!r}") from ex
    return QQ(frac.numerator, frac.denominator)

def format_rational(value: Rational) -> str:
    "Serialize a rational as \"p/q\" (or \"p\" for integers)."
    value = rational(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"

def to_mpf(value: Rational) -> Any:
    "Approximate a rational at the current mpmath working precision."
    value = rational(value)
    return mpmath.mpf(int(value.numerator)) / int(value.denominator)

@functools.lru_cache(maxsize=None)
def poly_ring(n: int, prefix: str = "x", params: Tuple[str, ...] = ()) -> PolyRing:
    "Polynomial ring in `prefix`1..`prefix`n followed by the parameter symbols, graded-lex."
    names = [f"{prefix}{i}" for i in range(1, n + 1)] + list(params)
    if not names:
        raise Error("a polynomial ring needs at least one generator")
    return PolyRing(",".join(names), QQ, grlex)

@functools.lru_cache(maxsize=None)
def named_field(names: Tuple[str, ...]) -> FracField:
    "Rational-function field over QQ in the given generator names, graded-lex."
    if not names:
        raise Error("a rational-function field needs at least one generator")
    return FracField(",".join(names), QQ, grlex)

def coordinate_field(n: int, prefix: str = "x", params: Tuple[str, ...] = ()) -> FracField:
    "Rational-function field over `poly_ring(n, prefix, params)`."
    return named_field(tuple(f"{prefix}{i}" for i in range(1, n + 1)) + tuple(params))

def charpoly_ring() -> PolyRing:
    "Univariate ring in λ used for characteristic polynomials."
    return poly_ring(1, "lam")

def is_polynomial(value: RatFunc) -> bool:
    "True when the normalized denominator is a constant."
    return bool(value.denom.is_ground)

def as_poly(value: Union[RatFunc, MultiPoly]) -> MultiPoly:
    "Return a rational function with constant denominator as a polynomial."
    if isinstance(value, PolyElement):
        return value
    if not is_polynomial(value):
        raise DomainError(f"not a polynomial: {value}")
    return value.numer * (QQ.one / value.denom.LC)

def to_field(value: Any, field: FracField) -> RatFunc:
    "Coerce a rational, polynomial or rational function into `field`."
    if isinstance(value, FracElement):
        if value.field == field:
            return value
        raise Error(f"{value} does not belong to {field}")
    if isinstance(value, PolyElement):
        if value.ring != field.ring:
            raise Error(f"{value} does not belong to {field.ring}")
        return field.field_new(value)
    return field.ground_new(rational(value))

def _substitute_poly(poly: MultiPoly, images: Sequence[Any], zero: Any, one: Any) -> Any:
    powers: List[Dict[int, Any]] = [{0: one, 1: image} for image in images]
    result = zero
    for monom, coeff in poly.iterterms():
        term = one * coeff
        for i, exp in enumerate(monom):
            if exp:
                cache = powers[i]
                if exp not in cache:
                    cache[exp] = images[i] ** exp
                term = term * cache[exp]
        result = result + term
    return result

def substitute(value: Union[MultiPoly, RatFunc], images: Sequence[Any],
               target: Union[PolyRing, FracField]) -> Any:
    "Ring homomorphism sending generator i of `value`'s ring to `images[i]` in `target`."

    ring = value.ring if isinstance(value, PolyElement) else value.field.ring
    if len(images) != ring.ngens:
        raise Error(f"expected {ring.ngens} images, got {len(images)}")
    if isinstance(target, FracField):
        images = [to_field(image, target) for image in images]
    else:
        images = [image if isinstance(image, PolyElement) else target.ground_new(rational(image))
                  for image in images]
    if isinstance(value, PolyElement):
        return _substitute_poly(value, images, target.zero, target.one)
    if not isinstance(target, FracField):
        raise Error("rational functions can only be substituted into a field")
    numer = _substitute_poly(value.numer, images, target.zero, target.one)
    denom = _substitute_poly(value.denom, images, target.zero, target.one)
    if not denom:
        raise DomainError(f"substitution annihilates the denominator of {value}")
    return numer / denom

def _check_rings(*polys: MultiPoly):
    rings = {p.ring for p in polys}
    if len(rings) > 1:
        counts = sorted({r.ngens for r in rings})
        raise Error(f"variable-count mismatch: {counts}" if len(counts) > 1
                    else "polynomials live in different rings")

def poly_arith(op: str, *args: Any) -> MultiPoly:
    """Dispatch exact polynomial arithmetic.

    add(p, q), mul(p, q), scale(p, c), diff(p, i) with a 0-based variable index or a generator,
    substitute(p, images) with every image in one common ring.
    """

    if op in ("add", "mul"):
        (left, right) = args
        _check_rings(left, right)
        return left + right if op == "add" else left * right
    if op == "scale":
        (poly, scalar) = args
        return poly * rational(scalar)
    if op == "diff":
        (poly, var) = args
        if isinstance(var, int):
            if not 0 <= var < poly.ring.ngens:
                raise Error(f"variable index out of range: {var}")
            var = poly.ring.gens[var]
        return poly.diff(var)
    if op == "substitute":
        (poly, images) = args
        images = list(images)
        if not images:
            raise Error("substitute needs at least one image")
        _check_rings(*[i for i in images if isinstance(i, PolyElement)])
        target = next(i.ring for i in images if isinstance(i, PolyElement))
        return substitute(poly, images, target)
    raise Error(f"unknown polynomial operation: {op}")

def _format_monom(symbols: Sequence[Any], monom: Sequence[int]) -> str:
    parts = []
    for (symbol, exp) in zip(symbols, monom):
        if exp == 1:
            parts.append(str(symbol))
        elif exp:
            parts.append(f"{symbol}^{exp}")
    return " * ".join(parts)

def format_poly(poly: MultiPoly) -> str:
    "Serialize a polynomial as a graded-lex sorted term list \"coeff * x1^e1 * ...\"."
    if not poly:
        return "0"
    terms = []
    for (monom, coeff) in sorted(poly.iterterms(), key=lambda t: grlex(t[0]), reverse=True):
        mono = _format_monom(poly.ring.symbols, monom)
        coeff_str = format_rational(coeff)
        terms.append(f"{coeff_str} * {mono}" if mono else coeff_str)
    return " + ".join(terms)

def format_ratfunc(value: RatFunc) -> str:
    "Serialize a rational function; polynomials print as polynomials."
    if is_polynomial(value):
        return format_poly(as_poly(value))
    return f"({format_poly(value.numer)}) / ({format_poly(value.denom)})"

def qmatrix(rows: Sequence[Sequence[RationalLike]]) -> QMatrix:
    "Build a rectangular exact matrix from nested rows."
    rows = [[rational(entry) for entry in row] for row in rows]
    if not rows or not rows[0]:
        raise Error("matrix dimensions must be positive")
    if any(len(row) != len(rows[0]) for row in rows):
        raise Error("matrix rows must all have the same length")
    return DomainMatrix(rows, (len(rows), len(rows[0])), QQ)

def qmatrix_from_columns(columns: Sequence[Sequence[RationalLike]]) -> QMatrix:
    "Build a matrix whose j-th column is `columns[j]`."
    return qmatrix([list(row) for row in zip(*columns)])

def entries(matrix: QMatrix) -> List[List[Rational]]:
    "Nested row lists of a matrix."
    return matrix.to_list()

def charpoly(matrix: QMatrix) -> MultiPoly:
    "Monic characteristic polynomial det(λI − M), computed division-free."
    (rows, cols) = matrix.shape
    if rows != cols:
        raise Error(f"characteristic polynomial of a non-square {rows}x{cols} matrix")
    coeffs = matrix.charpoly()
    ring = charpoly_ring()
    degree = len(coeffs) - 1
    return ring.from_dict({(degree - i,): c for (i, c) in enumerate(coeffs) if c})

def _primitive(vector: Sequence[Rational]) -> List[Rational]:
    scale = math.lcm(*(int(value.denominator) for value in vector))
    ints = [int((value * scale).numerator) for value in vector]
    divisor = math.gcd(*ints) or 1
    sign = next((1 if v > 0 else -1 for v in ints if v), 1)
    return [QQ(sign * v // divisor) for v in ints]

def kernel_basis(matrix: QMatrix) -> List[List[Rational]]:
    "Exact kernel basis from the reduced echelon form, each vector primitive with leading sign +."
    null = matrix.convert_to(QQ).nullspace()
    return [_primitive(row) for row in null.to_list()]

def solve_linear(matrix: QMatrix, rhs: Sequence[RationalLike]) -> Optional[List[Rational]]:
    "One exact solution of M v = rhs (free unknowns set to 0) or None when inconsistent."

    (rows, cols) = matrix.shape
    if len(rhs) != rows:
        raise Error(f"right-hand side has {len(rhs)} entries, expected {rows}")
    augmented = matrix.hstack(qmatrix([[value] for value in rhs]))
    (reduced, pivots) = augmented.rref()
    if cols in pivots:
        return None
    values = reduced.to_list()
    solution = [QQ.zero] * cols
    for (row, pivot) in enumerate(pivots):
        solution[pivot] = values[row][cols]
    return solution

class Root(NamedTuple):
    "A root of a univariate polynomial."

    # Lower end of the isolating interval (real part for complex roots).
    lower: Rational
    # Upper end of the isolating interval; equals `lower` for exact rational roots.
    upper: Rational
    # Algebraic multiplicity.
    multiplicity: int = 1
    # Imaginary-part interval of the upper-half-plane member of a conjugate pair.
    imag: Optional[Tuple[Rational, Rational]] = None

    @property
    def is_exact(self) -> bool:
        "True for rational roots."
        return self.imag is None and self.lower == self.upper

    @property
    def is_real(self) -> bool:
        "True unless the root stands for a complex-conjugate pair."
        return self.imag is None

    @property
    def value(self) -> Rational:
        "The exact value of a rational root."
        if not self.is_exact:
            raise Error("root is not rational")
        return self.lower

    @property
    def midpoint(self) -> Rational:
        "Midpoint of the (real part) isolating interval."
        return (self.lower + self.upper) / 2

    def approx(self, precision: int = DEFAULT_PRECISION) -> Any:
        "Arbitrary-precision midpoint approximation (mpc for complex pairs)."
        with mpmath.workprec(precision):
            real = to_mpf(self.midpoint)
            if self.imag is None:
                return +real
            return mpmath.mpc(real, to_mpf((self.imag[0] + self.imag[1]) / 2))

    def contains(self, value: Rational) -> bool:
        "Whether a real rational lies in the isolating interval."
        return self.is_real and self.lower <= value <= self.upper

    def format(self) -> str:
        "Exact \"p/q\" for rational roots, interval notation otherwise."
        if self.is_exact:
            return format_rational(self.lower)
        real = f"[{format_rational(self.lower)}, {format_rational(self.upper)}]"
        if self.imag is None:
            return real
        (low, high) = self.imag
        return f"{real} +/- i[{format_rational(low)}, {format_rational(high)}]"

class RootSet(NamedTuple):
    "All roots of a univariate polynomial, sorted by decreasing real part."

    degree: int
    roots: Tuple[Root, ...]
    precision: int = DEFAULT_PRECISION

    def real(self) -> List[Root]:
        "Real roots only."
        return [root for root in self.roots if root.is_real]

    def complex_pairs(self) -> List[Root]:
        "Upper-half-plane representatives of conjugate pairs."
        return [root for root in self.roots if not root.is_real]

    def total_multiplicity(self) -> int:
        "Sum of multiplicities, counting each conjugate pair twice."
        return sum(r.multiplicity * (1 if r.is_real else 2) for r in self.roots)

def _sign(dense: List[Rational], point: Rational) -> int:
    value = dup_eval(dense, point, QQ)
    return (value > 0) - (value < 0)

def _refine(dense: List[Rational], lower: Rational, upper: Rational, precision: int) -> Root:
    width = QQ(1, 2 ** precision)
    low_sign = _sign(dense, lower)
    while upper - lower > width:
        middle = (lower + upper) / 2
        mid_sign = _sign(dense, middle)
        if mid_sign == 0:
            return Root(middle, middle)
        if mid_sign == low_sign:
            lower = middle
        else:
            upper = middle
    return Root(lower, upper)

def real_roots(poly: MultiPoly, precision_bits: int = DEFAULT_PRECISION) -> RootSet:
    """Isolate every root of a univariate polynomial.

    Rational roots come out exactly from the linear factors over QQ. Irreducible factors of
    higher degree are square-free: their real roots are isolated by continued-fraction sign
    counting and bisected to width 2^-precision_bits; complex roots are enclosed in rectangles.
    """

    if not poly:
        raise DomainError("the zero polynomial has no finite root set")
    if poly.ring.ngens != 1:
        raise Error(f"expected a univariate polynomial, got {poly.ring.ngens} variables")
    if precision_bits < 1:
        raise Error(f"precision must be positive: {precision_bits}")

    degree = poly.degree()
    roots: List[Root] = []
    (_, factors) = poly.factor_list()
    for (factor, mult) in factors:
        dense = factor.to_dense()
        if len(dense) == 2:
            value = -dense[1] / dense[0]
            roots.append(Root(value, value, mult))
            continue
        for (lower, upper) in dup_isolate_real_roots_sqf(dense, QQ):
            roots.append(_refine(dense, QQ(lower), QQ(upper), precision_bits)._replace(
                multiplicity=mult))
        for ((ax, ay), (bx, by)) in dup_isolate_complex_roots_sqf(dense, QQ):
            if ay + by > 0:
                roots.append(Root(QQ(ax), QQ(bx), mult, (QQ(ay), QQ(by))))

    roots.sort(key=lambda r: (r.midpoint, r.multiplicity), reverse=True)
    result = RootSet(degree, tuple(roots), precision_bits)
    if result.total_multiplicity() != degree:
        raise Error(f"root isolation accounted for {result.total_multiplicity()} of {degree} roots")
    _logger.debug("isolated %d roots of a degree %d polynomial", len(roots), degree)
    return result

def evaluate(poly: MultiPoly, value: RationalLike) -> Rational:
    "Evaluate a univariate polynomial at a rational point."
    return poly(rational(value))

def monomials(n: int, degree: int) -> Iterable[Tuple[int, ...]]:
    "Exponent vectors of n variables with total degree exactly `degree`."
    if n == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in monomials(n - 1, degree - first):
            yield (first,) + rest

def evaluate_point(value: Union[MultiPoly, RatFunc], point: Sequence[RationalLike]) -> Rational:
    "Evaluate a polynomial or rational function at a full rational point."
    point = [rational(coord) for coord in point]
    if isinstance(value, PolyElement):
        return value(*point) if value.ring.ngens > 0 else value.LC
    denom = value.denom(*point)
    if not denom:
        raise DomainError(f"denominator of {value} vanishes at {[format_rational(p) for p in point]}")
    return value.numer(*point) / denom
