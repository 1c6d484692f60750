"Differential operators with rational-function coefficients."

import itertools
import logging
import math
import random
from typing import Any, Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Type, TypeVar

from sympy.polys.domains import QQ # type: ignore
from sympy.polys.fields import FracField # type: ignore
from sympy.polys.matrices import DomainMatrix # type: ignore
from sympy.polys.orderings import grlex # type: ignore
from sympy.polys.rings import PolyElement # type: ignore

from qeslab.error import DomainError, Error
from qeslab.exactalg import (
    RatFunc,
    Rational,
    RationalLike,
    as_poly,
    coordinate_field,
    evaluate_point,
    format_ratfunc,
    is_polynomial,
    monomials,
    named_field,
    qmatrix_from_columns,
    rational,
    solve_linear,
    substitute,
    to_field,
)

_logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]

DiffOpType = TypeVar("DiffOpType", bound="DiffOp")

def derivative(value: RatFunc, alpha: MultiIndex) -> RatFunc:
    "∂^α of a rational function over the first len(α) generators."
    gens = value.field.gens
    for (i, times) in enumerate(alpha):
        for _ in range(times):
            if not value:
                return value
            value = value.diff(gens[i])
    return value

def _add_index(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a + b for (a, b) in zip(alpha, beta))

def _sub_index(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a - b for (a, b) in zip(alpha, beta))

def _below(alpha: MultiIndex) -> Iterator[MultiIndex]:
    return itertools.product(*(range(a + 1) for a in alpha))

def _binomial(alpha: MultiIndex, gamma: MultiIndex) -> int:
    return math.prod(math.comb(a, g) for (a, g) in zip(alpha, gamma))

def unit_index(nvars: int, i: int) -> MultiIndex:
    "Multi-index of ∂_i (0-based)."
    return tuple(1 if j == i else 0 for j in range(nvars))

def indices_up_to(nvars: int, order: int) -> List[MultiIndex]:
    "All multi-indices with |α| ≤ order, ascending graded-lex."
    result = [alpha for degree in range(order + 1) for alpha in monomials(nvars, degree)]
    return sorted(result, key=grlex)

class DiffOp:
    """Σ c_α ∂^α acting on the first `nvars` generators of a rational-function field.

    Generators past `nvars` are inert parameters: coefficients may depend on them but no
    derivative is taken with respect to them.
    """

    __slots__ = ("field", "nvars", "terms")

    def __init__(self, field: FracField, nvars: int, terms: Mapping[MultiIndex, Any] = None):
        if not 1 <= nvars <= field.ngens:
            raise Error(f"variable count {nvars} out of range for {field.ngens} generators")
        clean: Dict[MultiIndex, RatFunc] = {}
        for (alpha, coeff) in (terms or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != nvars or min(alpha) < 0:
                raise Error(f"bad derivative multi-index {alpha} for {nvars} variables")
            coeff = to_field(coeff, field)
            if alpha in clean:
                coeff = clean[alpha] + coeff
            if coeff:
                clean[alpha] = coeff
            else:
                clean.pop(alpha, None)
        self.field = field
        self.nvars = nvars
        self.terms = clean

    @classmethod
    def zero(cls: Type[DiffOpType], field: FracField, nvars: int) -> DiffOpType:
        "The zero operator."
        return cls(field, nvars)

    @classmethod
    def multiplication(cls: Type[DiffOpType], field: FracField, nvars: int,
                       value: Any) -> DiffOpType:
        "Multiplication by a function (order 0)."
        return cls(field, nvars, {(0,) * nvars: value})

    @classmethod
    def partial(cls: Type[DiffOpType], field: FracField, nvars: int, i: int) -> DiffOpType:
        "∂_i for a 0-based coordinate index."
        if not 0 <= i < nvars:
            raise Error(f"coordinate index {i} out of range")
        return cls(field, nvars, {unit_index(nvars, i): field.one})

    def _check(self, other: "DiffOp"):
        if self.nvars != other.nvars:
            raise Error(f"variable-count mismatch: {self.nvars} vs {other.nvars}")
        if self.field != other.field:
            raise Error("operators live over different coefficient fields")

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        terms = dict(self.terms)
        for (alpha, coeff) in other.terms.items():
            terms[alpha] = terms.get(alpha, self.field.zero) + coeff
        return DiffOp(self.field, self.nvars, terms)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.field, self.nvars, {a: -c for (a, c) in self.terms.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __mul__(self, other: Any) -> "DiffOp":
        if isinstance(other, DiffOp):
            return compose(self, other)
        return self.scale(other)

    def __rmul__(self, other: Any) -> "DiffOp":
        return self.scale(other)

    def scale(self, value: Any) -> "DiffOp":
        "Left multiplication by a rational or a function."
        value = to_field(value, self.field)
        return DiffOp(self.field, self.nvars, {a: value * c for (a, c) in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return (self.nvars == other.nvars and self.field == other.field
                and not (self - other).terms)

    __hash__ = None # type: ignore

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        return f"DiffOp({format_op(self)})"

    @property
    def order(self) -> int:
        "Maximal |α| (-1 for the zero operator)."
        return max((sum(alpha) for alpha in self.terms), default=-1)

    def is_polynomial(self) -> bool:
        "Whether every coefficient has a constant denominator."
        return all(is_polynomial(c) for c in self.terms.values())

    def coefficient(self, alpha: Sequence[int]) -> RatFunc:
        "c_α (zero when absent)."
        return self.terms.get(tuple(alpha), self.field.zero)

    def part(self, order: int) -> "DiffOp":
        "Terms with |α| = order."
        return DiffOp(self.field, self.nvars,
                      {a: c for (a, c) in self.terms.items() if sum(a) == order})

    def first_order_part(self) -> "DiffOp":
        "Terms with |α| = 1."
        return self.part(1)

    def constant_term(self) -> RatFunc:
        "The order-zero coefficient."
        return self.coefficient((0,) * self.nvars)

def compose(left: DiffOp, right: DiffOp) -> DiffOp:
    "Exact product A∘B by Leibniz expansion c_α ∂^α (d_β ∂^β) = Σ C(α,γ) c_α (∂^γ d_β) ∂^{α−γ+β}."

    left._check(right) # pylint: disable=protected-access
    terms: Dict[MultiIndex, RatFunc] = {}
    zero = left.field.zero
    cache: Dict[Tuple[MultiIndex, MultiIndex], RatFunc] = {}
    for (alpha, coeff) in left.terms.items():
        for gamma in _below(alpha):
            weight = _binomial(alpha, gamma)
            rest = _sub_index(alpha, gamma)
            for (beta, other) in right.terms.items():
                key = (beta, gamma)
                if key not in cache:
                    cache[key] = derivative(other, gamma)
                if not cache[key]:
                    continue
                index = _add_index(rest, beta)
                terms[index] = terms.get(index, zero) + coeff * cache[key] * weight
    return DiffOp(left.field, left.nvars, terms)

def commutator(left: DiffOp, right: DiffOp) -> DiffOp:
    "[A, B] = A∘B − B∘A."
    return compose(left, right) - compose(right, left)

def apply(op: DiffOp, value: Any) -> Any:
    """Image of a polynomial or rational function.

    Returns a polynomial when the input is a polynomial and the image has a constant denominator.
    """

    was_poly = isinstance(value, PolyElement)
    func = to_field(value, op.field)
    result = op.field.zero
    for (alpha, coeff) in op.terms.items():
        result += coeff * derivative(func, alpha)
    if was_poly and is_polynomial(result):
        return as_poly(result)
    return result

def specialize(op: DiffOp, values: Mapping[str, RationalLike]) -> DiffOp:
    "Substitute rational values for inert parameters, landing in the field without them."

    field = op.field
    names = [str(symbol) for symbol in field.symbols]
    for name in values:
        if name not in names[op.nvars:]:
            raise Error(f"unknown parameter: {name}")
    kept = [name for (i, name) in enumerate(names) if i < op.nvars or name not in values]
    target = named_field(tuple(kept))
    images = [rational(values[name]) if name in values else target.gens[kept.index(name)]
              for name in names]
    return DiffOp(target, op.nvars,
                  {a: substitute(c, images, target) for (a, c) in op.terms.items()})

def embed(op: DiffOp, target: FracField, positions: Sequence[int], nvars: int) -> DiffOp:
    "Move an operator to `target`, sending generator i to generator positions[i]."

    if len(positions) != op.field.ngens:
        raise Error(f"expected {op.field.ngens} positions, got {len(positions)}")
    if any(positions[i] >= nvars for i in range(op.nvars)):
        raise Error("coordinates must map to coordinates")
    images = [target.gens[p] for p in positions]
    terms = {}
    for (alpha, coeff) in op.terms.items():
        index = [0] * nvars
        for (i, times) in enumerate(alpha):
            index[positions[i]] += times
        terms[tuple(index)] = substitute(coeff, images, target)
    return DiffOp(target, nvars, terms)

def depends_on(value: RatFunc, i: int) -> bool:
    "Whether a rational function involves generator i."
    return value.numer.degree(i) > 0 or value.denom.degree(i) > 0

def split_variable(op: DiffOp, index: int) -> Tuple[DiffOp, DiffOp]:
    """Split A = T + (1/v) B along the coordinate v = generator `index`.

    T involves only v and ∂_v, B neither; each comes back over its own field with the
    parameters kept. A mixed term raises Error.
    """

    field = op.field
    names = [str(symbol) for symbol in field.symbols]
    params = tuple(names[op.nvars:])
    others = [i for i in range(op.nvars) if i != index]
    if not others:
        raise Error("nothing to split off a one-variable operator")
    head_field = named_field((names[index],) + params)
    tail_field = named_field(tuple(names[i] for i in others) + params)
    head_images: List[Any] = [0] * field.ngens
    tail_images: List[Any] = [0] * field.ngens
    head_images[index] = head_field.gens[0]
    for (j, i) in enumerate(others):
        tail_images[i] = tail_field.gens[j]
    for j in range(len(params)):
        head_images[op.nvars + j] = head_field.gens[1 + j]
        tail_images[op.nvars + j] = tail_field.gens[len(others) + j]

    head: Dict[MultiIndex, RatFunc] = {}
    tail: Dict[MultiIndex, RatFunc] = {}
    gen = field.gens[index]
    for (alpha, coeff) in op.terms.items():
        if all(alpha[i] == 0 for i in others) and not any(depends_on(coeff, i) for i in others):
            head[(alpha[index],)] = substitute(coeff, head_images, head_field)
        elif alpha[index] == 0 and not depends_on(coeff * gen, index):
            tail[tuple(alpha[i] for i in others)] = substitute(coeff * gen, tail_images, tail_field)
        else:
            raise Error(f"operator does not split along {names[index]}: term {alpha}")
    return (DiffOp(head_field, 1, head), DiffOp(tail_field, len(others), tail))

def coefficient_vector(op: DiffOp) -> Dict[Tuple[MultiIndex, Tuple[int, ...]], Rational]:
    "Flatten a polynomial-coefficient operator to {(α, monomial): rational}."
    if not op.is_polynomial():
        raise DomainError("only polynomial-coefficient operators can be flattened")
    vector = {}
    for (alpha, coeff) in op.terms.items():
        for (monom, value) in as_poly(coeff).iterterms():
            vector[(alpha, monom)] = value
    return vector

def fit_combination(target: DiffOp, basis: Sequence[DiffOp]) -> Optional[List[Rational]]:
    "Rational λ with target = Σ λ_i basis_i exactly, or None."

    if not basis:
        return None if target else []
    vectors = [coefficient_vector(op) for op in basis]
    goal = coefficient_vector(target)
    keys = sorted(set(goal).union(*vectors), key=repr)
    if not keys:
        return [QQ.zero] * len(basis)
    matrix = qmatrix_from_columns([[v.get(key, QQ.zero) for key in keys] for v in vectors])
    return solve_linear(matrix, [goal.get(key, QQ.zero) for key in keys])

def _format_index(alpha: MultiIndex) -> str:
    parts = []
    for (i, times) in enumerate(alpha):
        if times == 1:
            parts.append(f"d{i + 1}")
        elif times:
            parts.append(f"d{i + 1}^{times}")
    return " * ".join(parts)

def format_op(op: DiffOp) -> str:
    "Deterministic text form: terms by descending graded-lex multi-index."
    if not op.terms:
        return "0"
    parts = []
    for alpha in sorted(op.terms, key=grlex, reverse=True):
        index = _format_index(alpha)
        coeff = f"({format_ratfunc(op.terms[alpha])})"
        parts.append(f"{coeff} * {index}" if index else coeff)
    return " + ".join(parts)

GL_KINDS = ("lower", "diag", "euler", "raise")

def gl_generator(kind: str, indices: Sequence[int], k: Optional[RationalLike], n: int,
                 field: Optional[FracField] = None) -> DiffOp:
    """First-order generators of gl(n+1) with 1-based indices.

    lower (i): ∂_i; diag (i, j): x_i ∂_j; euler: Σ x_j ∂_j − k; raise (i): x_i (Σ x_j ∂_j − k).
    """

    field = field or coordinate_field(n)
    indices = list(indices)
    if any(not 1 <= i <= n for i in indices):
        raise Error(f"generator indices {indices} out of range 1..{n}")
    x = field.gens
    if kind == "lower":
        (i,) = indices
        return DiffOp.partial(field, n, i - 1)
    if kind == "diag":
        (i, j) = indices
        return DiffOp(field, n, {unit_index(n, j - 1): x[i - 1]})
    if kind in ("euler", "raise"):
        if k is None:
            raise Error(f"the {kind} generator needs a degree k")
        euler = {unit_index(n, j): x[j] for j in range(n)}
        euler[(0,) * n] = -to_field(rational(k), field)
        op = DiffOp(field, n, euler)
        if kind == "euler":
            if indices:
                raise Error("the euler generator takes no index")
            return op
        (i,) = indices
        return op.scale(x[i - 1])
    raise Error(f"unknown generator kind: {kind}")

class GaugeFactor(NamedTuple):
    "Π base_t^{exp_t} · exp(arg)."

    # (base, exponent) pairs; bases are polynomials or rational functions.
    bases: Tuple[Tuple[Any, Rational], ...] = ()
    # Exponential argument (None for no exponential).
    exp_arg: Any = None

    def log_derivative(self, field: FracField, i: int) -> RatFunc:
        "∂_i log g as a rational function (0-based index)."
        gen = field.gens[i]
        total = field.zero
        for (base, exponent) in self.bases:
            base = to_field(base, field)
            if not base:
                raise DomainError("gauge factor with a zero base")
            total += base.diff(gen) * rational(exponent) / base
        if self.exp_arg is not None:
            total += to_field(self.exp_arg, field).diff(gen)
        return total

    def inverse(self) -> "GaugeFactor":
        "g⁻¹."
        return GaugeFactor(tuple((b, -rational(e)) for (b, e) in self.bases),
                           None if self.exp_arg is None else -self.exp_arg)

    def times(self, other: "GaugeFactor") -> "GaugeFactor":
        "Product of two gauge factors."
        if self.exp_arg is None:
            arg = other.exp_arg
        elif other.exp_arg is None:
            arg = self.exp_arg
        else:
            arg = self.exp_arg + other.exp_arg
        return GaugeFactor(self.bases + other.bases, arg)

def gauge_conjugate(op: DiffOp, gauge: GaugeFactor, forward: bool = True) -> DiffOp:
    """g∘A∘g⁻¹ (forward) or g⁻¹∘A∘g.

    Uses g∘∂_i∘g⁻¹ = ∂_i − w_i with w_i = ∂_i log g; the shifted derivatives commute.
    """

    field = op.field
    sign = -1 if forward else 1
    shifted = [DiffOp.partial(field, op.nvars, i) + DiffOp.multiplication(
        field, op.nvars, gauge.log_derivative(field, i) * sign) for i in range(op.nvars)]
    powers: List[Dict[int, DiffOp]] = [
        {0: DiffOp.multiplication(field, op.nvars, 1)} for _ in range(op.nvars)]

    def power(i: int, times: int) -> DiffOp:
        table = powers[i]
        if times not in table:
            table[times] = compose(power(i, times - 1), shifted[i])
        return table[times]

    result = DiffOp.zero(field, op.nvars)
    for (alpha, coeff) in op.terms.items():
        term = DiffOp.multiplication(field, op.nvars, coeff)
        for (i, times) in enumerate(alpha):
            if times:
                term = compose(term, power(i, times))
        result = result + term
    return result

class CoordMap(NamedTuple):
    """Change of coordinates old → new.

    Both fields carry the same trailing parameter generators, which map to themselves.
    """

    old: FracField
    old_nvars: int
    new: FracField
    new_nvars: int
    # New coordinates as functions of the old ones (elements of `old`).
    forward: Tuple[RatFunc, ...]
    # Old coordinates as functions of the new ones (elements of `new`), when birational.
    inverse: Optional[Tuple[RatFunc, ...]] = None

    @property
    def params(self) -> int:
        "Number of shared parameter generators."
        return self.old.ngens - self.old_nvars

    def forward_images(self) -> List[RatFunc]:
        "Images of every generator of `new` in `old` (coordinates, then parameters)."
        return list(self.forward) + list(self.old.gens[self.old_nvars:])

    def inverse_images(self) -> List[RatFunc]:
        "Images of every generator of `old` in `new`."
        if self.inverse is None:
            raise DomainError("coordinate map has no inverse")
        return list(self.inverse) + list(self.new.gens[self.new_nvars:])

def coord_map(old: FracField, old_nvars: int, new: FracField, new_nvars: int,
              forward: Sequence[Any], inverse: Optional[Sequence[Any]] = None,
              seed: int = 0, probes: int = 3) -> CoordMap:
    "Build a CoordMap, checking the Jacobian and, when given, the inverse on random points."

    if old.ngens - old_nvars != new.ngens - new_nvars:
        raise Error("coordinate charts must share their parameters")
    if len(forward) != new_nvars:
        raise Error(f"expected {new_nvars} forward images, got {len(forward)}")
    mapping = CoordMap(old, old_nvars, new, new_nvars,
                       tuple(to_field(f, old) for f in forward),
                       None if inverse is None else tuple(to_field(f, new) for f in inverse))
    if mapping.inverse is not None and len(mapping.inverse) != old_nvars:
        raise Error(f"expected {old_nvars} inverse images, got {len(mapping.inverse)}")
    if old_nvars == new_nvars:
        jacobian = DomainMatrix(
            [[f.diff(old.gens[i]) for i in range(old_nvars)] for f in mapping.forward],
            (new_nvars, old_nvars), old.to_domain())
        if not jacobian.det():
            raise DomainError("coordinate map has an identically singular Jacobian")
    if mapping.inverse is not None:
        _probe_inverse(mapping, random.Random(seed), probes)
    return mapping

def _probe_inverse(mapping: CoordMap, rng: random.Random, probes: int):
    checked = 0
    for _ in range(20 * probes):
        point = [QQ(rng.randint(1, 29), rng.randint(30, 97)) for _ in range(mapping.new.ngens)]
        try:
            old_point = [evaluate_point(f, point) for f in mapping.inverse_images()]
            back = [evaluate_point(f, old_point) for f in mapping.forward_images()]
        except DomainError:
            continue
        if back != point:
            raise DomainError("inverse map does not invert the forward map")
        checked += 1
        if checked == probes:
            return
    raise DomainError("could not find probe points avoiding the map's denominators")

def _descend_poly(poly: Any, mapping: CoordMap) -> Any:
    old_ring = mapping.old.ring
    new_ring = mapping.new.ring
    images = [as_poly(f) for f in mapping.forward_images()]
    candidates = [m for d in range(max((sum(m) for m in poly.keys()), default=0) + 1) for m in monomials(new_ring.ngens, d)]
    columns = []
    for monom in candidates:
        image = old_ring.one
        for (i, exp) in enumerate(monom):
            if exp:
                image *= images[i] ** exp
        columns.append(image)
    keys = sorted(set(poly.keys()).union(*(c.keys() for c in columns)))
    matrix = qmatrix_from_columns([[c.get(key, QQ.zero) for key in keys] for c in columns])
    solution = solve_linear(matrix, [poly.get(key, QQ.zero) for key in keys])
    if solution is None:
        raise DomainError("coefficient is not a function of the new coordinates")
    return new_ring.from_dict({m: c for (m, c) in zip(candidates, solution) if c})

def descend(value: RatFunc, mapping: CoordMap) -> RatFunc:
    "Rewrite a function of the old coordinates as a function of the new ones (polynomial maps)."
    try:
        numer = _descend_poly(value.numer, mapping)
        denom = _descend_poly(value.denom, mapping)
    except DomainError as ex:
        raise DomainError(f"cannot express {value} in the new coordinates: {ex}") from ex
    return mapping.new.field_new(numer) / mapping.new.field_new(denom)

def change_coordinates(op: DiffOp, mapping: CoordMap) -> DiffOp:
    """Rewrite an operator in new coordinates.

    c′_β = (1/β!) Σ_{γ≤β} C(β,γ) (−f)^{β−γ} A(f^γ) with f the forward map, then expressed in the
    new variables by the inverse map or, lacking one, by exact descent.
    """

    if op.field != mapping.old or op.nvars != mapping.old_nvars:
        raise Error("operator does not live on the map's source chart")
    f = mapping.forward
    terms = {}
    for beta in indices_up_to(mapping.new_nvars, max(op.order, 0)):
        total = mapping.old.zero
        for gamma in _below(beta):
            power = mapping.old.one
            for (j, g) in enumerate(gamma):
                if g:
                    power *= f[j] ** g
            image = to_field(apply(op, power), mapping.old)
            if not image:
                continue
            weight = mapping.old.one * _binomial(beta, gamma)
            for (j, e) in enumerate(_sub_index(beta, gamma)):
                if e:
                    weight *= (-f[j]) ** e
            total += weight * image
        if not total:
            continue
        total = total / math.prod(math.factorial(b) for b in beta)
        if mapping.inverse is not None:
            terms[beta] = substitute(total, mapping.inverse_images(), mapping.new)
        else:
            terms[beta] = descend(total, mapping)
    result = DiffOp(mapping.new, mapping.new_nvars, terms)
    _logger.debug("changed coordinates of an order %d operator", op.order)
    return result
