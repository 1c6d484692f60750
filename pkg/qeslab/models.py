"Operators, metrics, potentials and gauge factors of the sphere and Euclidean families."

import enum
import logging
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple, Type, TypeVar

from sympy.polys.domains import QQ # type: ignore
from sympy.polys.fields import FracField # type: ignore
from sympy.polys.matrices import DomainMatrix # type: ignore

from qeslab.diffop import (
    CoordMap,
    DiffOp,
    GaugeFactor,
    change_coordinates,
    compose,
    coord_map,
    gauge_conjugate,
    gl_generator,
    split_variable,
    unit_index,
)
from qeslab.error import DomainError, Error
from qeslab.exactalg import (
    RatFunc,
    Rational,
    RationalLike,
    coordinate_field,
    named_field,
    rational,
    substitute,
    to_field,
)

_logger = logging.getLogger(__name__)

HALF = QQ(1, 2)

@enum.unique
class RadialSign(enum.Enum):
    "Sign of the (n+1)/2 term in the x-linear first-order coefficient of h^(ES)."

    # ½ + γ_i − (G + (n+1)/2) x_i: the Lauricella operator.
    DERIVED = enum.auto()
    # ½ + γ_i − (G − (n+1)/2) x_i: the convention of the printed radial equation and spectra.
    PRINTED = enum.auto()

@enum.unique
class EuclidStage(enum.Enum):
    "Operators of the Euclidean family, all in squared coordinates Y_j = y_j²."

    # −2Σ(2Y∂² + ∂) + ω²ΣY + Σ(γ′² − ¼)/Y.
    H_ES = enum.auto()
    # −4[ΣY∂² − Σ(γ′ − 1 + ωY)∂].
    H_HAT_ES = enum.auto()
    # (ΣY)(ΣY∂ − k).
    B = enum.auto()
    # ĥ^(ES) + bB.
    H_HAT_QES = enum.auto()
    # Gauge rotation of ĥ^(QES) back to Schrödinger form.
    H_QES = enum.auto()

SphereParamsType = TypeVar("SphereParamsType", bound="SphereParams")
class SphereParams(NamedTuple):
    "Parameters of the sphere family."

    # Dimension of the sphere.
    n: int
    # γ_1..γ_{n+1} (rationals, or field elements for symbolic families).
    gammas: Tuple[Any, ...]
    # Coefficient of the raising generators.
    a: Any = QQ(0)
    # Degree bound of the invariant subspace.
    k: int = 0

    @classmethod
    def make(cls: Type[SphereParamsType], n: int, gammas: Optional[Sequence[RationalLike]] = None,
             a: RationalLike = 0, k: int = 0) -> SphereParamsType:
        "Validate and build rational parameters; γ defaults to zeros."
        if n < 1:
            raise Error(f"sphere dimension must be positive: {n}")
        if k < 0:
            raise Error(f"degree bound must be nonnegative: {k}")
        values = tuple(rational(g) for g in gammas) if gammas is not None else (QQ(0),) * (n + 1)
        if len(values) != n + 1:
            raise Error(f"the {n}-sphere needs {n + 1} gammas, got {len(values)}")
        return cls(n, values, rational(a), k)

    @property
    def G(self) -> Any: # pylint: disable=invalid-name
        "Σ γ_ℓ over all n+1 parameters."
        return self.partial_sum(self.n + 1)

    def partial_sum(self, j: int) -> Any:
        "G_j = γ_1 + ... + γ_j."
        total: Any = QQ(0)
        for value in self.gammas[:j]:
            total = value + total
        return total

    def a_coeff(self, i: int) -> Any:
        "a_i = γ_i(γ_i − 1) for a 1-based index."
        gamma = self.gammas[i - 1]
        return gamma * (gamma - 1)

EuclidParamsType = TypeVar("EuclidParamsType", bound="EuclidParams")
class EuclidParams(NamedTuple):
    "Parameters of the Euclidean family."

    n: int
    # γ′_1..γ′_n.
    gammas: Tuple[Rational, ...]
    omega: Rational = QQ(1)
    b: Rational = QQ(0)
    k: int = 0

    @classmethod
    def make(cls: Type[EuclidParamsType], n: int, gammas: Optional[Sequence[RationalLike]] = None,
             omega: RationalLike = 1, b: RationalLike = 0, k: int = 0) -> EuclidParamsType:
        "Validate and build parameters; γ′ defaults to zeros."
        if n < 1:
            raise Error(f"Euclidean dimension must be positive: {n}")
        if k < 0:
            raise Error(f"degree bound must be nonnegative: {k}")
        values = tuple(rational(g) for g in gammas) if gammas is not None else (QQ(0),) * n
        if len(values) != n:
            raise Error(f"E^{n} needs {n} gammas, got {len(values)}")
        return cls(n, values, rational(omega), rational(b), k)

    @property
    def gamma_sum(self) -> Rational:
        "Σ γ′_j."
        return sum(self.gammas, QQ(0))

    @property
    def e0(self) -> Rational:
        "Ground energy 2ω(n − Σγ′) of the ψ₀ rotation."
        return 2 * self.omega * (self.n - self.gamma_sum)

    @property
    def printed_e0(self) -> Rational:
        "The printed ground energy 2ω(Σγ′ − n)."
        return 2 * self.omega * (self.gamma_sum - self.n)

def _index(n: int, *positions: int) -> Tuple[int, ...]:
    alpha = [0] * n
    for i in positions:
        alpha[i] += 1
    return tuple(alpha)

def _gammas(p: SphereParams, field: FracField) -> Tuple[List[RatFunc], RatFunc]:
    gammas = [to_field(g, field) for g in p.gammas]
    return (gammas, sum(gammas, field.zero))

def build_es_sphere(p: SphereParams, field: Optional[FracField] = None,
                    sign: RadialSign = RadialSign.DERIVED) -> DiffOp:
    "h^(ES) = Σ(x_iδ_ij − x_ix_j)∂_i∂_j + Σ(½ + γ_i − (G + (n+1)/2)x_i)∂_i."

    n = p.n
    field = field or coordinate_field(n)
    x = field.gens[:n]
    (gammas, big_g) = _gammas(p, field)
    shift = QQ(n + 1, 2) if sign is RadialSign.DERIVED else -QQ(n + 1, 2)
    terms = {}
    for i in range(n):
        terms[_index(n, i, i)] = x[i] - x[i] ** 2
        for j in range(i + 1, n):
            terms[_index(n, i, j)] = -2 * x[i] * x[j]
        terms[_index(n, i)] = HALF + gammas[i] - (big_g + shift) * x[i]
    return DiffOp(field, n, terms)

def _es_from_generators(p: SphereParams, field: Optional[FracField], shift: Rational) -> DiffOp:
    n = p.n
    field = field or coordinate_field(n)
    (gammas, big_g) = _gammas(p, field)
    lower = [gl_generator("lower", (i,), None, n, field) for i in range(1, n + 1)]
    diag = [gl_generator("diag", (i, i), None, n, field) for i in range(1, n + 1)]
    op = DiffOp.zero(field, n)
    for i in range(n):
        op += compose(diag[i], lower[i])
        for j in range(n):
            op -= compose(diag[i], diag[j])
        op += lower[i].scale(HALF + gammas[i]) - diag[i].scale(big_g + shift)
    return op

def build_es_from_generators(p: SphereParams, field: Optional[FracField] = None) -> DiffOp:
    "h^(ES) written through J⁻_i and J⁰_ii; the Euler term carries G + (n−1)/2."
    return _es_from_generators(p, field, QQ(p.n - 1, 2))

def build_es_from_printed_generators(p: SphereParams, field: Optional[FracField] = None) -> DiffOp:
    "The generator form with the printed Euler coefficient G + (n+1)/2."
    return _es_from_generators(p, field, QQ(p.n + 1, 2))

def raising_sum(field: FracField, n: int, k: int) -> DiffOp:
    "Σ J_i⁺(k) = x(Σx_j∂_j − k)."
    op = DiffOp.zero(field, n)
    for i in range(1, n + 1):
        op += gl_generator("raise", (i,), k, n, field)
    return op

def build_qes_sphere(p: SphereParams, field: Optional[FracField] = None,
                     sign: RadialSign = RadialSign.DERIVED) -> DiffOp:
    "h^(QES) = h^(ES) + a Σ J_i⁺(k)."
    field = field or coordinate_field(p.n)
    return build_es_sphere(p, field, sign) + raising_sum(field, p.n, p.k).scale(to_field(p.a, field))

def build_integral(kind: str, i: int, j: Optional[int], p: SphereParams,
                   field: Optional[FracField] = None, printed: bool = False) -> DiffOp:
    """Second-order integrals with 1-based indices.

    Iij: x_ix_j(∂_i − ∂_j)² + [(γ_ix_j − γ_jx_i) + ½(x_j − x_i)](∂_i − ∂_j), i < j.
    Ii: x_i(1−x)∂_i² + (γ_i(1−x) − γ_{n+1}x_i + ½((1−x) − x_i))∂_i; `printed` swaps the last
    term for ½((1−x) + (2n+1)x_i).
    """

    n = p.n
    field = field or coordinate_field(n)
    x = field.gens[:n]
    (gammas, _) = _gammas(p, field)
    if kind == "Iij":
        if j is None or not 1 <= i < j <= n:
            raise Error(f"I_ij needs 1 <= i < j <= {n}, got ({i}, {j})")
        (xi, xj, gi, gj) = (x[i - 1], x[j - 1], gammas[i - 1], gammas[j - 1])
        diff = DiffOp.partial(field, n, i - 1) - DiffOp.partial(field, n, j - 1)
        first = (gi * xj - gj * xi) + HALF * (xj - xi)
        return compose(diff, diff).scale(xi * xj) + diff.scale(first)
    if kind == "Ii":
        if not 1 <= i <= n:
            raise Error(f"I_i needs 1 <= i <= {n}, got {i}")
        xi = x[i - 1]
        rest = 1 - sum(x, field.zero)
        tail = rest + (2 * n + 1) * xi if printed else rest - xi
        first = gammas[i - 1] * rest - gammas[n] * xi + HALF * tail
        return DiffOp(field, n, {_index(n, i - 1, i - 1): xi * rest, _index(n, i - 1): first})
    raise Error(f"unknown integral kind: {kind}")

def integrals(p: SphereParams, field: Optional[FracField] = None) -> List[Tuple[str, DiffOp]]:
    "All n(n+1)/2 integrals, named I{i},{j} and I_{i}."
    field = field or coordinate_field(p.n)
    result = [(f"I{i},{j}", build_integral("Iij", i, j, p, field))
              for i in range(1, p.n + 1) for j in range(i + 1, p.n + 1)]
    result += [(f"I_{i}", build_integral("Ii", i, None, p, field)) for i in range(1, p.n + 1)]
    return result

def build_L_chain(p: SphereParams, field: Optional[FracField] = None) -> List[DiffOp]: # pylint: disable=invalid-name
    "L_ℓ = Σ_{i≤ℓ} I_{i,ℓ+1} for ℓ = 1..n−1."
    if p.n < 2:
        raise Error("the L chain needs n >= 2")
    field = field or coordinate_field(p.n)
    chain = []
    for ell in range(1, p.n):
        op = DiffOp.zero(field, p.n)
        for i in range(1, ell + 1):
            op += build_integral("Iij", i, ell + 1, p, field)
        chain.append(op)
    return chain

class MetricData(NamedTuple):
    "Contravariant metric with its determinant and Laplace–Beltrami operator."

    field: FracField
    nvars: int
    contravariant: Tuple[Tuple[RatFunc, ...], ...]
    determinant: RatFunc
    laplacian: DiffOp

    def first_order(self) -> List[RatFunc]:
        "Coefficients g^b of ∂_b in the Laplace–Beltrami operator."
        return [self.laplacian.coefficient(unit_index(self.nvars, b)) for b in range(self.nvars)]

def _matrix(field: FracField, rows: Sequence[Sequence[RatFunc]]) -> DomainMatrix:
    return DomainMatrix([list(row) for row in rows], (len(rows), len(rows)), field.to_domain())

def determinant(field: FracField, rows: Sequence[Sequence[RatFunc]]) -> RatFunc:
    "Exact determinant of a square matrix of rational functions."
    return _matrix(field, rows).det()

def metric_from_contravariant(field: FracField, nvars: int,
                              rows: Sequence[Sequence[Any]]) -> MetricData:
    """Assemble Δ_g = g^{ab}∂_a∂_b + g^b∂_b.

    g^b = Σ_a ∂_a g^{ab} − ½ Σ_a g^{ab} ∂_a(det g^{..}) / det g^{..}, so the square root of
    the determinant never appears.
    """

    matrix = tuple(tuple(to_field(value, field) for value in row) for row in rows)
    if any(not matrix[a][b] - matrix[b][a] == field.zero
           for a in range(nvars) for b in range(nvars)):
        raise Error("contravariant metric must be symmetric")
    det = determinant(field, matrix)
    if not det:
        raise DomainError("singular metric")
    gens = field.gens
    log_det = [det.diff(gens[a]) / det for a in range(nvars)]
    terms = {}
    for a in range(nvars):
        terms[_index(nvars, a, a)] = matrix[a][a]
        for b in range(a + 1, nvars):
            terms[_index(nvars, a, b)] = 2 * matrix[a][b]
    for b in range(nvars):
        coeff = field.zero
        for a in range(nvars):
            coeff += matrix[a][b].diff(gens[a]) - HALF * matrix[a][b] * log_det[a]
        terms[_index(nvars, b)] = coeff
    return MetricData(field, nvars, matrix, det, DiffOp(field, nvars, terms))

def metric_from_operator(op: DiffOp) -> MetricData:
    "Read g^{ab} off the second-order part of an operator, keeping the operator as Δ_g."
    n = op.nvars
    rows = [[op.coefficient(_index(n, a, a)) if a == b else op.coefficient(_index(n, a, b)) * HALF
             for b in range(n)] for a in range(n)]
    matrix = tuple(tuple(row) for row in rows)
    return MetricData(op.field, n, matrix, determinant(op.field, matrix), op)

def sphere_metric(n: int, field: Optional[FracField] = None) -> MetricData:
    "g^{ij} = x_iδ_ij − x_ix_j on the simplex chart."
    field = field or coordinate_field(n)
    x = field.gens[:n]
    rows = [[(x[i] if i == j else 0) - x[i] * x[j] for j in range(n)] for i in range(n)]
    return metric_from_contravariant(field, n, rows)

def sphere_metric_cartesian(n: int, field: Optional[FracField] = None) -> MetricData:
    "4g^{ij} = δ_ij − s_is_j on the Cartesian chart."
    field = field or coordinate_field(n, "s")
    s = field.gens[:n]
    rows = [[((1 if i == j else 0) - s[i] * s[j]) * QQ(1, 4) for j in range(n)] for i in range(n)]
    return metric_from_contravariant(field, n, rows)

def covariant_metric(m: MetricData) -> List[List[RatFunc]]:
    "Exact inverse of the contravariant metric."
    return _matrix(m.field, m.contravariant).inv().to_list()

def covariant_metric_printed(n: int, field: Optional[FracField] = None) -> List[List[RatFunc]]:
    "The printed g_ij = 1/(1−x) − δ_ij/x_i."
    field = field or coordinate_field(n)
    x = field.gens[:n]
    rest = 1 - sum(x, field.zero)
    return [[1 / rest - (1 / x[i] if i == j else 0) for j in range(n)] for i in range(n)]

def christoffels(m: MetricData, covariant: List[List[RatFunc]]) -> List[List[List[RatFunc]]]:
    "Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij), indexed [k][i][j]."
    n = m.nvars
    gens = m.field.gens
    inv = m.contravariant
    dg = [[[covariant[i][j].diff(gens[l]) for l in range(n)] for j in range(n)] for i in range(n)]
    gammas = [[[m.field.zero] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                total = m.field.zero
                for l in range(n):
                    if inv[k][l]:
                        total += inv[k][l] * (dg[j][l][i] + dg[i][l][j] - dg[i][j][l])
                gammas[k][i][j] = gammas[k][j][i] = total * HALF
    return gammas

def scalar_curvature(m: MetricData) -> RatFunc:
    "R = g^{jk} R_jk with R_jk = ∂_iΓ^i_jk − ∂_kΓ^i_ji + Γ^i_ip Γ^p_jk − Γ^i_kp Γ^p_ij."

    if m.nvars < 2:
        raise Error("scalar curvature needs at least two dimensions")
    n = m.nvars
    gens = m.field.gens
    covariant = covariant_metric(m)
    gam = christoffels(m, covariant)
    total = m.field.zero
    for j in range(n):
        for k in range(j, n):
            ricci = m.field.zero
            for i in range(n):
                ricci += gam[i][j][k].diff(gens[i]) - gam[i][j][i].diff(gens[k])
                for p in range(n):
                    ricci += gam[i][i][p] * gam[p][j][k] - gam[i][k][p] * gam[p][i][j]
            total += m.contravariant[j][k] * ricci * (1 if j == k else 2)
    return total

def invariant_map(n: int) -> CoordMap:
    "s ↦ τ invariants of the reflection group: τ = s² (n=1), (s₁²+s₂², s₁²s₂²) (n=2)."
    old = coordinate_field(n, "s")
    new = coordinate_field(n, "tau")
    s = old.gens
    if n == 1:
        forward = [s[0] ** 2]
    elif n == 2:
        forward = [s[0] ** 2 + s[1] ** 2, s[0] ** 2 * s[1] ** 2]
    else:
        raise Error(f"invariant coordinates are tabulated for n <= 2, got {n}")
    return coord_map(old, n, new, n, forward)

def invariant_metric(n: int) -> MetricData:
    "The Cartesian Laplace–Beltrami operator rewritten in invariant coordinates."
    op = change_coordinates(sphere_metric_cartesian(n).laplacian, invariant_map(n))
    return metric_from_operator(op)

def printed_invariant_metric(n: int) -> Tuple[List[List[RatFunc]], List[RatFunc]]:
    "Printed invariant-coordinate components and first-order coefficients."
    field = coordinate_field(n, "tau")
    t = field.gens
    if n == 1:
        return ([[t[0] * (1 - t[0])]], [HALF + t[0]])
    if n == 2:
        off = 2 * t[1] * (1 - t[0])
        return ([[t[0] * (1 - t[0]), off], [off, t[1] * (t[0] - 4 * t[1])]],
                [1 - QQ(3, 2) * t[0], HALF * (t[0] - 10 * t[1])])
    raise Error(f"invariant coordinates are tabulated for n <= 2, got {n}")

def potentials(p: SphereParams, chart: str = "simplex", which: str = "ES",
               field: Optional[FracField] = None) -> RatFunc:
    """V₀ = Σγ_i(γ_i−1)/x_i + γ_{n+1}(γ_{n+1}−1)/(1−x); QES adds a²x² − a(a − 2G − n − 1 + 4k)x.

    The cartesian chart substitutes x_i = s_i².
    """

    n = p.n
    simplex = coordinate_field(n)
    x = simplex.gens[:n]
    (gammas, big_g) = _gammas(p, simplex)
    total_x = sum(x, simplex.zero)
    value = sum((gammas[i] * (gammas[i] - 1) / x[i] for i in range(n)), simplex.zero)
    value += gammas[n] * (gammas[n] - 1) / (1 - total_x)
    if which == "QES":
        a = to_field(p.a, simplex)
        value += a ** 2 * total_x ** 2 - a * (a - 2 * big_g - n - 1 + 4 * p.k) * total_x
    elif which != "ES":
        raise Error(f"unknown potential family: {which}")
    if chart == "simplex":
        return value if field is None else substitute(value, list(field.gens), field)
    if chart == "cartesian":
        target = field or coordinate_field(n, "s")
        return substitute(value, [s ** 2 for s in target.gens[:n]], target)
    raise Error(f"unknown chart: {chart}")

def gauge_factor_es(p: SphereParams, field: Optional[FracField] = None) -> GaugeFactor:
    "Ψ₀ = Π x_i^{γ_i/2} (1−x)^{γ_{n+1}/2}."
    field = field or coordinate_field(p.n)
    x = field.gens[:p.n]
    bases = [(x[i], rational(p.gammas[i]) * HALF) for i in range(p.n)]
    bases.append((1 - sum(x, field.zero), rational(p.gammas[p.n]) * HALF))
    return GaugeFactor(tuple(bases))

def gauge_factor_qes(p: SphereParams, field: Optional[FracField] = None,
                     corrected: bool = True) -> GaugeFactor:
    """Ψ₀ exp(−ax/2), times (1−x)^{−a/2} when `corrected`.

    Only the corrected factor removes every a-proportional first-order term.
    """
    field = field or coordinate_field(p.n)
    total = sum(field.gens[:p.n], field.zero)
    a = rational(p.a)
    extra = ((1 - total, -a * HALF),) if corrected else ()
    return GaugeFactor(gauge_factor_es(p, field).bases + extra, -a * HALF * total)

def euclid_ground_state(p: EuclidParams, field: Optional[FracField] = None) -> GaugeFactor:
    "ψ₀ = exp(−(ω/2)ΣY) Π Y_j^{¼ − γ′_j/2}."
    field = field or coordinate_field(p.n, "Y")
    y = field.gens[:p.n]
    bases = tuple((y[j], QQ(1, 4) - p.gammas[j] * HALF) for j in range(p.n))
    return GaugeFactor(bases, -p.omega * HALF * sum(y, field.zero))

def gauge_factor_euclid(p: EuclidParams, field: Optional[FracField] = None) -> GaugeFactor:
    "ψ₀ U⁻¹ with U = exp((b/16)(ΣY)²)."
    field = field or coordinate_field(p.n, "Y")
    total = sum(field.gens[:p.n], field.zero)
    return euclid_ground_state(p, field).times(GaugeFactor((), -p.b * QQ(1, 16) * total ** 2))

def build_euclid(p: EuclidParams, stage: EuclidStage, field: Optional[FracField] = None) -> DiffOp:
    "Operators of the Euclidean family in Y-coordinates."

    n = p.n
    field = field or coordinate_field(n, "Y")
    y = field.gens[:n]
    total = sum(y, field.zero)
    if stage is EuclidStage.H_ES:
        terms = {(0,) * n: p.omega ** 2 * total + sum(
            ((g ** 2 - QQ(1, 4)) / y[j] for (j, g) in enumerate(p.gammas)), field.zero)}
        for j in range(n):
            terms[_index(n, j, j)] = -4 * y[j]
            terms[_index(n, j)] = field.one * -2
        return DiffOp(field, n, terms)
    if stage is EuclidStage.H_HAT_ES:
        terms = {}
        for j in range(n):
            terms[_index(n, j, j)] = -4 * y[j]
            terms[_index(n, j)] = 4 * (p.gammas[j] - 1 + p.omega * y[j])
        return DiffOp(field, n, terms)
    if stage is EuclidStage.B:
        return raising_sum(field, n, p.k)
    if stage is EuclidStage.H_HAT_QES:
        return build_euclid(p, EuclidStage.H_HAT_ES, field) + raising_sum(field, n, p.k).scale(p.b)
    if stage is EuclidStage.H_QES:
        rotated = gauge_conjugate(build_euclid(p, EuclidStage.H_HAT_QES, field),
                                  gauge_factor_euclid(p, field), forward=True)
        return rotated + DiffOp.multiplication(field, n, p.e0)
    raise Error(f"unknown Euclidean stage: {stage}")

def build_euclid_cartesian(p: EuclidParams, field: Optional[FracField] = None) -> DiffOp:
    "H = −Σ∂_{y_j}² + ω²Σy_j² + Σ(γ′_j² − ¼)/y_j²."
    n = p.n
    field = field or coordinate_field(n, "y")
    y = field.gens[:n]
    terms = {(0,) * n: p.omega ** 2 * sum((v ** 2 for v in y), field.zero) + sum(
        ((g ** 2 - QQ(1, 4)) / y[j] ** 2 for (j, g) in enumerate(p.gammas)), field.zero)}
    for j in range(n):
        terms[_index(n, j, j)] = field.one * -1
    return DiffOp(field, n, terms)

def square_map(n: int) -> CoordMap:
    "Y_j = y_j² (not birational; coefficients descend)."
    old = coordinate_field(n, "y")
    return coord_map(old, n, coordinate_field(n, "Y"), n, [v ** 2 for v in old.gens[:n]])

def euclid_added_potential(p: EuclidParams, field: Optional[FracField] = None) -> RatFunc:
    "The printed (b²/16)S³ + (b/2)[S(Σγ′ − n − 2k − 1) + ωS²] with S = ΣY."
    field = field or coordinate_field(p.n, "Y")
    total = sum(field.gens[:p.n], field.zero)
    b = p.b
    return (b ** 2 * QQ(1, 16) * total ** 3
            + b * HALF * (total * (p.gamma_sum - p.n - 2 * p.k - 1) + p.omega * total ** 2))

def radial_map(n: int, old: Optional[FracField] = None, radial: str = "r",
               angular: str = "z") -> CoordMap:
    "x_ℓ = r z_ℓ (ℓ < n), x_n = r(1 − Σz); inverse r = Σx, z_ℓ = x_ℓ / Σx."

    if n < 2:
        raise Error("the radial split needs n >= 2")
    old = old or coordinate_field(n)
    names = [str(symbol) for symbol in old.symbols]
    new = named_field((radial,) + tuple(f"{angular}{l}" for l in range(1, n)) + tuple(names[n:]))
    x = old.gens[:n]
    total = sum(x, old.zero)
    forward = [total] + [x[l] / total for l in range(n - 1)]
    r = new.gens[0]
    z = new.gens[1:n]
    inverse = [r * z[l] for l in range(n - 1)] + [r * (1 - sum(z, new.zero))]
    return coord_map(old, n, new, n, forward, inverse)

class RadialSplit(NamedTuple):
    "An operator rewritten as T(r) + (1/r)·block."

    # Operator in (r, z_1..z_{n−1}).
    full: DiffOp
    # One-variable radial part.
    radial: DiffOp
    # Operator on the (n−1)-sphere chart.
    block: DiffOp
    # The exactly solvable operator the block is claimed to be.
    expected_block: DiffOp

def radial_split(space: str, p: Any, sign: RadialSign = RadialSign.DERIVED) -> RadialSplit:
    "Mechanical radial split of h^(QES) (sphere) or ĥ^(QES) (euclid)."

    if p.n < 2:
        raise Error("the radial split needs n >= 2")
    if space == "sphere":
        mapping = radial_map(p.n)
        full = change_coordinates(build_qes_sphere(p, sign=sign), mapping)
        (radial, block) = split_variable(full, 0)
        inner = SphereParams(p.n - 1, tuple(p.gammas[:p.n]))
        expected = build_es_sphere(inner, block.field)
    elif space == "euclid":
        mapping = radial_map(p.n, coordinate_field(p.n, "Y"), "R", "Z")
        full = change_coordinates(build_euclid(p, EuclidStage.H_HAT_QES), mapping)
        (radial, block) = split_variable(full, 0)
        inner = SphereParams(p.n - 1, tuple(HALF - g for g in p.gammas))
        expected = build_es_sphere(inner, block.field).scale(-4)
    else:
        raise Error(f"unknown space: {space}")
    _logger.debug("split %s operator for n=%d", space, p.n)
    return RadialSplit(full, radial, block, expected)

def printed_radial_split(space: str, p: Any, field: FracField) -> Tuple[DiffOp, Rational]:
    "The printed radial operator (over `field`) and the printed factor in front of the block."

    r = field.gens[0]
    if space == "sphere":
        g_n = rational(p.partial_sum(p.n))
        big_g = rational(p.G)
        a = rational(p.a)
        first = -(g_n + QQ(p.n, 2) + r * (QQ(p.n + 1, 2) - big_g) + a * r ** 2)
        return (DiffOp(field, 1, {(2,): r * (r - 1), (1,): first, (0,): a * p.k * r}), QQ(1))
    if space == "euclid":
        first = p.b * r ** 2 + 4 * p.omega * r + 4 * p.gamma_sum - 4 * p.n
        return (DiffOp(field, 1, {(2,): -4 * r, (1,): first, (0,): -p.b * p.k * r}), QQ(4))
    raise Error(f"unknown space: {space}")

def contraction_map(n: int) -> CoordMap:
    "x_i = ε² Y_i with ε an inert parameter of both charts."
    old = coordinate_field(n, "x", ("eps",))
    new = coordinate_field(n, "Y", ("eps",))
    eps = old.gens[n]
    new_eps = new.gens[n]
    forward = [old.gens[i] / eps ** 2 for i in range(n)]
    inverse = [new_eps ** 2 * new.gens[i] for i in range(n)]
    return coord_map(old, n, new, n, forward, inverse)

def contract_sphere(p: EuclidParams, printed: bool = False) -> DiffOp:
    """Scaled sphere operator in Y-coordinates with ε kept symbolic.

    γ_i = ½ − γ′_i, γ_{n+1} = ω/ε², a = −b/(4ε⁴), result −4ε² h^(QES); `printed` uses
    a = −b/ε⁴ and +4ε² instead.
    """

    n = p.n
    mapping = contraction_map(n)
    field = mapping.old
    eps = field.gens[n]
    gammas = tuple(to_field(HALF - g, field) for g in p.gammas) + (p.omega / eps ** 2,)
    a = -p.b / eps ** 4 if printed else -p.b / (4 * eps ** 4)
    sphere = SphereParams(n, gammas, a, p.k)
    op = change_coordinates(build_qes_sphere(sphere, field), mapping)
    factor = 4 * mapping.new.gens[n] ** 2
    return op.scale(factor if printed else -factor)
