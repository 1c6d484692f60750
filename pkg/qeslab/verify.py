"""Conformance suite.

Every identity is checked exactly, at seeded random rational parameters where it depends on
parameters. An item passes when the residual vanishes for every draw; a nonzero residual is a
deviation and carries the measured form; an internal failure makes the item inconclusive.
"""

import enum
import itertools
import logging
import random
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import mpmath # type: ignore
from sympy.polys.domains import QQ # type: ignore
from sympy.polys.fields import FracElement # type: ignore
from sympy.polys.rings import PolyElement # type: ignore

from qeslab.diffop import (
    DiffOp,
    commutator,
    compose,
    change_coordinates,
    coefficient_vector,
    fit_combination,
    format_op,
    gauge_conjugate,
    gl_generator,
    specialize,
)
from qeslab.error import Error
from qeslab.exactalg import (
    DEFAULT_PRECISION,
    Rational,
    as_poly,
    charpoly,
    charpoly_ring,
    format_poly,
    format_rational,
    format_ratfunc,
    is_polynomial,
    qmatrix_from_columns,
    rational,
    to_mpf,
)
from qeslab.models import (
    EuclidParams,
    EuclidStage,
    RadialSign,
    SphereParams,
    build_L_chain,
    build_es_from_generators,
    build_es_from_printed_generators,
    build_es_sphere,
    build_euclid,
    build_euclid_cartesian,
    build_integral,
    build_qes_sphere,
    contract_sphere,
    covariant_metric,
    covariant_metric_printed,
    euclid_added_potential,
    euclid_ground_state,
    gauge_factor_es,
    gauge_factor_qes,
    integrals,
    invariant_metric,
    potentials,
    printed_invariant_metric,
    printed_radial_split,
    radial_split,
    scalar_curvature,
    sphere_metric,
    square_map,
)
from qeslab.repspace import (
    closed_form_catalog,
    dimension,
    es_catalog,
    joint_eigenbasis,
    matrix_rep,
    phi_coefficient_residual,
    printed_dimension,
)
from qeslab.separation import (
    admissible_labels,
    completeness,
    derive_separation_ops,
    label_constants,
    printed_separation_ops,
)

_logger = logging.getLogger(__name__)

HALF = QQ(1, 2)
# Draws use numerators and denominators bounded by this.
DRAW_BOUND = 97
DEFAULT_EPSILONS = (QQ(1, 2), QQ(1, 4), QQ(1, 8), QQ(1, 16))

@enum.unique
class Status(enum.Enum):
    "Outcome of a conformance item."

    PASS = "pass"
    DEVIATION = "deviation"
    INCONCLUSIVE = "inconclusive"

class ConformanceItem(NamedTuple):
    "One checked identity."

    id: str
    anchor: str
    status: Status
    # Serialized exact residual ("0" on pass).
    residual: str
    # Measured form when it differs from the printed one.
    corrected: Optional[str] = None
    # Serialized parameter draws.
    draws: Tuple[str, ...] = ()

class ContractionProbe(NamedTuple):
    "Sphere matrix at one ε against the Euclidean matrix."

    eps: Rational
    sphere: Tuple[Tuple[Rational, ...], ...]
    euclid: Tuple[Tuple[Rational, ...], ...]
    # max |entry| of the difference.
    difference: Rational

class SuiteOptions(NamedTuple):
    "What to run the suite on."

    n: int = 2
    k: int = 1
    seed: int = 0
    # Parameter draws per identity.
    draws: int = 5
    epsilons: Tuple[Rational, ...] = DEFAULT_EPSILONS
    precision: int = DEFAULT_PRECISION
    # Fixed parameters for spectral comparisons; defaults are used when absent.
    sphere: Optional[SphereParams] = None
    euclid: Optional[EuclidParams] = None

def show(value: Any) -> str:
    "Deterministic text form of an exact value."
    if isinstance(value, DiffOp):
        return format_op(value)
    if isinstance(value, FracElement):
        return format_ratfunc(value)
    if isinstance(value, PolyElement):
        return format_poly(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(show(v) for v in value) + "]"
    if isinstance(value, (int, str)):
        return str(value)
    return format_rational(value)

def draw_rational(rng: random.Random, positive: bool = False) -> Rational:
    "A random rational with bounded numerator and denominator."
    numer = rng.randint(1 if positive else -DRAW_BOUND, DRAW_BOUND)
    return QQ(numer, rng.randint(1, DRAW_BOUND))

def draw_sphere(rng: random.Random, n: int, k: int, nonzero_a: bool = True) -> SphereParams:
    "Random γ_1..γ_{n+1} and a (nonzero unless asked otherwise)."
    gammas = [draw_rational(rng) for _ in range(n + 1)]
    a = draw_rational(rng)
    while nonzero_a and not a:
        a = draw_rational(rng)
    return SphereParams.make(n, gammas, a, k)

def draw_euclid(rng: random.Random, n: int, k: int) -> EuclidParams:
    "Random γ′, ω > 0 and b."
    return EuclidParams.make(n, [draw_rational(rng) for _ in range(n)],
                             draw_rational(rng, positive=True), draw_rational(rng), k)

def describe(p: Any) -> str:
    "Serialized parameters of a draw."
    if isinstance(p, SphereParams):
        return f"n={p.n};k={p.k};gamma={show(list(p.gammas))};a={show(p.a)}"
    return (f"n={p.n};k={p.k};gamma'={show(list(p.gammas))};omega={show(p.omega)};"
            f"b={show(p.b)}")

def _rng(opts: SuiteOptions, name: str) -> random.Random:
    return random.Random(f"{opts.seed}:{name}")

def _verdict(item_id: str, anchor: str, residuals: Sequence[Any], draws: Sequence[Any],
             corrected: Optional[str] = None) -> ConformanceItem:
    "Pass iff every residual is zero."
    nonzero = [r for r in residuals if r]
    status = Status.DEVIATION if nonzero else Status.PASS
    return ConformanceItem(item_id, anchor, status, show(nonzero[0]) if nonzero else "0",
                           corrected if nonzero else None, tuple(describe(p) for p in draws))

def _guarded(item_id: str, anchor: str, check: Callable[[], List[ConformanceItem]]) -> List[ConformanceItem]:
    try:
        return check()
    except Error as ex:
        _logger.warning("%s is inconclusive: %s", item_id, ex)
        return [ConformanceItem(item_id, anchor, Status.INCONCLUSIVE, str(ex))]

def check_integrals(opts: SuiteOptions) -> List[ConformanceItem]:
    "Commutation of h^(ES), h^(QES) and the L chain with the second-order integrals."

    n = opts.n
    if n < 2:
        return []
    rng = _rng(opts, "integrals")
    draws = [draw_sphere(rng, n, opts.k) for _ in range(opts.draws)]
    residuals: Dict[str, List[Any]] = {key: [] for key in ("es_ij", "es_i", "qes_ij", "chain",
                                                           "decomp")}
    qes_i_zero = []
    for p in draws:
        h_es = build_es_sphere(p)
        h_qes = build_qes_sphere(p)
        total = DiffOp.zero(h_es.field, n)
        for (name, op) in integrals(p):
            total += op
            if name.startswith("I_"):
                residuals["es_i"].append(commutator(h_es, op))
                if not commutator(h_qes, op):
                    qes_i_zero.append(name)
            else:
                residuals["es_ij"].append(commutator(h_es, op))
                residuals["qes_ij"].append(commutator(h_qes, op))
        residuals["decomp"].append(total - h_es)
        chain = build_L_chain(p) + [h_qes]
        for (i, left) in enumerate(chain):
            for right in chain[i + 1:]:
                residuals["chain"].append(commutator(left, right))

    anchor = "second-order integrals of the sphere system"
    items = [
        _verdict(f"INT-N{n}-HES-IIJ", anchor, residuals["es_ij"], draws),
        _verdict(f"INT-N{n}-HES-II", anchor, residuals["es_i"], draws),
        _verdict(f"INT-N{n}-HQES-IIJ", anchor, residuals["qes_ij"], draws),
        ConformanceItem(f"INT-N{n}-HQES-II-NONZERO", "I_i do not commute with h^(QES)",
                        Status.DEVIATION if qes_i_zero else Status.PASS,
                        show(qes_i_zero) if qes_i_zero else "0", None,
                        tuple(describe(p) for p in draws)),
        _verdict(f"INT-N{n}-DECOMP", "h^(ES) is a sum of integrals", residuals["decomp"], draws),
        _verdict(f"INT-N{n}-LCHAIN", "commuting L chain with h^(QES)", residuals["chain"], draws),
    ]

    p = draws[0]
    found = integrals(p)
    vectors = [coefficient_vector(op) for (_, op) in found]
    keys = sorted(set().union(*vectors), key=repr)
    rank = qmatrix_from_columns([[v.get(key, QQ.zero) for key in keys] for v in vectors]).rank()
    items.append(ConformanceItem(
        f"INT-N{n}-INDEPENDENT", "n(n+1)/2 linearly independent integrals",
        Status.PASS if rank == len(found) else Status.DEVIATION,
        "0" if rank == len(found) else f"rank {rank} of {len(found)}", None, (describe(p),)))

    printed = [build_integral("Ii", i, None, p, printed=True) - build_integral("Ii", i, None, p)
               for i in range(1, n + 1)]
    items.append(_verdict(f"INT-N{n}-II-PRINTED", "printed form of I_i", printed, [p],
                          show(build_integral("Ii", 1, None, p))))
    return items

def check_hidden_algebra(opts: SuiteOptions) -> List[ConformanceItem]:
    "gl(n+1) generator forms, commutator closure and the invariant flag."

    n = opts.n
    rng = _rng(opts, "algebra")
    p = draw_sphere(rng, n, opts.k)
    h = build_es_sphere(p)
    items = [
        _verdict(f"EQ-HAM-J-N{n}", "h^(ES) in the gl(n+1) generators",
                 [build_es_from_generators(p) - h], [p]),
        _verdict(f"EQ-HAM-J-PRINTED-N{n}", "printed Euler coefficient G + (n+1)/2",
                 [build_es_from_printed_generators(p) - h], [p], "G + (n-1)/2"),
    ]

    field = h.field
    gens = ([gl_generator("lower", (i,), None, n, field) for i in range(1, n + 1)]
            + [gl_generator("diag", (i, j), None, n, field)
               for i in range(1, n + 1) for j in range(1, n + 1)]
            + [gl_generator("raise", (i,), p.k, n, field) for i in range(1, n + 1)])
    span = gens + [DiffOp.multiplication(field, n, 1)]
    outside = []
    for (i, left) in enumerate(gens):
        for right in gens[i + 1:]:
            if fit_combination(commutator(left, right), span) is None:
                outside.append(commutator(left, right))
    items.append(_verdict(f"GL-CLOSURE-N{n}", "first-order generators close under commutators",
                          outside, [p]))

    flag = []
    for j in range(opts.k + 2):
        rep = matrix_rep(h, n, j)
        if not rep.invariant:
            flag.append(f"P_{j} not invariant")
    items.append(_verdict(f"ES-FLAG-N{n}", "h^(ES) preserves every P_j", flag, [p]))

    qes = build_qes_sphere(p)
    inside = matrix_rep(qes, n, p.k).invariant
    outside_flag = matrix_rep(qes, n, p.k + 1).invariant
    single = [] if inside and not outside_flag else [
        f"invariant on P_{p.k}: {inside}, on P_{p.k + 1}: {outside_flag}"]
    items.append(_verdict(f"QES-SINGLE-N{n}-K{p.k}", "h^(QES) preserves P_k only", single, [p]))

    dims = (dimension(n, opts.k), printed_dimension(n, opts.k))
    items.append(ConformanceItem(
        f"DIM-N{n}-K{opts.k}", "printed dimension of P_k",
        Status.PASS if dims[0] == dims[1] else Status.DEVIATION,
        "0" if dims[0] == dims[1] else f"printed {dims[1]}, basis size {dims[0]}",
        None if dims[0] == dims[1] else str(dims[0])))
    return items

def _anti(left: DiffOp, right: DiffOp) -> DiffOp:
    return compose(left, right) + compose(right, left)

def _sym3(a: DiffOp, b: DiffOp, c: DiffOp) -> DiffOp:
    total = DiffOp.zero(a.field, a.nvars)
    for (x, y, z) in itertools.permutations((a, b, c)):
        total += compose(compose(x, y), z)
    return total

def _fit_text(target: DiffOp, basis: Sequence[DiffOp], names: Sequence[str]) -> str:
    coeffs = fit_combination(target, basis)
    if coeffs is None:
        return "no combination of the listed terms"
    return " + ".join(f"({format_rational(c)}) {name}" for (c, name) in zip(coeffs, names) if c)

def check_quadratic_algebra_n3(opts: SuiteOptions) -> List[ConformanceItem]:
    "The single commutator R, its structure equations and the cubic Casimir relation."

    rng = _rng(opts, "quadratic")
    ps = [SphereParams.make(3, [0, 0, 0, 0])] + [draw_sphere(rng, 3, 0, False) for _ in range(2)]
    anchor = "quadratic algebra of the n=3 integrals"
    equal_a, equal_b, structure, casimir = [], [], {}, []
    corrected: Dict[str, str] = {}
    names = ["{L12,L13}", "{L12,L23}", "{L13,L23}", "L12^2", "L13^2", "L23^2", "L12", "L13",
             "L23", "1"]
    for p in ps:
        ells = {(i, j): build_integral("Iij", i, j, p) for (i, j) in ((1, 2), (1, 3), (2, 3))}
        one = DiffOp.multiplication(ells[(1, 2)].field, 3, 1)
        r = commutator(ells[(1, 2)], ells[(1, 3)])
        equal_a.append(r - commutator(ells[(1, 3)], ells[(2, 3)]))
        equal_b.append(r - commutator(ells[(1, 2)], ells[(2, 3)]))
        (l12, l13, l23) = (ells[(1, 2)], ells[(1, 3)], ells[(2, 3)])
        basis = [_anti(l12, l13), _anti(l12, l23), _anti(l13, l23), compose(l12, l12),
                 compose(l13, l13), compose(l23, l23), l12, l13, l23, one]
        for ((i, j, k), sign) in (((1, 2, 3), 1), ((1, 3, 2), -1), ((2, 3, 1), 1)):
            lij = ells[(i, j)]
            lik = ells[tuple(sorted((i, k)))]
            ljk = ells[tuple(sorted((j, k)))]
            (ai, aj) = (p.a_coeff(i), p.a_coeff(j))
            claim = (_anti(lij, lik - ljk) + lik.scale(2 * (1 + 2 * aj)) - ljk.scale(2 * (1 + 2 * ai))
                     + one.scale(2 * (ai - aj))).scale(4 * sign)
            target = commutator(lij, r)
            structure.setdefault(f"L{i}{j}", []).append(target - claim)
            corrected.setdefault(f"L{i}{j}", _fit_text(target, basis, names))
        (a1, a2, a3) = (p.a_coeff(1), p.a_coeff(2), p.a_coeff(3))
        claim = (_sym3(l12, l13, l23).scale(QQ(8, 3))
                 - compose(l12, l12).scale(4 * (3 + 4 * a3))
                 - compose(l23, l23).scale(4 * (3 + 4 * a1))
                 - compose(l13, l13).scale(4 * (3 + 4 * a2))
                 + (_anti(l12, l13 + l23) + _anti(l13, l23)).scale(QQ(52, 3))
                 + l12.scale(QQ(16, 3) * (1 + 11 * a3)) + l23.scale(QQ(16, 3) * (1 + 11 * a1))
                 + l13.scale(QQ(16, 3) * (1 + 11 * a2))
                 + one.scale(64 * a1 * a2 * a3 + 48 * (a1 * a2 + a2 * a3 + a3 * a1)
                             + QQ(32, 3) * (a1 + a2 + a3)))
        square = compose(r, r)
        casimir.append(square - claim)
        corrected.setdefault("R2", _fit_text(square, [_sym3(l12, l13, l23)] + basis,
                                             ["{L12,L13,L23}"] + names))

    items = [
        _verdict("QA-R-L12L13-L13L23", anchor, equal_a, ps),
        _verdict("QA-R-L12L13-L12L23", anchor, equal_b, ps, "[L12,L13] = -[L12,L23]"),
    ]
    for (name, residuals) in structure.items():
        items.append(_verdict(f"QA-STRUCTURE-{name}", anchor, residuals, ps,
                              f"[{name},R] = " + corrected[name]))
    items.append(_verdict("QA-CASIMIR", anchor, casimir, ps, "R^2 = " + corrected["R2"]))
    return items

def check_gauge(space: str, opts: SuiteOptions) -> List[ConformanceItem]:
    "Gauge rotations from the algebraic operators to Schrödinger form."

    n = opts.n
    rng = _rng(opts, f"gauge-{space}")
    if space == "sphere_ES":
        draws = [SphereParams.make(n)] + [draw_sphere(rng, n, opts.k) for _ in range(opts.draws)]
        order, measured, printed = [], [], []
        for p in draws:
            lap = sphere_metric(n).laplacian
            conj = gauge_conjugate(build_es_sphere(p), gauge_factor_es(p), forward=True)
            potential = potentials(p, "simplex", "ES")
            residual = lap - conj - DiffOp.multiplication(lap.field, n, potential * QQ(1, 4))
            constant = residual.constant_term()
            if residual.order > 0 or any(constant.diff(g) for g in lap.field.gens[:n]):
                order.append(residual)
                continue
            e0 = -4 * constant.numer.LC / constant.denom.LC
            big_g = rational(p.G)
            measured.append(e0)
            printed.append(big_g ** 2 + (n - 1) * big_g + 1 - e0)
        return [
            _verdict(f"GAUGE-SPHERE-ES-N{n}", "ground-state rotation of h^(ES)", order, draws),
            _verdict(f"GAUGE-SPHERE-ES-E0-N{n}", "printed ground energy G^2 + (n-1)G + 1",
                     printed, draws, "measured E0 " + show(measured)),
        ]
    if space == "sphere_QES":
        draws = [draw_sphere(rng, n, opts.k) for _ in range(opts.draws)]
        leftover, uncorrected, potential_residuals, measured = [], [], [], []
        for p in draws:
            lap = sphere_metric(n).laplacian
            h = build_qes_sphere(p)
            residual = lap - gauge_conjugate(h, gauge_factor_qes(p), forward=True)
            if residual.order > 0:
                leftover.append(residual)
            uncorrected.append((lap - gauge_conjugate(
                h, gauge_factor_qes(p, corrected=False), forward=True)).first_order_part())
            base = lap - gauge_conjugate(build_es_sphere(p), gauge_factor_es(p), forward=True)
            extra = (residual.constant_term() - base.constant_term()) * 4
            difference = extra - potentials(p, "simplex", "QES") + potentials(p, "simplex", "ES")
            if any(difference.diff(g) for g in lap.field.gens[:n]):
                potential_residuals.append(difference)
                measured.append(extra)
        return [
            _verdict(f"GAUGE-SPHERE-QES-FIRSTORDER-N{n}", "corrected QES ground-state factor",
                     leftover, draws),
            _verdict(f"GAUGE-SPHERE-QES-PRINTED-FACTOR-N{n}", "printed factor exp(-ax/2)",
                     uncorrected, draws, "Psi0 exp(-ax/2) (1-x)^(-a/2)"),
            _verdict(f"GAUGE-SPHERE-QES-POTENTIAL-N{n}", "printed QES potential",
                     potential_residuals, draws, show(measured[:1]) if measured else None),
        ]
    if space == "euclid":
        fixed = [opts.euclid] if opts.euclid is not None and opts.euclid.n == n else []
        draws = fixed + [draw_euclid(rng, n, opts.k) for _ in range(opts.draws)]
        ground, printed_ground, first, added, sextic, cartesian = [], [], [], [], [], []
        for p in draws:
            h_es = build_euclid(p, EuclidStage.H_ES)
            field = h_es.field
            rotated = gauge_conjugate(build_euclid(p, EuclidStage.H_HAT_ES), euclid_ground_state(p))
            ground.append(rotated + DiffOp.multiplication(field, n, p.e0) - h_es)
            printed_ground.append(rotated + DiffOp.multiplication(field, n, p.printed_e0) - h_es)
            difference = build_euclid(p, EuclidStage.H_QES) - h_es
            if difference.order > 0:
                first.append(difference)
                continue
            added.append(difference.constant_term() - euclid_added_potential(p))
            if n == 1:
                potential = difference.constant_term()
                if is_polynomial(potential):
                    coeff = as_poly(potential).coeff(field.ring.gens[0] ** 3)
                    sextic.append(coeff - p.b ** 2 * QQ(1, 16))
                else:
                    sextic.append(potential)
            cartesian.append(change_coordinates(build_euclid_cartesian(p), square_map(n)) - h_es)
        items = [
            _verdict(f"EQ-HAM-E-E0-N{n}", "ground-state rotation of h^(ES) on E^n", ground, draws),
            _verdict(f"EQ-HAM-E-E0-PRINTED-N{n}", "printed ground energy 2w(sum g' - n)",
                     printed_ground, draws, "E0 = 2w(n - sum g')"),
            _verdict(f"GAUGE-EUCLID-FIRSTORDER-N{n}", "rotation by U removes b-first-order terms",
                     first, draws),
            _verdict(f"GAUGE-EUCLID-POTENTIAL-N{n}", "sextic QES potential on E^n", added, draws),
            _verdict(f"EUCLID-H1-H2-N{n}", "Cartesian to squared coordinates", cartesian, draws),
        ]
        if n == 1:
            items.append(_verdict("GAUGE-EUCLID-SEXTIC-N1", "b^2/16 y^6 coefficient", sextic, draws))
        return items
    raise Error(f"unknown gauge space: {space}")

def check_gauge_roundtrip(opts: SuiteOptions) -> List[ConformanceItem]:
    "g⁻¹(gAg⁻¹)g returns A."
    rng = _rng(opts, "roundtrip")
    p = draw_sphere(rng, opts.n, opts.k)
    h = build_qes_sphere(p)
    g = gauge_factor_qes(p)
    back = gauge_conjugate(gauge_conjugate(h, g, True), g, False)
    return [_verdict(f"GAUGE-ROUNDTRIP-N{opts.n}", "gauge conjugation inverts", [back - h], [p])]

def check_radial_splits(opts: SuiteOptions) -> List[ConformanceItem]:
    "Radial splits of both families against the printed radial operators."

    n = opts.n
    if n < 2:
        return []
    rng = _rng(opts, "radial")
    sphere_draws = [draw_sphere(rng, n, opts.k) for _ in range(2)]
    euclid_draws = [draw_euclid(rng, n, opts.k) for _ in range(2)]
    blocks, heads, corrected = [], [], []
    for p in sphere_draws:
        split = radial_split("sphere", p)
        blocks.append(split.block - split.expected_block)
        (printed, factor) = printed_radial_split("sphere", p, split.radial.field)
        heads.append(printed - split.radial)
        corrected.append(split.radial)
        blocks.append(split.expected_block.scale(factor) - split.expected_block)
    e_blocks, e_heads, e_factor = [], [], []
    for p in euclid_draws:
        split = radial_split("euclid", p)
        e_blocks.append(split.block - split.expected_block)
        (printed, factor) = printed_radial_split("euclid", p, split.radial.field)
        e_heads.append(printed - split.radial)
        e_factor.append(split.expected_block.scale(-factor / 4) - split.block)
    return [
        _verdict(f"RADIAL-SPHERE-BLOCK-N{n}", "1/r block is h^(ES) on S^(n-1)", blocks, sphere_draws),
        _verdict(f"RADIAL-SPHERE-PRINTED-N{n}", "printed radial operator on S^n", heads,
                 sphere_draws, show(corrected[0])),
        _verdict(f"RADIAL-EUCLID-BLOCK-N{n}", "1/R block with gamma_j = 1/2 - gamma'_j", e_blocks,
                 euclid_draws),
        _verdict(f"RADIAL-EUCLID-RADIAL-N{n}", "printed radial operator on E^n", e_heads,
                 euclid_draws),
        _verdict(f"RADIAL-EUCLID-FACTOR-N{n}", "printed +4/R block factor", e_factor,
                 euclid_draws, "-4/R"),
    ]

def check_separation(opts: SuiteOptions) -> List[ConformanceItem]:
    "Printed separation equations, the exponent quadratic and separation completeness."

    n = opts.n
    if n < 2:
        return []
    rng = _rng(opts, "separation")
    p = draw_sphere(rng, n, opts.k)
    chain = derive_separation_ops(p)
    printed = printed_separation_ops(p)
    items = []
    for ell in range(1, n):
        items.append(_verdict(f"SEP-ANGULAR-N{n}-L{ell}", "printed angular separation equation",
                              [printed[ell - 1] - chain.operators[ell - 1]], [p]))
    items.append(_verdict(f"SEP-RADIAL-N{n}", "printed radial separation equation",
                          [printed[-1] - chain.operators[-1]], [p], show(chain.operators[-1])))

    quadratic, q_draws = [], []
    for _ in range(opts.draws):
        gp = draw_sphere(rng, n, 0, False)
        q_draws.append(gp)
        for _ in range(3):
            q = [rng.randint(0, 5) for _ in range(n - 1)]
            (exponents, constants) = label_constants(gp, q)
            for ell in range(2, n + 1):
                a = exponents[ell - 1]
                quadratic.append(a ** 2 + a * (rational(gp.partial_sum(ell)) + QQ(ell, 2) - 1)
                                 + constants[ell - 2])
    items.append(_verdict(f"SEP-EXPONENT-N{n}", "A_l = sum q_i solves the exponent equation",
                          quadratic, q_draws))

    fixed = opts.sphere if opts.sphere is not None and opts.sphere.n == n else p
    result = completeness(fixed, precision=opts.precision)
    items.append(ConformanceItem(
        f"SEP-COMPLETENESS-N{n}-K{fixed.k}", "separated chains exhaust P_k",
        Status.PASS if result.complete and result.chain_count == len(admissible_labels(n, fixed.k))
        else Status.DEVIATION,
        "0" if result.complete else show([show(list(m)) for m in result.mismatches]), None,
        (describe(fixed),)))
    return items

def contraction_probes(p: EuclidParams, epsilons: Sequence[Rational],
                       printed: bool = False) -> Tuple[DiffOp, List[ContractionProbe]]:
    "The ε-dependent sphere operator and its matrices at each ε against ĥ^(QES)."
    if any(eps <= 0 for eps in epsilons):
        raise Error("contraction needs ε > 0")
    op = contract_sphere(p, printed)
    target = matrix_rep(build_euclid(p, EuclidStage.H_HAT_QES), p.n, p.k).matrix.to_list()
    probes = []
    for eps in epsilons:
        sphere = matrix_rep(specialize(op, {"eps": eps}), p.n, p.k).matrix.to_list()
        difference = max(abs(s - e) for (srow, erow) in zip(sphere, target)
                         for (s, e) in zip(srow, erow))
        probes.append(ContractionProbe(eps, tuple(map(tuple, sphere)), tuple(map(tuple, target)),
                                       difference))
    return (op, probes)

def convergence_orders(probes: Sequence[ContractionProbe]) -> List[Any]:
    "log(d_i / d_{i+1}) / log(ε_i / ε_{i+1}) between successive probes."
    orders = []
    for (left, right) in zip(probes, probes[1:]):
        if left.difference and right.difference:
            orders.append(mpmath.log(to_mpf(left.difference / right.difference))
                          / mpmath.log(to_mpf(left.eps / right.eps)))
    return orders

def check_contraction(opts: SuiteOptions) -> List[ConformanceItem]:
    "ε → 0 limit of the scaled sphere operator against the Euclidean one."

    n = opts.n
    rng = _rng(opts, "contraction")
    p = opts.euclid if opts.euclid is not None and opts.euclid.n == n else draw_euclid(rng, n, opts.k)
    anchor = "contraction of the sphere to Euclidean space"
    (op, probes) = contraction_probes(p, opts.epsilons)
    target = matrix_rep(build_euclid(p, EuclidStage.H_HAT_QES), n, p.k).matrix
    limit = matrix_rep(specialize(op, {"eps": 0}), n, p.k).matrix
    items = [_verdict(f"CONTRACTION-LIMIT-N{n}-K{p.k}", anchor,
                      [] if limit.to_list() == target.to_list() else ["limit matrix differs"], [p])]
    orders = convergence_orders(probes)
    bad = [o for o in orders if abs(o - 2) > 0.3]
    items.append(ConformanceItem(
        f"CONTRACTION-ORDER-N{n}-K{p.k}", anchor, Status.DEVIATION if bad else Status.PASS,
        "0" if not bad else "orders " + ", ".join(mpmath.nstr(o, 6) for o in orders), None,
        (describe(p),)))
    try:
        (printed, _) = contraction_probes(p, opts.epsilons[:1], printed=True)
        printed_limit = matrix_rep(specialize(printed, {"eps": 0}), n, p.k).matrix
        same = printed_limit.to_list() == target.to_list()
        residual = "0" if same else "limit matrix differs"
    except Error as ex:
        (same, residual) = (False, f"no limit: {ex}")
    items.append(ConformanceItem(
        f"CONTRACTION-PRINTED-MAP-N{n}", "printed map a = -b/eps^4 with 4 eps^2 h",
        Status.PASS if same else Status.DEVIATION, residual,
        None if same else "a = -b/(4 eps^4), -4 eps^2 h", (describe(p),)))
    return items

def _label_blocks(p: SphereParams, sign: RadialSign) -> Dict[Tuple[Any, ...], Any]:
    ops = (build_L_chain(p) if p.n > 1 else []) + [build_qes_sphere(p, sign=sign)]
    return {e.labels: e.block_charpoly for e in joint_eigenbasis(ops, p.n, p.k)}

def check_closed_forms(opts: SuiteOptions, p: Optional[SphereParams] = None) -> List[ConformanceItem]:
    "Matrix spectra against the exactly solvable law and the printed QES closed forms."

    n = opts.n
    rng = _rng(opts, "closedforms")
    if p is None:
        p = opts.sphere if opts.sphere is not None and opts.sphere.n == n else SphereParams.make(
            n, a=HALF, k=opts.k)
    items = []

    es_draws = [p] + [draw_sphere(rng, n, p.k) for _ in range(2)]
    es_residuals = []
    lam = charpoly_ring().gens[0]
    for d in es_draws:
        expected = charpoly_ring().one
        for (value, mult) in es_catalog(n, d.k, rational(d.G)):
            expected *= (lam - value) ** mult
        es_residuals.append(charpoly(matrix_rep(build_es_sphere(d), n, d.k).matrix) - expected)
    items.append(_verdict(f"EQ-HAM-E-N{n}-K{p.k}", "exactly solvable spectrum law", es_residuals,
                          es_draws))

    perm_draws = [p] + [draw_sphere(rng, n, p.k) for _ in range(2)]
    perm_residuals = []
    for d in perm_draws:
        reference = charpoly(matrix_rep(build_qes_sphere(d), n, d.k).matrix)
        for order in itertools.permutations(range(n)):
            gammas = tuple(d.gammas[i] for i in order) + (d.gammas[n],)
            permuted = SphereParams(n, gammas, d.a, d.k)
            perm_residuals.append(charpoly(matrix_rep(build_qes_sphere(permuted), n, d.k).matrix)
                                  - reference)
    items.append(_verdict(f"SPECTRUM-PERMUTATION-N{n}-K{p.k}", "spectrum invariant under gamma "
                          "permutations", perm_residuals, perm_draws))

    try:
        catalog = closed_form_catalog(n, p.k, p)
    except Error:
        return items
    derived = _label_blocks(p, RadialSign.DERIVED)
    flipped = _label_blocks(p, RadialSign.PRINTED)
    groups: Dict[int, List[Tuple[Any, Any]]] = {}
    for q in admissible_labels(n, p.k):
        labels = tuple(label_constants(p, q)[1])
        groups.setdefault(sum(q), []).append((derived.get(labels), flipped.get(labels)))
    rep = matrix_rep(build_qes_sphere(p), n, p.k)
    for entry in catalog:
        items.append(_catalog_item(entry, groups.get(entry.label_sum, []), p))
    trace = sum((row[i] for (i, row) in enumerate(rep.matrix.to_list())), QQ.zero)
    # Sum of roots of a monic polynomial of degree d is minus its λ^(d−1) coefficient.
    predicted = sum((-e.polynomial.coeff(lam ** (e.block_size - 1)) * e.multiplicity
                     for e in catalog), QQ.zero)
    items.append(_verdict(f"S34-N{n}-K{p.k}-TRACE", "trace against the printed energies",
                          [predicted - trace], [p], show(trace)))
    if n == 1 and p.k == 1:
        residual = phi_coefficient_residual(rep, p)
        items.append(_verdict("S34-N1-K1-PHI", "printed eigenfunctions x + (1+2G1)/(2E)",
                              [residual], [p]))
    return items

def _catalog_item(entry: Any, blocks: List[Tuple[Any, Any]], p: SphereParams) -> ConformanceItem:
    anchor = "printed closed-form QES spectrum"
    draws = (describe(p),)
    if len(blocks) != entry.multiplicity:
        return ConformanceItem(entry.id, anchor, Status.DEVIATION,
                               f"{len(blocks)} label tuples, printed multiplicity {entry.multiplicity}",
                               str(len(blocks)), draws)
    derived = [b for (b, _) in blocks]
    if all(b == entry.polynomial for b in derived):
        return ConformanceItem(entry.id, anchor, Status.PASS, "0", None, draws)
    measured = derived[0]
    residual = show(entry.polynomial - measured) if measured is not None else "no block"
    if all(f == entry.polynomial for (_, f) in blocks):
        residual += "; matches the flipped (n+1)/2 sign"
    if entry.center is not None and measured is not None and measured.degree() == 2:
        lam = charpoly_ring().gens[0]
        p1 = measured.coeff(lam)
        p0 = measured.coeff(1)
        center = -p1 / 2
        disc = 4 * (center ** 2 - p0)
        parts = ["center " + ("match" if center == entry.center else
                              f"derived {show(center)}, printed {show(entry.center)}"),
                 "discriminant " + ("match" if disc == entry.discriminant else
                                    f"derived {show(disc)}, printed {show(entry.discriminant)}")]
        residual += "; " + "; ".join(parts)
    return ConformanceItem(entry.id, anchor, Status.DEVIATION, residual,
                           show(measured) if measured is not None else None, draws)

def check_geometry(opts: SuiteOptions) -> List[ConformanceItem]:
    "Determinant, constant curvature, printed covariant metric and invariant-coordinate metrics."

    n = opts.n
    m = sphere_metric(n)
    x = m.field.gens[:n]
    product = m.field.one
    for v in x:
        product *= v
    product *= 1 - sum(x, m.field.zero)
    items = [_verdict(f"GEOM-DET-N{n}", "determinant of the sphere metric",
                      [m.determinant - product], [])]
    if 2 <= n <= 3:
        curvature = scalar_curvature(m)
        gradient = [curvature.diff(g) for g in x]
        _logger.info("scalar curvature for n=%d: %s", n, show(curvature))
        items.append(_verdict(f"GEOM-CURVATURE-N{n}", "constant scalar curvature", gradient, []))
    exact = covariant_metric(m)
    printed = covariant_metric_printed(n)
    items.append(_verdict(f"GEOM-COVARIANT-N{n}", "printed covariant metric",
                          [printed[i][j] - exact[i][j] for i in range(n) for j in range(n)], [],
                          show([show(row) for row in exact])))
    if n <= 2:
        inv = invariant_metric(n)
        (components, first) = printed_invariant_metric(n)
        items.append(_verdict(f"APP-N{n}-METRIC", "metric in invariant coordinates",
                              [components[i][j] - inv.contravariant[i][j]
                               for i in range(n) for j in range(n)], []))
        measured = inv.first_order()
        items.append(_verdict(f"APP-N{n}-FIRSTORDER", "first-order coefficients in invariant "
                              "coordinates", [first[i] - measured[i] for i in range(n)], [],
                              show(measured)))
    return items

SUITES = ("integrals", "algebra", "gauge", "radial", "contraction", "closedforms", "geometry")

def run_suite(selector: str, opts: SuiteOptions) -> List[ConformanceItem]:
    "Run one suite (or all) in a fixed order."

    if selector != "all" and selector not in SUITES:
        raise Error(f"unknown suite: {selector}")
    selected = SUITES if selector == "all" else (selector,)
    n = opts.n
    runners: Dict[str, List[Tuple[str, Callable[[], List[ConformanceItem]]]]] = {
        "integrals": [(f"INT-N{n}", lambda: check_integrals(opts))],
        "algebra": [(f"EQ-HAM-J-N{n}", lambda: check_hidden_algebra(opts))]
                   + ([("QA", lambda: check_quadratic_algebra_n3(opts))] if n == 3 else []),
        "gauge": [(f"GAUGE-{space.upper()}-N{n}", (lambda s=space: check_gauge(s, opts)))
                  for space in ("sphere_ES", "sphere_QES", "euclid")]
                 + [(f"GAUGE-ROUNDTRIP-N{n}", lambda: check_gauge_roundtrip(opts))],
        "radial": [(f"RADIAL-N{n}", lambda: check_radial_splits(opts)),
                   (f"SEP-N{n}", lambda: check_separation(opts))],
        "contraction": [(f"CONTRACTION-N{n}", lambda: check_contraction(opts))],
        "closedforms": [(f"S34-N{n}", lambda: check_closed_forms(opts))],
        "geometry": [(f"GEOM-N{n}", lambda: check_geometry(opts))],
    }
    items: List[ConformanceItem] = []
    for name in selected:
        for (item_id, check) in runners[name]:
            _logger.info("running %s checks (%s)", name, item_id)
            for item in _guarded(item_id, name, check):
                level = logging.INFO if item.status is Status.PASS else logging.WARNING
                _logger.log(level, "%s: %s", item.id, item.status.value)
                items.append(item)
    counts = {status: sum(1 for i in items if i.status is status) for status in Status}
    _logger.info("suite %s: %d pass, %d deviation, %d inconclusive", selector,
                 counts[Status.PASS], counts[Status.DEVIATION], counts[Status.INCONCLUSIVE])
    return items

def exit_status(items: Sequence[ConformanceItem]) -> int:
    "0 iff no item is inconclusive."
    return 1 if any(i.status is Status.INCONCLUSIVE for i in items) else 0

