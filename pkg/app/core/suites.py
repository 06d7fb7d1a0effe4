"""Seeded verification suites.

Each suite draws random instances from a seed, runs one identity per item and
collects a ``CheckResult`` per item in a fixed order. Suites never stop at the
first failure: a failing identity is logged and reported with its first
residual term.
"""

from __future__ import annotations

import logging
import random
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field

from app.config import get_settings
from app.core.ce import (
    CEChain,
    CESum,
    check_action_composition,
    check_boundary_squared,
    random_chain,
    random_matpoly,
)
from app.core.correspondence import (
    beta_dagger,
    check_basic,
    check_chain_map,
    check_cocycle,
    cocycle_2pt,
    graph_cochain_ce,
    theta_cochain,
)
from app.core.exceptions import InsufficientOrderError, WorkbenchError
from app.core.graded import GradedPoly, GradedSpace, flat_monomials, random_poly
from app.core.graphs import (
    NAMED_GRAPHS,
    GraphChain,
    enumerate_graphs,
    format_chain,
    graph_differential,
    parse_chain,
)
from app.core.identities import (
    bundle_variation_formula,
    check_equivariance,
    check_hamiltonian_key_identity,
    check_key_identity,
    check_neat_relation,
    check_qhat_formula,
    check_qhat_mc,
    check_rw_maurer_cartan,
    check_rw_truncations,
    check_rw_variation,
    check_symplectic_pullback,
    check_variation,
    gradient_field,
    linear_part_algebra,
    metric_variation_formula,
    tangent_connection,
    variation,
)
from app.core.jets import (
    ConnectionData,
    JetChart,
    JetReport,
    check_flatness,
    compare,
    compare_matrices,
    exp_geodesic,
    exp_graded,
    exp_orthonormal,
    exp_symplectic,
    flat_connection,
    flow_oracle,
    geodesic_formula,
    geodesic_oracle,
    grothendieck,
    grothendieck_formula,
    grothendieck_hamiltonians,
    grothendieck_shifted_formula,
    hat,
    hat_formula,
    orthonormal_formula,
    random_base_poly,
    random_bundle,
    random_christoffel,
    random_connection,
    random_symplectic_connection,
    random_vector_field,
    random_vielbein,
    symplectic_formula,
    transport_formula,
    transport_oracle,
)
from app.core.weights import (
    LieData,
    abelian,
    lie_closed_form,
    lie_weights,
    lie_weights_bruteforce,
    so3_vector,
    sp2_fundamental,
    su2_adjoint,
    su2_fundamental,
)

logger = logging.getLogger(__name__)

# Minimum xi order each suite needs; missing suites work at any order.
MIN_ORDER = {
    "flatness": 2,
    "key-id": 2,
    "variation": 3,
    "jets": 3,
    "rw": 3,
}

# Graph-d2: trivalent/univalent shapes up to this many vertices, and shapes
# with a free valence range up to SMALL_SHAPES vertices.
GRAPH_VERTICES = 6
SMALL_SHAPES = 4


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: str = "0"


@dataclass
class SuiteReport:
    """Outcome of one suite run."""

    suite: str
    seed: int
    order: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        ok = len(self.checks) - len(self.failures)
        return (
            f"{self.suite}: {ok}/{len(self.checks)} passed "
            f"(seed={self.seed}, N={self.order})"
        )


@dataclass(frozen=True)
class SuiteContext:
    """Parameters shared by the items of a suite."""

    seed: int
    order: int
    base_order: int
    instances: int
    chain_instances: int
    connection: ConnectionData | None = None

    def rng(self, *salt: object) -> random.Random:
        return random.Random("/".join(str(s) for s in (self.seed, *salt)))

    def chart(self, cd: ConnectionData, extra: tuple[str, ...] = ()) -> JetChart:
        return JetChart.for_connection(
            cd, order=self.order, base_order=self.base_order, extra=extra
        )


# =============================================================================
# Result helpers
# =============================================================================


def from_report(label: str, report: JetReport) -> CheckResult:
    if not report.passed:
        logger.warning("%s failed: %s", label, report.summary())
    return CheckResult(label, report.passed, report.first_residual())


def from_chain(label: str, chain: GraphChain) -> CheckResult:
    if chain.is_zero():
        return CheckResult(label, True)
    logger.warning("%s failed: nonzero graph chain", label)
    return CheckResult(label, False, format_chain(chain, separator=" + "))


def from_ce_sum(label: str, value: CESum) -> CheckResult:
    if value.is_zero():
        return CheckResult(label, True)
    logger.warning("%s failed: %d CE terms survive", label, len(value))
    first = next(value.chains())
    return CheckResult(label, False, f"{len(value)} terms, first {first}")


def from_values(label: str, got: object, want: object) -> CheckResult:
    if got == want:
        return CheckResult(label, True)
    logger.warning("%s failed: got %s, expected %s", label, got, want)
    return CheckResult(label, False, f"got {got}, expected {want}")


def _connections(
    ctx: SuiteContext,
    name: str,
    factory: Callable[[random.Random], ConnectionData],
) -> Iterator[tuple[int, ConnectionData, random.Random]]:
    """Random instances, or the single connection supplied with the run."""
    if ctx.connection is not None:
        yield 0, ctx.connection, ctx.rng(name, 0)
        return
    for i in range(ctx.instances):
        rng = ctx.rng(name, i)
        yield i, factory(rng), rng


# =============================================================================
# Jet suites
# =============================================================================


def _flatness(ctx: SuiteContext) -> Iterator[CheckResult]:
    def draw(rng: random.Random) -> ConnectionData:
        return random_connection(2, rng)

    for i, cd, rng in _connections(ctx, "flatness", draw):
        chart = ctx.chart(cd)
        phi = exp_graded(cd, chart) if cd.rank else exp_geodesic(cd, chart)
        yield from_report(f"flatness[{i}]", check_flatness(grothendieck(phi)))
        if ctx.connection is None:
            graded = random_bundle(cd, rng, fiber_degrees=(0, 1))
            chart = ctx.chart(graded)
            phi = exp_graded(graded, chart)
            yield from_report(
                f"flatness graded[{i}]", check_flatness(grothendieck(phi))
            )


def _key_identity(ctx: SuiteContext) -> Iterator[CheckResult]:
    def draw(rng: random.Random) -> ConnectionData:
        return random_connection(2, rng)

    for i, cd, rng in _connections(ctx, "key-id", draw):
        chart = ctx.chart(cd)
        u = random_vector_field(cd, rng)
        v = random_vector_field(cd, rng)
        yield from_report(
            f"key identity geodesic[{i}]", check_key_identity(cd, u, v, chart)
        )
        framed = cd if cd.vielbein is not None else random_vielbein(cd, rng)
        yield from_report(
            f"key identity orthonormal[{i}]",
            check_key_identity(framed, u, v, ctx.chart(framed), exp_orthonormal),
        )
    if ctx.order < 3:
        return

    def draw_symplectic(rng: random.Random) -> ConnectionData:
        return random_symplectic_connection(2, rng, constant=False)

    for i, cd, rng in _connections(ctx, "key-id-sp", draw_symplectic):
        if cd.omega is None or cd.rank or cd.anti_dimension:
            continue
        f = random_base_poly(cd.space, rng, degree=2)
        h = random_base_poly(cd.space, rng, degree=2)
        yield from_report(
            f"Hamiltonian key identity[{i}]",
            check_hamiltonian_key_identity(cd, f, h, ctx.chart(cd)),
        )


def _variation(ctx: SuiteContext) -> Iterator[CheckResult]:
    def draw(rng: random.Random) -> ConnectionData:
        return random_connection(2, rng)

    for i, cd, rng in _connections(ctx, "variation", draw):
        n = cd.dimension
        gamma = random_christoffel(cd.space, n, rng)
        u = random_vector_field(cd, rng)
        order, base = ctx.order, ctx.base_order
        yield from_report(
            f"metric variation[{i}]",
            check_variation(cd, gamma=gamma, u=u, order=order, base_order=base),
        )
        var = variation(cd, gamma=gamma, order=order, base_order=base)
        yield from_report(
            f"metric variation generator[{i}]",
            compare(
                "metric variation generator",
                list(var.generator[:n]),
                metric_variation_formula(cd, gamma, var.chart),
                xi_limit=3,
            ),
        )
        graded = cd if cd.rank else random_bundle(cd, rng, fiber_degrees=(0,))
        bundle = _bundle_variation(graded, rng)
        yield from_report(
            f"bundle variation[{i}]",
            check_variation(graded, bundle=bundle, u=u, order=order, base_order=base),
        )
        var = variation(graded, bundle=bundle, order=order, base_order=base)
        yield from_report(
            f"bundle variation generator[{i}]",
            compare(
                "bundle variation generator",
                list(var.generator[n:]),
                bundle_variation_formula(graded, bundle, var.chart),
                xi_limit=2,
            ),
        )


def _bundle_variation(cd: ConnectionData, rng: random.Random) -> list:
    """Random degree-preserving variation of the bundle connection."""
    degrees = cd.fiber_degrees
    return [
        [
            [
                random_base_poly(cd.space, rng) if da == db else cd.space.zero()
                for db in degrees
            ]
            for da in degrees
        ]
        for _ in range(cd.dimension)
    ]


def _at_base(rows) -> list[list]:
    return [[entry.at_base() for entry in row] for row in rows]


def _jets(ctx: SuiteContext) -> Iterator[CheckResult]:
    def draw(rng: random.Random) -> ConnectionData:
        return random_connection(2, rng)

    for i, cd, rng in _connections(ctx, "jets", draw):
        if cd.anti_dimension:
            continue
        timed = ctx.chart(cd, extra=("t",))
        body = exp_geodesic(cd, timed)
        yield from_report(
            f"geodesic oracle[{i}]",
            compare("geodesic oracle", body.body, geodesic_oracle(cd, timed)),
        )
        chart = ctx.chart(cd)
        yield from_report(
            f"geodesic expansion[{i}]",
            compare(
                "geodesic expansion",
                exp_geodesic(cd, chart).body,
                geodesic_formula(cd, chart),
                xi_limit=3,
            ),
        )
        framed = cd if cd.vielbein is not None else random_vielbein(cd, rng)
        timed = ctx.chart(framed, extra=("t",))
        yield from_report(
            f"flow oracle[{i}]",
            compare(
                "flow oracle",
                exp_orthonormal(framed, timed).body,
                flow_oracle(framed, timed),
            ),
        )
        chart = ctx.chart(framed)
        yield from_report(
            f"flow expansion[{i}]",
            compare(
                "flow expansion",
                exp_orthonormal(framed, chart).body,
                orthonormal_formula(framed, chart),
                xi_limit=3,
            ),
        )
        graded = cd if cd.rank else random_bundle(cd, rng)
        timed = ctx.chart(graded, extra=("t",))
        lifted = exp_graded(graded, timed)
        yield from_report(
            f"transport oracle[{i}]",
            compare_matrices(
                "transport oracle",
                lifted.transport,
                transport_oracle(graded, exp_geodesic(graded, timed)),
            ),
        )
        yield from _flat_transport(ctx, i, rng)
        yield from _normal_jets(ctx, i, rng)
        yield from _symplectic_jets(ctx, i, rng)
        v = random_vector_field(cd, rng, vanishing=True)
        yield from_report(
            f"equivariance[{i}]",
            check_equivariance(cd, v, ctx.order, ctx.base_order),
        )


def _flat_transport(
    ctx: SuiteContext, i: int, rng: random.Random
) -> Iterator[CheckResult]:
    """Transport expansion on a flat base with a random bundle."""
    cd = random_bundle(flat_connection(2), rng)
    chart = ctx.chart(cd)
    yield from_report(
        f"transport expansion[{i}]",
        compare_matrices(
            "transport expansion",
            exp_graded(cd, chart).transport,
            transport_formula(cd, chart),
            xi_limit=3,
        ),
    )


def _normal_jets(
    ctx: SuiteContext, i: int, rng: random.Random
) -> Iterator[CheckResult]:
    """Expansions at x0 for symbols vanishing at the base point."""
    base = random_connection(2, rng, constant=False)
    cd = random_bundle(base, rng)
    chart = ctx.chart(cd)
    phi = exp_graded(cd, chart)
    connection = grothendieck(phi)
    yield from_report(
        f"connection expansion[{i}]",
        compare_matrices(
            "connection expansion",
            _at_base(connection.rows),
            _at_base(grothendieck_formula(cd, chart)),
            xi_limit=2,
        ),
    )
    n = cd.dimension
    u = random_vector_field(cd, rng)
    padded = list(u) + [None] * (len(chart.base_coords) - n)
    lifted = hat(padded, phi, connection)
    yield from_report(
        f"hat expansion[{i}]",
        compare(
            "hat expansion",
            [c.at_base() for c in lifted[:n]],
            [c.at_base() for c in hat_formula(cd, chart, u)],
            xi_limit=2,
        ),
    )
    tangent = tangent_connection(base)
    chart = ctx.chart(tangent)
    yield from_report(f"Q-hat expansion[{i}]", check_qhat_formula(tangent, chart))
    yield from_report(f"Q-hat square[{i}]", check_qhat_mc(tangent, chart))


def _without_bundle(cd: ConnectionData) -> ConnectionData:
    """Same base data without the graded bundle."""
    return ConnectionData(cd.space, cd.gamma, vielbein=cd.vielbein, omega=cd.omega)


def _symplectic_jets(
    ctx: SuiteContext, i: int, rng: random.Random
) -> Iterator[CheckResult]:
    cd = random_symplectic_connection(2, rng, constant=False)
    chart = ctx.chart(cd)
    yield from_report(f"symplectic pullback[{i}]", check_symplectic_pullback(cd, chart))
    phi = exp_symplectic(cd, chart)
    yield from_report(
        f"symplectic expansion[{i}]",
        compare(
            "symplectic expansion",
            phi.body,
            symplectic_formula(cd, chart),
            xi_limit=3,
        ),
    )
    connection = grothendieck(phi)
    yield from_report(
        f"shifted connection expansion[{i}]",
        compare_matrices(
            "shifted connection expansion",
            _at_base(connection.rows),
            _at_base(grothendieck_shifted_formula(cd, chart)),
            xi_limit=2,
        ),
    )
    try:
        grothendieck_hamiltonians(connection)
    except WorkbenchError as e:
        yield CheckResult(f"shifted connection Hamiltonians[{i}]", False, str(e))
    else:
        yield CheckResult(f"shifted connection Hamiltonians[{i}]", True)
    f = random_base_poly(cd.space, rng, degree=3, constant=False)
    field = gradient_field(cd, f)
    lifted = hat(field, phi, connection)
    kinds = linear_part_algebra([c.at_base() for c in lifted], cd.omega)
    passed = "sp" in kinds
    yield CheckResult(
        f"linear part[{i}]", passed, "0" if passed else f"classified as {kinds}"
    )


def _holomorphic(poly: GradedPoly) -> GradedPoly:
    """Drop the monomials that involve anti-holomorphic coordinates."""
    anti = [i for i, g in enumerate(poly.space.generators) if g.name.startswith("yb")]
    return poly.filter(lambda mono: not any(mono[i] for i in anti))


def _rw(ctx: SuiteContext) -> Iterator[CheckResult]:
    def draw(rng: random.Random) -> ConnectionData:
        return random_symplectic_connection(2, rng, constant=False, anti_dimension=2)

    for i, cd, rng in _connections(ctx, "rw", draw):
        bare = _without_bundle(cd) if cd.rank else cd
        chart = ctx.chart(bare)
        moments = [_holomorphic(random_base_poly(cd.space, rng, 3, constant=False))]
        for report in check_rw_truncations(bare, chart, moments):
            yield from_report(f"{report.name}[{i}]", report)
        yield from_report(
            f"holomorphic Maurer-Cartan[{i}]", check_rw_maurer_cartan(bare, chart)
        )
        omega = cd.omega
        gamma = random_christoffel(cd.space, cd.dimension, rng, omega=omega)
        yield from_report(
            f"holomorphic symplectic variation[{i}]",
            check_rw_variation(
                bare, gamma, moments, order=ctx.order, base_order=ctx.base_order
            ),
        )
        flat = random_bundle(
            flat_connection(cd.dimension, cd.anti_dimension, symplectic=True),
            rng,
            fiber_degrees=(0,),
        )
        chart = ctx.chart(flat)
        for report in check_rw_truncations(flat, chart):
            if report.name == "bundle jets":
                yield from_report(f"bundle jets[{i}]", report)
        yield from_report(
            f"bundle jet relation[{i}]", check_neat_relation(flat, chart)
        )


# =============================================================================
# Algebraic suites
# =============================================================================


def even_space(size: int = 4) -> GradedSpace:
    """Degree-0 coordinates with the Darboux form."""
    form = [[0] * size for _ in range(size)]
    for a in range(0, size, 2):
        form[a][a + 1], form[a + 1][a] = 1, -1
    return GradedSpace([(f"x{i + 1}", 0) for i in range(size)], symplectic=form)


def odd_space(size: int = 4) -> GradedSpace:
    """Degree-1 coordinates with the unit pairing of degree 2."""
    form = [[int(a == b) for b in range(size)] for a in range(size)]
    return GradedSpace(
        [(f"x{i + 1}", 1) for i in range(size)], symplectic=form, form_degree=2
    )


def mixed_space() -> GradedSpace:
    """Coordinates of degrees 0, 1, 1, 2 paired to degree 2."""
    form = [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]]
    return GradedSpace(
        [("q", 0), ("a", 1), ("b", 1), ("p", 2)], symplectic=form, form_degree=2
    )


def sample_spaces() -> list[tuple[str, GradedSpace]]:
    return [("even", even_space()), ("odd", odd_space()), ("mixed", mixed_space())]


FIBER = GradedSpace([("z1", 0), ("z2", 0)])


def _shapes(total: int) -> list[tuple[int, int]]:
    return [(p, t - p) for t in range(1, total + 1) for p in range(t, -1, -1)]


def _degrees(space: GradedSpace, flat_degrees: tuple[int, ...]) -> list[int]:
    monomials = (m for d in flat_degrees for m in flat_monomials(space, d))
    return sorted({space.monomial_degree(m) for m in monomials})


def _homogeneous(
    space: GradedSpace, rng: random.Random, flat_degrees: tuple[int, ...]
) -> GradedPoly:
    degree = rng.choice(_degrees(space, flat_degrees))
    return random_poly(space, rng, flat_degrees, 0.5, degree, max_terms=2)


# Hamiltonians of flat degree >= 2 and bar entries of flat degree >= 1 keep
# every term of the CE boundary vanishing at the origin, where beta is defined.
CHAIN_MAP_FLAT_DEGREES = (2, 3)
CHAIN_MAP_BAR_DEGREES = (1, 2)


def chain_map_instance(
    space: GradedSpace, rng: random.Random, p: int, q: int
) -> CEChain:
    """Random chain on which both sides of the beta square are defined."""
    return random_chain(
        space,
        rng,
        p,
        q,
        FIBER,
        flat_degrees=CHAIN_MAP_FLAT_DEGREES,
        bar_flat_degrees=CHAIN_MAP_BAR_DEGREES,
    )


def _chain_map(ctx: SuiteContext) -> Iterator[CheckResult]:
    shapes = _shapes(4)
    for label, space in sample_spaces():
        for i in range(ctx.chain_instances):
            rng = ctx.rng("chain-map", label, i)
            p, q = rng.choice(shapes)
            chain = chain_map_instance(space, rng, p, q)
            yield from_chain(
                f"chain map {label}[{i}] p={p} q={q}", check_chain_map(chain).difference
            )


def _ce_d2(ctx: SuiteContext) -> Iterator[CheckResult]:
    shapes = _shapes(4)
    for label, space in sample_spaces():
        for i in range(ctx.instances):
            rng = ctx.rng("ce-d2", label, i)
            p, q = rng.choice(shapes)
            chain = random_chain(space, rng, p, q, FIBER)
            yield from_ce_sum(
                f"CE boundary squared {label}[{i}] p={p} q={q}",
                check_boundary_squared(chain),
            )
            u = _homogeneous(space, rng, (2, 3))
            v = _homogeneous(space, rng, (2, 3))
            degrees = _degrees(space, (1, 2))
            bar = [
                random_matpoly(FIBER, space, rng, rng.choice(degrees))
                for _ in range(2)
            ]
            yield from_ce_sum(
                f"bar action composition {label}[{i}]",
                check_action_composition(u, v, bar),
            )


def _graph_d2(ctx: SuiteContext) -> Iterator[CheckResult]:
    shapes = [(p, q, 3, 1) for p, q in _shapes(GRAPH_VERTICES)]
    shapes += [(p, q, (3, 4), (1, 2)) for p, q in _shapes(SMALL_SHAPES)]
    for p, q, internal, peripheral in shapes:
        graphs = enumerate_graphs(p, q, internal, peripheral)
        failures = GraphChain()
        for graph in graphs:
            square = graph_differential(graph_differential(graph))
            failures = failures + square
        label = f"graph boundary squared I={p} P={q} valence={internal}/{peripheral}"
        logger.debug("%s: %d classes", label, len(graphs))
        yield from_chain(f"{label} ({len(graphs)} classes)", failures)
    for text in ("1/4 * Gamma5\n1/3 * Gamma6\n-1/2 * Gamma7", "Gamma5\n2 * Gamma4"):
        chain = parse_chain(text)
        yield from_chain(
            f"boundary of {format_chain(chain, separator=' + ')}",
            graph_differential(chain),
        )


def _lie_cases() -> list[tuple[str, LieData]]:
    return [
        ("su2 fundamental", su2_fundamental()),
        ("su2 adjoint", su2_adjoint()),
        ("so3 vector", so3_vector()),
        ("sp2 fundamental", sp2_fundamental()),
        ("abelian", abelian(2)),
    ]


def _lie(ctx: SuiteContext) -> Iterator[CheckResult]:
    for label, data in _lie_cases():
        weights = lie_weights(data, 4)
        for name, value in lie_closed_form(data).items():
            got = weights.coefficient(NAMED_GRAPHS[name])
            yield from_values(f"{label} closed form {name}", got, value)
        for name in ("Gamma4", "Gamma5", "Gamma6", "Gamma7"):
            graph = NAMED_GRAPHS[name]
            yield from_values(
                f"{label} literal recipe {name}",
                lie_weights_bruteforce(data, graph),
                weights.coefficient(graph),
            )


def _cocycle(ctx: SuiteContext) -> Iterator[CheckResult]:
    theta = theta_cochain()
    space = even_space()
    for i in range(ctx.instances):
        rng = ctx.rng("cocycle", i)
        f1 = random_poly(space, rng, (3,), 0.4)
        f2 = random_poly(space, rng, (3,), 0.4)
        yield from_values(
            f"theta pairing[{i}]",
            beta_dagger(theta, CEChain(space, (f1, f2))),
            cocycle_2pt(f1, f2).evaluate_at_zero(),
        )
        chains = [random_chain(space, rng, 3, flat_degrees=(2, 3)) for _ in range(3)]
        values = check_cocycle(theta, chains)
        nonzero = [v for v in values if v]
        yield CheckResult(
            f"theta coboundary[{i}]", not nonzero, str(nonzero[0]) if nonzero else "0"
        )
    basic = check_basic(graph_cochain_ce(theta), space, (2, 0), ctx.rng("basic"))
    yield CheckResult("theta is basic", basic, "0" if basic else "nonzero on sp")


# =============================================================================
# Runner
# =============================================================================


SUITES: dict[str, Callable[[SuiteContext], Iterator[CheckResult]]] = {
    "flatness": _flatness,
    "key-id": _key_identity,
    "variation": _variation,
    "chain-map": _chain_map,
    "ce-d2": _ce_d2,
    "graph-d2": _graph_d2,
    "rw": _rw,
    "jets": _jets,
    "lie": _lie,
    "cocycle": _cocycle,
}


def run_suite(
    name: str,
    seed: int | None = None,
    order: int | None = None,
    instances: int | None = None,
    connection: ConnectionData | None = None,
) -> SuiteReport:
    """Run one suite and collect its items in order.

    ``connection`` replaces the random instances of the jet suites.

    Raises:
        KeyError: If the suite is unknown.
        InsufficientOrderError: If ``order`` is below what the suite needs.
    """
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    settings = get_settings()
    seed = settings.default_seed if seed is None else seed
    order = settings.jet_order if order is None else order
    needed = MIN_ORDER.get(name, 0)
    if order < needed:
        raise InsufficientOrderError(
            f"suite {name!r} needs jet order at least {needed}, got {order}"
        )
    ctx = SuiteContext(
        seed=seed,
        order=order,
        base_order=settings.jet_base_order,
        instances=settings.suite_instances if instances is None else instances,
        chain_instances=(
            settings.chain_map_instances if instances is None else instances
        ),
        connection=connection,
    )
    logger.info("running suite %s (seed=%d, N=%d)", name, seed, order)
    report = SuiteReport(name, seed, order, list(SUITES[name](ctx)))
    logger.info("%s", report.summary())
    return report

