"""Identities satisfied by lifted vector fields and their jets.

Every check returns a ``JetReport`` whose residuals must vanish through the
recorded orders: the lift identity for vector fields and Hamiltonians,
first-order variations of the connection, coordinate equivariance, the
lifted differential of T[1]M and the holomorphic symplectic jets used to
build Rozansky-Witten weights.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from app.core.exceptions import ConnectionDataError
from app.core.graded import GradedPoly, GradedSpace, MatPoly, hamiltonian_lift
from app.core.jets import (
    ConnectionData,
    GrothendieckConnection,
    JetChart,
    JetMap,
    JetReport,
    JetSeries,
    apply_field,
    base_action,
    compare,
    compare_matrices,
    exp_geodesic,
    exp_graded,
    exp_symplectic,
    field_bracket,
    grothendieck,
    hat,
    jet_report,
)

logger = logging.getLogger(__name__)

ExpMap = Callable[[ConnectionData, JetChart], JetMap]


# =============================================================================
# Helpers
# =============================================================================


def _full_map(cd: ConnectionData, chart: JetChart, exp_map: ExpMap) -> JetMap:
    body = exp_map(cd, chart)
    return exp_graded(cd, chart, body) if cd.rank else body


def _padded(chart: JetChart, u: Sequence[GradedPoly]) -> list[GradedPoly | None]:
    """Body vector field extended by zero along yb and w."""
    if len(u) != chart.dimension:
        raise ConnectionDataError(
            f"vector field has {len(u)} components, base has {chart.dimension}"
        )
    rest = len(chart.base_coords) - chart.dimension
    return list(u) + [None] * rest


def _embedded(chart: JetChart, u: Sequence[GradedPoly | None]) -> list[JetSeries]:
    return [chart.zero() if c is None else chart.embed(c) for c in u]


def lie_bracket(
    cd: ConnectionData, u: Sequence[GradedPoly], v: Sequence[GradedPoly]
) -> list[GradedPoly]:
    """[u, v]^m = u^n d_n v^m - v^n d_n u^m on the base."""
    n = cd.dimension
    zero = cd.space.zero()
    return [
        sum(
            (u[k] * cd.partial(v[m], k) - v[k] * cd.partial(u[m], k) for k in range(n)),
            zero,
        )
        for m in range(n)
    ]


def gradient_field(cd: ConnectionData, f: GradedPoly) -> list[GradedPoly]:
    """Hamiltonian vector field u_f^m = d_a f (Omega^-1)^{am}."""
    if cd.omega is None:
        raise ConnectionDataError("Hamiltonian vector fields need a symplectic form")
    n, pinv = cd.dimension, cd.omega_inverse
    zero = cd.space.zero()
    return [
        sum(
            (cd.partial(f, a).scale(pinv[a][m]) for a in range(n) if pinv[a][m]),
            zero,
        )
        for m in range(n)
    ]


def base_bracket(cd: ConnectionData, f: GradedPoly, h: GradedPoly) -> GradedPoly:
    """{f, h} = d_a f (Omega^-1)^{ab} d_b h on the base."""
    n, pinv = cd.dimension, cd.omega_inverse
    acc = cd.space.zero()
    for a in range(n):
        for b in range(n):
            if pinv[a][b]:
                acc = acc + (cd.partial(f, a) * cd.partial(h, b)).scale(pinv[a][b])
    return acc


def poisson(a: JetSeries, b: JetSeries) -> JetSeries:
    """Poisson bracket in xi with the chart's constant form."""
    chart = a.chart
    chart.space.require_symplectic()
    pinv = chart.space.omega_inverse
    da = [a.derivative(x) for x in chart.xi]
    db = [b.derivative(x) for x in chart.xi]
    acc = chart.zero()
    for i, left in enumerate(da):
        if not left:
            continue
        for j, right in enumerate(db):
            if pinv[i][j] and right:
                acc = acc + (left * right).scale(pinv[i][j])
    return acc


def lift_series(field: Sequence[JetSeries], degree: int = 2) -> JetSeries:
    """Hamiltonian of the body part of a jet vector field through xi^(degree+1)."""
    chart = field[0].chart
    comps = [c.xi_truncate(degree) for c in field[: chart.dimension]]
    theta = hamiltonian_lift([c.to_poly() for c in comps], max_degree=degree + 1)
    base_order = min(c.base_order for c in comps)
    return JetSeries(chart, theta.terms, degree + 1, base_order)


# =============================================================================
# Lift identities
# =============================================================================


def check_key_identity(
    cd: ConnectionData,
    u: Sequence[GradedPoly],
    v: Sequence[GradedPoly],
    chart: JetChart,
    exp_map: ExpMap = exp_geodesic,
) -> JetReport:
    """[u^, v^] - [u, v]^ + u o v^ - v o u^ = 0."""
    phi = _full_map(cd, chart, exp_map)
    connection = grothendieck(phi)
    pu, pv = _padded(chart, u), _padded(chart, v)
    uh = hat(pu, phi, connection)
    vh = hat(pv, phi, connection)
    wh = hat(_padded(chart, lie_bracket(cd, u, v)), phi, connection)
    eu, ev = _embedded(chart, pu), _embedded(chart, pv)
    bracket = field_bracket(uh, vh)
    residuals = [
        bracket[c] - wh[c] + base_action(eu, vh[c]) - base_action(ev, uh[c])
        for c in range(len(chart.flat_coords))
    ]
    return jet_report("key identity", residuals)


def check_hamiltonian_key_identity(
    cd: ConnectionData, f: GradedPoly, h: GradedPoly, chart: JetChart
) -> JetReport:
    """{f^, h^} - {f, h}^ + f o h^ - h o f^ = 0 through xi^3 for phi_sp."""
    chart.require_order(3, "Hamiltonian key identity")
    if cd.rank:
        raise ConnectionDataError("Hamiltonian lifts cover the body block only")
    phi = exp_symplectic(cd, chart)
    connection = grothendieck(phi)

    def lifted(function: GradedPoly) -> tuple[JetSeries, list[JetSeries]]:
        field = _padded(chart, gradient_field(cd, function))
        return lift_series(hat(field, phi, connection)), _embedded(chart, field)

    fh, uf = lifted(f)
    hh, uh = lifted(h)
    bh, _ = lifted(base_bracket(cd, f, h))
    residual = poisson(fh, hh) - bh + base_action(uf, hh) - base_action(uh, fh)
    return jet_report("Hamiltonian key identity", [residual], xi_limit=3)


def check_symplectic_pullback(cd: ConnectionData, chart: JetChart) -> JetReport:
    """Omega_{mn} d_a phi^m d_b phi^n = Omega_ab for phi_sp through xi^2."""
    if cd.omega is None:
        raise ConnectionDataError("pullback check needs a symplectic form")
    phi = exp_symplectic(cd, chart)
    n, omega = cd.dimension, cd.omega
    jac = [[p.derivative(x) for p in phi.body] for x in chart.xi]
    residuals = []
    for a in range(n):
        for b in range(n):
            acc = chart.constant(-omega[a][b])
            for m in range(n):
                for k in range(n):
                    if omega[m][k]:
                        acc = acc + (jac[a][m] * jac[b][k]).scale(omega[m][k])
            residuals.append(acc)
    return jet_report(
        "symplectic pullback", residuals, xi_limit=min(chart.order - 1, 2)
    )


def linear_part_algebra(
    field: Sequence[JetSeries], omega: Sequence[Sequence[Fraction]] | None = None
) -> tuple[str, ...]:
    """Matrix algebras containing the xi-linear part of a jet field at x0.

    Always contains ``gl``; adds ``so`` when L is antisymmetric and ``sp``
    when Omega_{mb} L^m_a is symmetric.
    """
    chart = field[0].chart
    n = chart.dimension
    linear = [[Fraction(0)] * n for _ in range(n)]
    for m, comp in enumerate(field[:n]):
        for a, x in enumerate(chart.xi):
            unit = chart.space.unit(x)
            linear[m][a] = comp.terms.get(unit, Fraction(0))
    result = ["gl"]
    if all(linear[m][a] == -linear[a][m] for m in range(n) for a in range(n)):
        result.append("so")
    if omega is not None:
        lowered = [
            [sum(omega[m][b] * linear[m][a] for m in range(n)) for b in range(n)]
            for a in range(n)
        ]
        if all(lowered[a][b] == lowered[b][a] for a in range(n) for b in range(n)):
            result.append("sp")
    return tuple(result)


# =============================================================================
# Variations and equivariance
# =============================================================================


@dataclass(frozen=True)
class Variation:
    """Connection data varied by eps, with jets at eps = 0 and their derivative."""

    chart: JetChart
    varied: ConnectionData
    phi: JetMap
    connection: GrothendieckConnection
    generator: tuple[JetSeries, ...]


def _at_zero(series: JetSeries) -> JetSeries:
    return series.evaluate("eps", 0)


def variation(
    cd: ConnectionData,
    gamma: Sequence | None = None,
    bundle: Sequence | None = None,
    order: int = 3,
    base_order: int = 1,
    exp_map: ExpMap = exp_geodesic,
) -> Variation:
    """Vary the connection and compute Psi = -(d phi / d eps) (dphi/dxi)^-1."""
    varied = cd.varied(gamma=gamma, bundle=bundle)
    chart = JetChart.for_connection(varied, order=order, base_order=base_order)
    phi = _full_map(varied, chart, exp_map)
    connection = grothendieck(phi)
    delta = [p.coefficient_of("eps") for p in phi.components]
    size = len(chart.flat_coords)
    generator = []
    for c in range(size):
        acc = chart.zero()
        for b in range(size):
            entry = _at_zero(connection.inverse[b][c])
            if delta[b] and entry:
                acc = acc - delta[b] * entry
        generator.append(acc)
    return Variation(chart, varied, phi, connection, tuple(generator))


def check_variation(
    cd: ConnectionData,
    gamma: Sequence | None = None,
    bundle: Sequence | None = None,
    u: Sequence[GradedPoly] | None = None,
    order: int = 3,
    base_order: int = 1,
) -> JetReport:
    """dG_n = [G_n, Psi] - d_n Psi and, for a field u, du^ = [u^, Psi] + u o Psi."""
    var = variation(cd, gamma, bundle, order, base_order)
    chart, psi = var.chart, list(var.generator)
    residuals = []
    for k, y in enumerate(chart.y):
        row = var.connection.rows[k]
        base_row = [_at_zero(e) for e in row]
        bracket = field_bracket(base_row, psi)
        for c in range(len(chart.flat_coords)):
            change = row[c].coefficient_of("eps")
            residuals.append(change - bracket[c] + psi[c].derivative(y))
    if u is not None:
        padded = _padded(chart, u)
        lifted = hat(padded, var.phi, var.connection)
        base_lift = [_at_zero(e) for e in lifted]
        embedded = _embedded(chart, padded)
        bracket = field_bracket(base_lift, psi)
        for c in range(len(chart.flat_coords)):
            change = lifted[c].coefficient_of("eps")
            residuals.append(change - bracket[c] - base_action(embedded, psi[c]))
    return jet_report("variation", residuals)


def covariant_variation(cd: ConnectionData, gamma: Sequence) -> list:
    """nabla_a g^m_{bc} for a symmetric variation g, indexed [a][m][b][c]."""
    n, conn = cd.dimension, cd.gamma
    zero = cd.space.zero()
    g = [
        [[_coerce_base(cd, gamma[m][b][c]) for c in range(n)] for b in range(n)]
        for m in range(n)
    ]
    return [
        [
            [
                [
                    cd.partial(g[m][b][c], a)
                    + sum((conn[m][a][k] * g[k][b][c] for k in range(n)), zero)
                    - sum((conn[k][a][b] * g[m][k][c] for k in range(n)), zero)
                    - sum((conn[k][a][c] * g[m][b][k] for k in range(n)), zero)
                    for c in range(n)
                ]
                for b in range(n)
            ]
            for m in range(n)
        ]
        for a in range(n)
    ]


def _coerce_base(cd: ConnectionData, value: object) -> GradedPoly:
    """Read an entry onto the base space of ``cd``, matching generators by name."""
    if isinstance(value, GradedPoly):
        if value.space == cd.space:
            return value
        names = [g.name for g in value.space.generators]
        if any(name not in cd.space.index for name in names):
            raise ConnectionDataError("entry uses generators unknown to the base")
        terms = {}
        for mono, c in value.terms.items():
            new = [0] * cd.space.dimension
            for name, exponent in zip(names, mono):
                new[cd.space.index[name]] += exponent
            terms[tuple(new)] = c
        return GradedPoly(cd.space, terms)
    if isinstance(value, str):
        return GradedPoly.from_text(cd.space, value)
    return cd.space.constant(value)


def metric_variation_formula(
    cd: ConnectionData, gamma: Sequence, chart: JetChart
) -> list[JetSeries]:
    """Psi^m = 1/2 g^m_ab xi^a xi^b + 1/6 nabla_a g^m_bc xi^a xi^b xi^c."""
    n = cd.dimension
    nabla = covariant_variation(cd, gamma)
    xi = [chart.gen(x) for x in chart.xi]
    result = []
    for m in range(n):
        acc = chart.zero()
        for a in range(n):
            for b in range(n):
                entry = _coerce_base(cd, gamma[m][a][b])
                if entry:
                    term = chart.embed(entry) * xi[a] * xi[b]
                    acc = acc + term.scale(Fraction(1, 2))
                for c in range(n):
                    if nabla[a][m][b][c]:
                        term = chart.embed(nabla[a][m][b][c]) * xi[a] * xi[b] * xi[c]
                        acc = acc + term.scale(Fraction(1, 6))
        result.append(acc.xi_truncate(3))
    return result


def bundle_variation_formula(
    cd: ConnectionData, bundle: Sequence, chart: JetChart
) -> list[JetSeries]:
    """Graded part of Psi: (a_a xi^a + 1/2 nabla_a a_b xi^a xi^b) (w + nu).

    nabla_a a_b = d_a a_b + [A_a, a_b] - Gamma^s_ab a_s.
    """
    n, rank = cd.dimension, cd.rank
    a_var = [
        [[_coerce_base(cd, bundle[al][i][j]) for j in range(rank)] for i in range(rank)]
        for al in range(n)
    ]
    prod = cd.bundle_matrix_product
    xi = [chart.gen(x) for x in chart.xi]
    fiber = [chart.gen(w) + chart.gen(v) for w, v in zip(chart.w, chart.nu)]
    matrix = [[chart.zero() for _ in range(rank)] for _ in range(rank)]
    for al in range(n):
        for i in range(rank):
            for j in range(rank):
                if a_var[al][i][j]:
                    matrix[i][j] = matrix[i][j] + chart.embed(a_var[al][i][j]) * xi[al]
        for be in range(n):
            left = prod(cd.bundle[al], a_var[be])
            right = prod(a_var[be], cd.bundle[al])
            for i in range(rank):
                for j in range(rank):
                    entry = cd.partial(a_var[be][i][j], al) + left[i][j] - right[i][j]
                    for s in range(n):
                        entry = entry - cd.gamma[s][al][be] * a_var[s][i][j]
                    if entry:
                        term = chart.embed(entry) * xi[al] * xi[be]
                        matrix[i][j] = matrix[i][j] + term.scale(Fraction(1, 2))
    return [
        sum((matrix[i][j] * fiber[j] for j in range(rank)), chart.zero()).xi_truncate(2)
        for i in range(rank)
    ]


def check_equivariance(
    cd: ConnectionData,
    v: Sequence[GradedPoly],
    order: int = 3,
    base_order: int = 1,
) -> JetReport:
    """First-order coordinate change x -> x + eps v reproduces the geodesic map.

    The connection transforms as Gamma + eps L_v Gamma and xi as
    xi - eps xi^r d_r v; the residual is the eps coefficient of
    phi~(y, xi~) - eps v.d_y phi - phi + eps v(phi).
    """
    n, gamma = cd.dimension, cd.gamma
    zero = cd.space.zero()
    v = [_coerce_base(cd, c) for c in v]
    change = [
        [
            [
                sum(
                    (
                        v[r] * cd.partial(gamma[m][a][b], r)
                        - gamma[r][a][b] * cd.partial(v[m], r)
                        + gamma[m][r][b] * cd.partial(v[r], a)
                        + gamma[m][a][r] * cd.partial(v[r], b)
                        for r in range(n)
                    ),
                    zero,
                )
                + cd.partial(cd.partial(v[m], a), b)
                for b in range(n)
            ]
            for a in range(n)
        ]
        for m in range(n)
    ]
    varied = cd.varied(gamma=change)
    chart = JetChart.for_connection(varied, order=order, base_order=base_order)
    moved = exp_geodesic(varied, chart)
    phi = [_at_zero(p) for p in moved.body]
    eps = chart.gen("eps")
    xi = [chart.gen(x) for x in chart.xi]
    shifted = {}
    for i, x in enumerate(chart.xi):
        acc = xi[i]
        for r in range(n):
            if cd.partial(v[i], r):
                acc = acc - eps * xi[r] * chart.embed(cd.partial(v[i], r))
        shifted[x] = acc
    names = {f"y{i}": p for i, p in enumerate(phi)}
    field = [chart.embed(c) for c in v]
    residuals = []
    for m in range(n):
        first = moved.body[m].substitute(shifted).coefficient_of("eps")
        drift = sum((field[k] * phi[m].derivative(y) for k, y in enumerate(chart.y)),
                    chart.zero())
        residuals.append(first - drift + chart.embed(v[m], names))
    return jet_report("equivariance", residuals)


# =============================================================================
# T[1]M
# =============================================================================


def tangent_connection(cd: ConnectionData) -> ConnectionData:
    """Connection data of T[1]M: fibre degrees 1 and A_m = Gamma^._{m .}."""
    n = cd.dimension
    bundle = [
        [[cd.gamma[k][m][l] for l in range(n)] for k in range(n)] for m in range(n)
    ]
    return ConnectionData(
        cd.space,
        cd.gamma,
        bundle=bundle,
        fiber_degrees=(1,) * n,
        vielbein=cd.vielbein,
        omega=cd.omega,
    )


def _de_rham_field(chart: JetChart) -> list[JetSeries | None]:
    """Q = w^m d/dy^m on T[1]M."""
    return [chart.gen(w) for w in chart.w] + [None] * (
        len(chart.base_coords) - chart.dimension
    )


def qhat_t1m(tangent: ConnectionData, chart: JetChart) -> list[JetSeries]:
    """Lift Q^ = Q(phi) (dphi/dxi)^-1 - w^n G_n of the de Rham differential."""
    if tangent.fiber_degrees != (1,) * tangent.dimension:
        raise ConnectionDataError("T[1]M needs one degree-1 fibre per coordinate")
    phi = exp_graded(tangent, chart)
    return hat(_de_rham_field(chart), phi, grothendieck(phi))


def qhat_formula(tangent: ConnectionData, chart: JetChart) -> list[JetSeries]:
    """Q^ at x0 and nu = 0 in normal coordinates.

    Body: 1/2 w^k xi^a xi^b R_{ka}^r_b; fibre: w^m w^k xi^a R_{ma}^l_k.
    """
    n = tangent.dimension
    for block in tangent.gamma:
        for row in block:
            for entry in row:
                if entry.evaluate_at_zero():
                    raise ConnectionDataError(
                        "expansion assumes Gamma vanishes at the base point"
                    )
    curv = tangent.curvature()
    xi = [chart.gen(x) for x in chart.xi]
    w = [chart.gen(x) for x in chart.w]
    body = []
    for r in range(n):
        acc = chart.zero()
        for k in range(n):
            for a in range(n):
                for b in range(n):
                    value = curv[k][a][r][b].evaluate_at_zero()
                    if value:
                        acc = acc + (w[k] * xi[a] * xi[b]).scale(value / 2)
        body.append(acc.xi_truncate(2))
    fibre = []
    for lam in range(n):
        acc = chart.zero()
        for m in range(n):
            for k in range(n):
                for a in range(n):
                    value = curv[m][a][lam][k].evaluate_at_zero()
                    if value:
                        acc = acc + (w[m] * w[k] * xi[a]).scale(value)
        fibre.append(acc.xi_truncate(1))
    return body + fibre


def restrict_to_zero_section(series: JetSeries) -> JetSeries:
    """Value at x0 with nu = 0."""
    chart = series.chart
    nu = chart.nu
    return series.at_base().filter(lambda m: not any(m[i] for i in nu))


def check_qhat_formula(tangent: ConnectionData, chart: JetChart) -> JetReport:
    got = [restrict_to_zero_section(c) for c in qhat_t1m(tangent, chart)]
    return compare("Q-hat expansion", got, qhat_formula(tangent, chart))


def check_qhat_mc(tangent: ConnectionData, chart: JetChart) -> JetReport:
    """Q^(Q^) + Q o Q^ = 0 componentwise."""
    q = qhat_t1m(tangent, chart)
    de_rham = [chart.zero() if c is None else c for c in _de_rham_field(chart)]
    residuals = [apply_field(q, c) + base_action(de_rham, c) for c in q]
    return jet_report("Q-hat square", residuals)


# =============================================================================
# Holomorphic symplectic jets
# =============================================================================


@dataclass(frozen=True)
class RWJets:
    """Theta_ib, moment Hamiltonians and bundle jets at the base point."""

    theta: tuple[GradedPoly, ...]
    moment: tuple[GradedPoly, ...]
    kmat: tuple[MatPoly, ...]
    omega: tuple
    order: int


def _xi_space(chart: JetChart, omega) -> GradedSpace:
    return GradedSpace(
        [(f"xi{i + 1}", 0) for i in range(chart.dimension)], symplectic=omega
    )


def _to_xi_poly(series: JetSeries, space: GradedSpace) -> GradedPoly:
    chart = series.chart
    xi = chart.xi
    others = [i for i in range(chart.space.dimension) if i not in set(xi)]
    terms = {}
    for mono, c in series.at_base().terms.items():
        if any(mono[i] for i in others):
            continue
        terms[tuple(mono[i] for i in xi)] = c
    return GradedPoly(space, terms)


def _rw_map(cd: ConnectionData, chart: JetChart) -> JetMap:
    if cd.omega is None or not cd.anti_dimension:
        raise ConnectionDataError(
            "holomorphic symplectic jets need a form and anti-holomorphic directions"
        )
    body = exp_symplectic(cd, chart)
    return exp_graded(cd, chart, body) if cd.rank else body


def moment_field(cd: ConnectionData, mu: GradedPoly) -> list[GradedPoly]:
    return gradient_field(cd, mu)


def _theta_series(connection: GrothendieckConnection) -> list[JetSeries]:
    chart = connection.chart
    result = []
    for yb in chart.yb:
        row = connection.row(yb)
        result.append(lift_series([-e for e in row]))
    return result


def _moment_series(
    cd: ConnectionData, phi: JetMap, connection: GrothendieckConnection, moments
) -> list[JetSeries]:
    chart = phi.chart
    result = []
    for mu in moments:
        field = _padded(chart, moment_field(cd, _coerce_base(cd, mu)))
        result.append(lift_series(hat(field, phi, connection)))
    return result


def _kmat_series(connection: GrothendieckConnection) -> list[list[list[JetSeries]]]:
    """Matrices X with G_ib^nu_a = X_ab (w + nu)^b."""
    chart = connection.chart
    n = chart.dimension
    result = []
    for yb in chart.yb:
        row = connection.row(yb)
        result.append(
            [
                [row[n + a].derivative(w).xi_truncate(2) for w in chart.w]
                for a in range(len(chart.w))
            ]
        )
    return result


def rw_jets(
    cd: ConnectionData, chart: JetChart, moments: Sequence[GradedPoly] = ()
) -> RWJets:
    """Jets Theta_ib, M_alpha and K_ib at x0 through the holomorphic map.

    Raises:
        InsufficientOrderError: If the chart stops below xi^3.
        ConnectionDataError: If the data is not holomorphic symplectic.
    """
    chart.require_order(3, "holomorphic symplectic jets")
    phi = _rw_map(cd, chart)
    connection = grothendieck(phi)
    space = _xi_space(chart, cd.omega)
    theta = tuple(_to_xi_poly(t, space) for t in _theta_series(connection))
    moment = tuple(
        _to_xi_poly(m, space) for m in _moment_series(cd, phi, connection, moments)
    )
    kmat: tuple[MatPoly, ...] = ()
    if cd.rank:
        fiber = GradedSpace([(f"z{i + 1}", 0) for i in range(cd.rank)])
        kmat = tuple(
            MatPoly(fiber, space, [[_to_xi_poly(e, space) for e in r] for r in matrix])
            for matrix in _kmat_series(connection)
        )
    logger.info(
        "holomorphic jets: %d theta, %d moment maps, %d bundle jets",
        len(theta),
        len(moment),
        len(kmat),
    )
    return RWJets(theta, moment, kmat, cd.omega, chart.order)


def rw_curvature(cd: ConnectionData) -> list:
    """sR[ib][i][j][k] = d_ib Gamma^q_ik Omega_qj."""
    n, omega = cd.dimension, cd.omega
    zero = cd.space.zero()
    return [
        [
            [
                [
                    sum(
                        (
                            cd.gamma[q][i][k].derivative(f"yb{ib}").scale(omega[q][j])
                            for q in range(n)
                            if omega[q][j]
                        ),
                        zero,
                    )
                    for k in range(n)
                ]
                for j in range(n)
            ]
            for i in range(n)
        ]
        for ib in range(cd.anti_dimension)
    ]


def theta_formula(cd: ConnectionData, chart: JetChart) -> list[JetSeries]:
    """Theta_ib = 1/6 sR_ib ijk xi^i xi^j xi^k at x0."""
    n = cd.dimension
    tensor = rw_curvature(cd)
    xi = [chart.gen(x) for x in chart.xi]
    result = []
    for ib in range(cd.anti_dimension):
        acc = chart.zero()
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    value = tensor[ib][i][j][k].evaluate_at_zero()
                    if value:
                        acc = acc + (xi[i] * xi[j] * xi[k]).scale(value / 6)
        result.append(acc.xi_truncate(3))
    return result


def moment_formula(
    cd: ConnectionData, chart: JetChart, moments: Sequence[GradedPoly]
) -> list[JetSeries]:
    """M_alpha = 1/2 d_i d_j mu_alpha xi^i xi^j at x0."""
    n = cd.dimension
    xi = [chart.gen(x) for x in chart.xi]
    result = []
    for mu in moments:
        mu = _coerce_base(cd, mu)
        acc = chart.zero()
        for i in range(n):
            for j in range(n):
                value = cd.partial(cd.partial(mu, i), j).evaluate_at_zero()
                if value:
                    acc = acc + (xi[i] * xi[j]).scale(value / 2)
        result.append(acc.xi_truncate(2))
    return result


def kmat_formula(cd: ConnectionData, chart: JetChart) -> list[list[list[JetSeries]]]:
    """K_ib = xi^j K_ib,j + 1/2 xi^j xi^k nabla_j K_ib,k at x0.

    K_ib,j = F_{j ib} = -d_ib A_j for a holomorphic frame, and
    nabla_j K_k = d_j K_k + [A_j, K_k] - Gamma^s_jk K_s.
    """
    n, rank = cd.dimension, cd.rank
    prod = cd.bundle_matrix_product
    xi = [chart.gen(x) for x in chart.xi]
    result = []
    for ib in range(cd.anti_dimension):
        k = [
            [[-e.derivative(f"yb{ib}") for e in row] for row in cd.bundle[j]]
            for j in range(n)
        ]
        matrix = [[chart.zero() for _ in range(rank)] for _ in range(rank)]
        for j in range(n):
            for a in range(rank):
                for b in range(rank):
                    value = k[j][a][b].evaluate_at_zero()
                    if value:
                        matrix[a][b] = matrix[a][b] + xi[j].scale(value)
            for kk in range(n):
                left = prod(cd.bundle[j], k[kk])
                right = prod(k[kk], cd.bundle[j])
                for a in range(rank):
                    for b in range(rank):
                        entry = cd.partial(k[kk][a][b], j) + left[a][b] - right[a][b]
                        for s in range(n):
                            entry = entry - cd.gamma[s][j][kk] * k[s][a][b]
                        value = entry.evaluate_at_zero()
                        if value:
                            matrix[a][b] = matrix[a][b] + (xi[j] * xi[kk]).scale(
                                value / 2
                            )
        result.append([[e.xi_truncate(2) for e in row] for row in matrix])
    return result


def check_rw_truncations(
    cd: ConnectionData, chart: JetChart, moments: Sequence[GradedPoly] = ()
) -> list[JetReport]:
    """Compare Theta, M and K at x0 with their leading Taylor coefficients."""
    chart.require_order(3, "holomorphic symplectic jets")
    phi = _rw_map(cd, chart)
    connection = grothendieck(phi)
    reports = [
        compare(
            "theta jets",
            [t.at_base() for t in _theta_series(connection)],
            theta_formula(cd, chart),
        )
    ]
    if moments:
        reports.append(
            compare(
                "moment jets",
                [m.at_base() for m in _moment_series(cd, phi, connection, moments)],
                moment_formula(cd, chart, moments),
                xi_limit=2,
            )
        )
    if cd.rank:
        got = _kmat_series(connection)
        want = kmat_formula(cd, chart)
        reports.append(
            compare_matrices(
                "bundle jets",
                [[e.at_base() for e in row] for matrix in got for row in matrix],
                [row for matrix in want for row in matrix],
            )
        )
    return reports


def check_rw_variation(
    cd: ConnectionData,
    gamma: Sequence,
    moments: Sequence[GradedPoly] = (),
    order: int = 3,
    base_order: int = 1,
) -> JetReport:
    """d Theta_ib = d_ib Psi and d M_alpha = u_alpha o Psi + {M_alpha, Psi}.

    Psi = 1/6 g^l_ik Omega_lj xi^i xi^j xi^k for the variation g of Gamma.
    """
    varied = cd.varied(gamma=gamma)
    chart = JetChart.for_connection(varied, order=order, base_order=base_order)
    chart.require_order(3, "holomorphic symplectic variation")
    n, omega = cd.dimension, cd.omega
    phi = _rw_map(varied, chart)
    connection = grothendieck(phi)
    xi = [chart.gen(x) for x in chart.xi]
    psi = chart.zero()
    for i in range(n):
        for j in range(n):
            for k in range(n):
                coeff = cd.space.zero()
                for q in range(n):
                    if omega[q][j]:
                        entry = _coerce_base(cd, gamma[q][i][k])
                        coeff = coeff + entry.scale(omega[q][j])
                if coeff:
                    term = chart.embed(coeff) * xi[i] * xi[j] * xi[k]
                    psi = psi + term.scale(Fraction(1, 6))
    psi = psi.xi_truncate(3)
    residuals = []
    for yb, theta in zip(chart.yb, _theta_series(connection)):
        change = theta.coefficient_of("eps").at_base()
        residuals.append(change - psi.derivative(yb).at_base())
    lifted = _moment_series(varied, phi, connection, moments)
    for mu, m in zip(moments, lifted):
        field = _embedded(chart, _padded(chart, moment_field(cd, _coerce_base(cd, mu))))
        quadratic = _at_zero(m).xi_part(2)
        change = m.coefficient_of("eps")
        residuals.append(
            (change - base_action(field, psi) - poisson(quadratic, psi)).at_base()
        )
    return jet_report("holomorphic symplectic variation", residuals, xi_limit=3)


def check_neat_relation(cd: ConnectionData, chart: JetChart) -> JetReport:
    """d_ib K_jb - d_jb K_ib = 0 in the linear order at x0."""
    phi = _rw_map(cd, chart)
    connection = grothendieck(phi)
    matrices = _kmat_series(connection)
    residuals = []
    for i, yi in enumerate(chart.yb):
        for j in range(i + 1, len(chart.yb)):
            yj = chart.yb[j]
            for row_i, row_j in zip(matrices[i], matrices[j]):
                for ei, ej in zip(row_i, row_j):
                    residual = ej.derivative(yi) - ei.derivative(yj)
                    residuals.append(residual.at_base().xi_part(1))
    return jet_report("bundle jet relation", residuals, xi_limit=1)


def check_rw_maurer_cartan(cd: ConnectionData, chart: JetChart) -> JetReport:
    """d_ib Theta_jb - d_jb Theta_ib + {Theta_ib, Theta_jb} = 0 through xi^3."""
    chart.require_order(3, "holomorphic symplectic jets")
    phi = _rw_map(cd, chart)
    connection = grothendieck(phi)
    thetas = _theta_series(connection)
    residuals = []
    for i, yi in enumerate(chart.yb):
        for j in range(i + 1, len(chart.yb)):
            yj = chart.yb[j]
            residual = (
                thetas[j].derivative(yi)
                - thetas[i].derivative(yj)
                + poisson(thetas[i], thetas[j])
            )
            residuals.append(residual.at_base())
    return jet_report("holomorphic Maurer-Cartan", residuals, xi_limit=3)
