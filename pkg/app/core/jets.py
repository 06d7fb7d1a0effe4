"""Truncated jets of exponential maps around a symbolic base point.

A ``JetChart`` fixes the generators of every series: base offsets
``y = x - x0``, flat coordinates ``xi``, optional anti-holomorphic offsets
``yb``, optional graded base coordinates ``w`` with their flat partners
``nu``, and even parameters such as the variation parameter ``eps`` or the
oracle time ``t``. Series are truncated twice: in the xi degree at the
chart order N and in the base degree (y and yb together) at the carried
base order. Every ``JetSeries`` remembers up to which degrees it is exact,
so residuals of identities are only compared where they mean something.
"""

from __future__ import annotations

import logging
import random
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction

from app.core.exceptions import (
    ConnectionDataError,
    InsufficientOrderError,
    SingularMatrixError,
)
from app.core.graded import (
    Generator,
    GradedPoly,
    GradedSpace,
    Monomial,
    RationalMatrix,
    hamiltonian_lift,
    monomial_derivative,
    monomial_product,
    random_poly,
    rational_inverse,
    to_fraction,
)

logger = logging.getLogger(__name__)

_UNBOUNDED = 1 << 30
_BASE_NAME = re.compile(r"^y\d+$")
_ANTI_NAME = re.compile(r"^yb\d+$")

Matrix = list[list["JetSeries"]]


# =============================================================================
# Chart
# =============================================================================


class JetChart:
    """Generators and truncation orders shared by a family of jet series."""

    def __init__(
        self,
        dimension: int,
        order: int = 3,
        base_order: int = 1,
        slack: int = 2,
        anti_dimension: int = 0,
        fiber_degrees: Sequence[int] = (),
        parameters: Sequence[str] = (),
        omega: RationalMatrix | None = None,
    ) -> None:
        if dimension < 1:
            raise ValueError("a chart needs at least one base coordinate")
        if order < 1:
            raise InsufficientOrderError(f"jet order must be at least 1, got {order}")
        if base_order < 0 or slack < 0:
            raise ValueError("base order and slack must be non-negative")

        gens = [Generator(f"y{i}", 0, True) for i in range(dimension)]
        gens += [Generator(f"xi{i}", 0) for i in range(dimension)]
        gens += [Generator(f"yb{i}", 0, True) for i in range(anti_dimension)]
        gens += [Generator(f"w{a}", d, True) for a, d in enumerate(fiber_degrees)]
        gens += [Generator(f"nu{a}", d, True) for a, d in enumerate(fiber_degrees)]
        gens += [Generator(name, 0, True) for name in parameters]
        self.space = GradedSpace(gens, symplectic=omega)

        self.dimension = dimension
        self.anti_dimension = anti_dimension
        self.fiber_degrees = tuple(fiber_degrees)
        self.parameters = tuple(parameters)
        self.order = order
        self.base_order = base_order
        self.carry = base_order + slack

        index = self.space.index
        self.y = tuple(index[f"y{i}"] for i in range(dimension))
        self.xi = tuple(index[f"xi{i}"] for i in range(dimension))
        self.yb = tuple(index[f"yb{i}"] for i in range(anti_dimension))
        self.w = tuple(index[f"w{a}"] for a in range(len(self.fiber_degrees)))
        self.nu = tuple(index[f"nu{a}"] for a in range(len(self.fiber_degrees)))
        self.base = self.y + self.yb
        # rows of the Grothendieck connection and columns of jet vector fields
        self.base_coords = self.y + self.yb + self.w
        self.flat_coords = self.xi + self.nu
        self._xi_set = frozenset(self.xi)
        self._base_set = frozenset(self.base)

    def __repr__(self) -> str:
        return (
            f"JetChart(n={self.dimension}, N={self.order}, "
            f"base_order={self.base_order}, carry={self.carry})"
        )

    @classmethod
    def for_connection(
        cls,
        cd: ConnectionData,
        order: int = 3,
        base_order: int = 1,
        slack: int = 2,
        extra: Sequence[str] = (),
    ) -> JetChart:
        """Chart matching the coordinates and parameters of connection data."""
        return cls(
            cd.dimension,
            order=order,
            base_order=base_order,
            slack=slack,
            anti_dimension=cd.anti_dimension,
            fiber_degrees=cd.fiber_degrees,
            parameters=tuple(cd.parameters) + tuple(extra),
            omega=cd.omega,
        )

    # ------------------------------------------------------------------

    def xi_degree(self, mono: Monomial) -> int:
        return sum(mono[i] for i in self.xi)

    def base_degree(self, mono: Monomial) -> int:
        return sum(mono[i] for i in self.base)

    def index_of(self, name: str | int) -> int:
        if isinstance(name, int):
            return name
        try:
            return self.space.index[name]
        except KeyError as e:
            raise ConnectionDataError(f"chart has no generator {name!r}") from e

    def series(self, terms: Mapping[Monomial, object] | None = None) -> JetSeries:
        return JetSeries(self, terms)

    def zero(self) -> JetSeries:
        return JetSeries(self)

    def constant(self, value: object) -> JetSeries:
        return JetSeries(self, {self.space.origin: to_fraction(value)})

    def gen(self, name: str | int) -> JetSeries:
        return JetSeries(self, {self.space.unit(self.index_of(name)): Fraction(1)})

    def require_order(self, minimum: int, what: str) -> None:
        if self.order < minimum:
            raise InsufficientOrderError(
                f"{what} needs jet order at least {minimum}, chart has {self.order}"
            )

    def embed(
        self, poly: GradedPoly, mapping: Mapping[str, JetSeries] | None = None
    ) -> JetSeries:
        """Lift a polynomial on a base space into the chart by generator name.

        ``mapping`` replaces generators before truncation, so substituting
        ``y -> y + delta`` keeps every contribution of low base degree.
        """
        mapping = mapping or {}
        names = [g.name for g in poly.space.generators]
        powers: dict[tuple[str, int], JetSeries] = {}

        def power(name: str, exponent: int) -> JetSeries:
            key = (name, exponent)
            if key not in powers:
                base = mapping[name] if name in mapping else self.gen(name)
                if exponent > 1:
                    base = power(name, exponent - 1) * base
                powers[key] = base
            return powers[key]

        result = self.zero()
        for mono, coeff in poly.terms.items():
            term = self.constant(coeff)
            for position, exponent in enumerate(mono):
                if exponent:
                    term = term * power(names[position], exponent)
            result = result + term
        return result


# =============================================================================
# Series
# =============================================================================


class JetSeries:
    """A truncated series in a chart, exact through recorded orders."""

    __slots__ = ("chart", "terms", "xi_order", "base_order")

    def __init__(
        self,
        chart: JetChart,
        terms: Mapping[Monomial, object] | None = None,
        xi_order: int | None = None,
        base_order: int | None = None,
    ) -> None:
        xi_cap = chart.order if xi_order is None else min(xi_order, chart.order)
        base_cap = chart.carry if base_order is None else min(base_order, chart.carry)
        clean: dict[Monomial, Fraction] = {}
        if terms:
            odd = chart.space.odd
            for mono, coeff in terms.items():
                if not coeff:
                    continue
                if any(mono[i] > 1 for i in odd):
                    continue
                if chart.xi_degree(mono) > xi_cap or chart.base_degree(mono) > base_cap:
                    continue
                clean[mono] = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
        self.chart = chart
        self.terms = clean
        self.xi_order = xi_cap
        self.base_order = base_cap

    # ------------------------------------------------------------------
    # Protocol

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JetSeries):
            return NotImplemented
        return self.chart is other.chart and self.terms == other.terms

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"JetSeries({self.to_poly().to_text(' + ') or '0'}; "
            f"xi<={self.xi_order}, base<={self.base_order})"
        )

    def to_poly(self) -> GradedPoly:
        return GradedPoly(self.chart.space, self.terms)

    def text(self) -> str:
        return self.to_poly().to_text(" + ") or "0"

    def lowest(self) -> tuple[int, int]:
        """Smallest xi degree and base degree present."""
        if not self.terms:
            return _UNBOUNDED, _UNBOUNDED
        chart = self.chart
        return (
            min(chart.xi_degree(m) for m in self.terms),
            min(chart.base_degree(m) for m in self.terms),
        )

    def _coerce(self, other: JetSeries | int | Fraction) -> JetSeries:
        if isinstance(other, JetSeries):
            if other.chart is not self.chart:
                raise ConnectionDataError("series live in different charts")
            return other
        return self.chart.constant(other)

    # ------------------------------------------------------------------
    # Arithmetic

    def __add__(self, other: JetSeries | int | Fraction) -> JetSeries:
        other = self._coerce(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, 0) + c
        return JetSeries(
            self.chart,
            terms,
            min(self.xi_order, other.xi_order),
            min(self.base_order, other.base_order),
        )

    __radd__ = __add__

    def __neg__(self) -> JetSeries:
        return self.scale(-1)

    def __sub__(self, other: JetSeries | int | Fraction) -> JetSeries:
        return self + (-self._coerce(other))

    def __rsub__(self, other: int | Fraction) -> JetSeries:
        return self._coerce(other) - self

    def scale(self, factor: int | Fraction) -> JetSeries:
        return JetSeries(
            self.chart,
            {m: c * factor for m, c in self.terms.items()},
            self.xi_order,
            self.base_order,
        )

    def __mul__(self, other: JetSeries | int | Fraction) -> JetSeries:
        if not isinstance(other, JetSeries):
            return self.scale(to_fraction(other))
        other = self._coerce(other)
        chart = self.chart
        (a_xi, a_base), (b_xi, b_base) = self.lowest(), other.lowest()
        xi_cap = min(self.xi_order + b_xi, other.xi_order + a_xi, chart.order)
        base_cap = min(self.base_order + b_base, other.base_order + a_base, chart.carry)
        right = [
            (m, c, chart.xi_degree(m), chart.base_degree(m))
            for m, c in other.terms.items()
        ]
        space = chart.space
        terms: dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            xa, ba = chart.xi_degree(ma), chart.base_degree(ma)
            for mb, cb, xb, bb in right:
                if xa + xb > xi_cap or ba + bb > base_cap:
                    continue
                product = monomial_product(space, ma, mb)
                if product is None:
                    continue
                sign, mono = product
                value = ca * cb
                terms[mono] = terms.get(mono, 0) + (value if sign > 0 else -value)
        return JetSeries(chart, terms, xi_cap, base_cap)

    def __rmul__(self, other: int | Fraction) -> JetSeries:
        return self.scale(to_fraction(other))

    # ------------------------------------------------------------------
    # Calculus

    def derivative(self, name: str | int) -> JetSeries:
        chart = self.chart
        index = chart.index_of(name)
        terms: dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            result = monomial_derivative(chart.space, mono, index)
            if result is None:
                continue
            factor, new = result
            terms[new] = terms.get(new, 0) + c * factor
        xi_order = self.xi_order - (index in chart._xi_set)
        base_order = self.base_order - (index in chart._base_set)
        return JetSeries(chart, terms, xi_order, base_order)

    def euler(self) -> JetSeries:
        """Weight every term by its xi degree."""
        chart = self.chart
        return JetSeries(
            chart,
            {m: c * chart.xi_degree(m) for m, c in self.terms.items()},
            self.xi_order,
            self.base_order,
        )

    def filter(self, keep) -> JetSeries:
        return JetSeries(
            self.chart,
            {m: c for m, c in self.terms.items() if keep(m)},
            self.xi_order,
            self.base_order,
        )

    def xi_part(self, degree: int) -> JetSeries:
        chart = self.chart
        return self.filter(lambda m: chart.xi_degree(m) == degree)

    def xi_truncate(self, degree: int) -> JetSeries:
        return JetSeries(
            self.chart, self.terms, min(self.xi_order, degree), self.base_order
        )

    def at_base(self) -> JetSeries:
        """Value at y = yb = 0."""
        if self.base_order < 0:
            raise InsufficientOrderError("series carries no base-point value")
        chart = self.chart
        return JetSeries(
            chart,
            {m: c for m, c in self.terms.items() if not chart.base_degree(m)},
            self.xi_order,
        )

    def coefficient_of(self, name: str | int, power: int = 1) -> JetSeries:
        """Coefficient of ``name**power`` for an even parameter."""
        index = self.chart.index_of(name)
        terms: dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            if mono[index] == power:
                new = list(mono)
                new[index] = 0
                terms[tuple(new)] = c
        return JetSeries(self.chart, terms, self.xi_order, self.base_order)

    def integrate(self, name: str | int) -> JetSeries:
        """Antiderivative in an even parameter, vanishing at zero."""
        index = self.chart.index_of(name)
        terms: dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            new = list(mono)
            new[index] += 1
            terms[tuple(new)] = c / new[index]
        return JetSeries(self.chart, terms, self.xi_order, self.base_order)

    def evaluate(self, name: str | int, value: object) -> JetSeries:
        """Set an even parameter to a rational value."""
        index = self.chart.index_of(name)
        value = to_fraction(value)
        terms: dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            new = list(mono)
            exponent, new[index] = new[index], 0
            key = tuple(new)
            terms[key] = terms.get(key, 0) + c * value**exponent
        return JetSeries(self.chart, terms, self.xi_order, self.base_order)

    def substitute(self, mapping: Mapping[int, JetSeries]) -> JetSeries:
        """Simultaneous substitution of generators by series."""
        chart = self.chart
        powers: dict[tuple[int, int], JetSeries] = {}

        def power(index: int, exponent: int) -> JetSeries:
            key = (index, exponent)
            if key not in powers:
                base = mapping[index] if index in mapping else chart.gen(index)
                powers[key] = (
                    base if exponent == 1 else power(index, exponent - 1) * base
                )
            return powers[key]

        result = JetSeries(chart, None, self.xi_order, self.base_order)
        for mono, c in self.terms.items():
            term = chart.constant(c)
            for index, exponent in enumerate(mono):
                if exponent:
                    term = term * power(index, exponent)
            result = result + term
        return result


def validity(series: Iterable[JetSeries]) -> tuple[int, int]:
    """Common xi and base orders through which all series are exact."""
    items = list(series)
    if not items:
        return _UNBOUNDED, _UNBOUNDED
    return min(s.xi_order for s in items), min(s.base_order for s in items)


# =============================================================================
# Matrices and vector fields of series
# =============================================================================


def matmul(
    a: Sequence[Sequence[JetSeries]], b: Sequence[Sequence[JetSeries]]
) -> Matrix:
    chart = a[0][0].chart
    inner = len(b)
    cols = len(b[0])
    result: Matrix = []
    for row in a:
        out = []
        for j in range(cols):
            acc = chart.zero()
            for k in range(inner):
                if row[k] and b[k][j]:
                    acc = acc + row[k] * b[k][j]
            out.append(acc)
        result.append(out)
    return result


def vecmat(v: Sequence[JetSeries], m: Sequence[Sequence[JetSeries]]) -> list[JetSeries]:
    return matmul([list(v)], m)[0]


def identity_matrix(chart: JetChart, size: int) -> Matrix:
    return [[chart.constant(int(i == j)) for j in range(size)] for i in range(size)]


def invert(matrix: Sequence[Sequence[JetSeries]]) -> Matrix:
    """Inverse of a matrix of series with invertible rational constant part.

    Splits M = C + R with C the pure constants and iterates
    X <- C^-1 - C^-1 R X until the truncated series stop changing.

    Raises:
        ConnectionDataError: If the constant part is singular.
    """
    chart = matrix[0][0].chart
    size = len(matrix)
    origin = chart.space.origin
    constant = [
        [matrix[i][j].terms.get(origin, Fraction(0)) for j in range(size)]
        for i in range(size)
    ]
    try:
        cinv = rational_inverse(constant)
    except SingularMatrixError as e:
        raise ConnectionDataError("Jacobian is singular at the base point") from e
    cinv_series = [
        [chart.constant(cinv[i][j]) for j in range(size)] for i in range(size)
    ]
    rest = [
        [matrix[i][j] - chart.constant(constant[i][j]) for j in range(size)]
        for i in range(size)
    ]
    step = matmul(cinv_series, rest)
    result = cinv_series
    bound = chart.order + chart.carry + len(chart.space.odd) + 3
    for _ in range(bound):
        correction = matmul(step, result)
        following = [
            [cinv_series[i][j] - correction[i][j] for j in range(size)]
            for i in range(size)
        ]
        if all(
            following[i][j].terms == result[i][j].terms
            for i in range(size)
            for j in range(size)
        ):
            return following
        result = following
    return result


def apply_field(field: Sequence[JetSeries], f: JetSeries) -> JetSeries:
    """X(f) = X^C d_C f over the flat coordinates of the chart."""
    chart = f.chart
    acc = chart.zero()
    for component, index in zip(field, chart.flat_coords):
        if component:
            acc = acc + component * f.derivative(index)
    return acc


def field_bracket(x: Sequence[JetSeries], y: Sequence[JetSeries]) -> list[JetSeries]:
    """Commutator of two even vector fields in the flat coordinates."""
    return [apply_field(x, yc) - apply_field(y, xc) for xc, yc in zip(x, y)]


def base_action(u: Sequence[JetSeries], f: JetSeries) -> JetSeries:
    """u o f = u^A d_A f over the base coordinates (y, yb, w)."""
    chart = f.chart
    acc = chart.zero()
    for component, index in zip(u, chart.base_coords):
        if component:
            acc = acc + component * f.derivative(index)
    return acc


# =============================================================================
# Connection data
# =============================================================================


def base_space(
    dimension: int, anti_dimension: int = 0, parameters: Sequence[str] = ()
) -> GradedSpace:
    """Polynomial ring for connection data: y{i}, yb{i} and even parameters."""
    gens = [Generator(f"y{i}", 0) for i in range(dimension)]
    gens += [Generator(f"yb{i}", 0) for i in range(anti_dimension)]
    gens += [Generator(name, 0, True) for name in parameters]
    return GradedSpace(gens)


def _coerce_poly(space: GradedSpace, value: object) -> GradedPoly:
    if isinstance(value, GradedPoly):
        if value.space != space:
            raise ConnectionDataError("connection data entry lives on another space")
        return value
    if isinstance(value, str):
        try:
            return GradedPoly.from_text(space, value)
        except ValueError as e:
            raise ConnectionDataError(str(e)) from e
    return space.constant(value)


@dataclass(frozen=True)
class ConnectionData:
    """Torsion-free connection near x0 plus optional bundle, frame and form.

    ``gamma[mu][nu][rho]`` is Gamma^mu_{nu rho}; ``bundle[mu]`` is the
    connection matrix A_mu on a graded vector bundle with fibre degrees
    ``fiber_degrees``; ``vielbein[a][mu]`` is e^mu_a; ``omega`` is a
    constant Darboux form.
    """

    space: GradedSpace
    gamma: tuple
    bundle: tuple = ()
    fiber_degrees: tuple[int, ...] = ()
    vielbein: tuple | None = None
    omega: RationalMatrix | None = None
    omega_inverse: RationalMatrix | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        space = self.space
        n = self.dimension
        if n < 1:
            raise ConnectionDataError("connection data needs at least one coordinate")
        coerce = lambda value: _coerce_poly(space, value)  # noqa: E731

        if len(self.gamma) != n or any(
            len(row) != n or any(len(col) != n for col in row) for row in self.gamma
        ):
            raise ConnectionDataError(f"Christoffel symbols must be {n}x{n}x{n}")
        gamma = tuple(
            tuple(tuple(coerce(x) for x in col) for col in row) for row in self.gamma
        )
        object.__setattr__(self, "gamma", gamma)
        for mu in range(n):
            for a in range(n):
                for b in range(a + 1, n):
                    if gamma[mu][a][b] != gamma[mu][b][a]:
                        raise ConnectionDataError(
                            f"connection has torsion: Gamma^{mu}_{{{a}{b}}} "
                            f"!= Gamma^{mu}_{{{b}{a}}}"
                        )

        rank = len(self.fiber_degrees)
        if self.bundle:
            if len(self.bundle) != n:
                raise ConnectionDataError(f"bundle connection needs {n} matrices")
            bundle = tuple(
                tuple(tuple(coerce(x) for x in row) for row in matrix)
                for matrix in self.bundle
            )
            for matrix in bundle:
                if len(matrix) != rank or any(len(row) != rank for row in matrix):
                    raise ConnectionDataError(
                        f"bundle matrices must be {rank}x{rank}"
                    )
                for a in range(rank):
                    for b in range(rank):
                        mixed = self.fiber_degrees[a] != self.fiber_degrees[b]
                        if matrix[a][b] and mixed:
                            raise ConnectionDataError(
                                "bundle connection mixes fibre degrees"
                            )
            object.__setattr__(self, "bundle", bundle)
        elif rank:
            zero = space.zero()
            object.__setattr__(
                self,
                "bundle",
                tuple(tuple((zero,) * rank for _ in range(rank)) for _ in range(n)),
            )
        object.__setattr__(self, "fiber_degrees", tuple(self.fiber_degrees))

        if self.vielbein is not None:
            if len(self.vielbein) != n or any(len(row) != n for row in self.vielbein):
                raise ConnectionDataError(f"vielbein must be {n}x{n}")
            vielbein = tuple(tuple(coerce(x) for x in row) for row in self.vielbein)
            try:
                rational_inverse(
                    [[entry.evaluate_at_zero() for entry in row] for row in vielbein]
                )
            except SingularMatrixError as e:
                raise ConnectionDataError(
                    "vielbein is degenerate at the base point"
                ) from e
            object.__setattr__(self, "vielbein", vielbein)

        if self.omega is not None:
            omega = tuple(tuple(to_fraction(x) for x in row) for row in self.omega)
            if len(omega) != n or any(len(row) != n for row in omega):
                raise ConnectionDataError(f"symplectic form must be {n}x{n}")
            if any(omega[a][b] != -omega[b][a] for a in range(n) for b in range(n)):
                raise ConnectionDataError("symplectic form is not antisymmetric")
            try:
                inverse = rational_inverse(omega)
            except SingularMatrixError as e:
                raise ConnectionDataError("symplectic form is degenerate") from e
            object.__setattr__(self, "omega", omega)
            object.__setattr__(self, "omega_inverse", inverse)
            self._require_parallel_form()

    def _require_parallel_form(self) -> None:
        n, omega, gamma = self.dimension, self.omega, self.gamma
        for rho in range(n):
            for mu in range(n):
                for nu in range(n):
                    acc = self.space.zero()
                    for lam in range(n):
                        if omega[lam][nu]:
                            acc = acc + gamma[lam][rho][mu].scale(omega[lam][nu])
                        if omega[mu][lam]:
                            acc = acc + gamma[lam][rho][nu].scale(omega[mu][lam])
                    if acc:
                        raise ConnectionDataError(
                            "connection does not preserve the symplectic form"
                        )

    # ------------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return sum(1 for g in self.space.generators if _BASE_NAME.match(g.name))

    @property
    def anti_dimension(self) -> int:
        return sum(1 for g in self.space.generators if _ANTI_NAME.match(g.name))

    @property
    def rank(self) -> int:
        return len(self.fiber_degrees)

    @property
    def parameters(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.space.generators if g.parameter)

    def partial(self, poly: GradedPoly, index: int) -> GradedPoly:
        return poly.derivative(f"y{index}")

    def varied(
        self,
        gamma: Sequence | None = None,
        bundle: Sequence | None = None,
        name: str = "eps",
    ) -> ConnectionData:
        """Connection data with Gamma + eps*gamma and A + eps*a.

        Raises:
            ConnectionDataError: If the varied data is invalid.
        """
        if name in self.space.index:
            raise ConnectionDataError(f"parameter {name!r} already present")
        space = base_space(
            self.dimension, self.anti_dimension, self.parameters + (name,)
        )
        eps = space.gen(name)

        def move(poly: GradedPoly) -> GradedPoly:
            return GradedPoly(space, {m + (0,): c for m, c in poly.terms.items()})

        def lift(value: object) -> GradedPoly:
            if isinstance(value, GradedPoly):
                return move(value) if value.space == self.space else value
            return _coerce_poly(space, value)

        n, rank = self.dimension, self.rank
        new_gamma = [
            [[move(self.gamma[mu][a][b]) for b in range(n)] for a in range(n)]
            for mu in range(n)
        ]
        if gamma is not None:
            for mu in range(n):
                for a in range(n):
                    for b in range(n):
                        new_gamma[mu][a][b] += eps * lift(gamma[mu][a][b])
        new_bundle = [
            [[move(self.bundle[mu][a][b]) for b in range(rank)] for a in range(rank)]
            for mu in range(n)
        ] if rank else []
        if bundle is not None:
            for mu in range(n):
                for a in range(rank):
                    for b in range(rank):
                        new_bundle[mu][a][b] += eps * lift(bundle[mu][a][b])
        vielbein = (
            None
            if self.vielbein is None
            else tuple(tuple(move(x) for x in row) for row in self.vielbein)
        )
        return ConnectionData(
            space,
            new_gamma,
            bundle=new_bundle,
            fiber_degrees=self.fiber_degrees,
            vielbein=vielbein,
            omega=self.omega,
        )

    # ------------------------------------------------------------------
    # Curvature on the base space

    def curvature(self) -> list:
        """R[g][a][m][b] = R_{g a}^m_b."""
        n, gamma = self.dimension, self.gamma
        d = self.partial
        result = []
        for g in range(n):
            block_g = []
            for a in range(n):
                block_a = []
                for m in range(n):
                    row = []
                    for b in range(n):
                        value = d(gamma[m][a][b], g) - d(gamma[m][g][b], a)
                        for k in range(n):
                            value = value + gamma[m][g][k] * gamma[k][a][b]
                            value = value - gamma[m][a][k] * gamma[k][g][b]
                        row.append(value)
                    block_a.append(row)
                block_g.append(block_a)
            result.append(block_g)
        return result

    def symplectic_curvature(self) -> list:
        """sR[m][g][a][b] = Omega^{nu m} R_{nu g}^l_b Omega_{l a}."""
        if self.omega is None:
            raise ConnectionDataError("connection data carries no symplectic form")
        n, omega, pinv = self.dimension, self.omega, self.omega_inverse
        curv = self.curvature()
        zero = self.space.zero()
        lowered = [
            [
                [
                    [
                        sum(
                            (
                                curv[nu][g][lam][b].scale(omega[lam][a])
                                for lam in range(n)
                                if omega[lam][a]
                            ),
                            zero,
                        )
                        for b in range(n)
                    ]
                    for a in range(n)
                ]
                for g in range(n)
            ]
            for nu in range(n)
        ]
        return [
            [
                [
                    [
                        sum(
                            (
                                lowered[nu][g][a][b].scale(pinv[nu][m])
                                for nu in range(n)
                                if pinv[nu][m]
                            ),
                            zero,
                        )
                        for b in range(n)
                    ]
                    for a in range(n)
                ]
                for g in range(n)
            ]
            for m in range(n)
        ]

    def bundle_matrix_product(self, x: Sequence, y: Sequence) -> list:
        rank = self.rank
        zero = self.space.zero()
        return [
            [sum((x[i][k] * y[k][j] for k in range(rank)), zero) for j in range(rank)]
            for i in range(rank)
        ]

    def bundle_curvature(self) -> list:
        """F[b][g] = d_b A_g - d_g A_b + [A_b, A_g]."""
        n, rank, bundle = self.dimension, self.rank, self.bundle
        result = []
        for b in range(n):
            row = []
            for g in range(n):
                ab = self.bundle_matrix_product(bundle[b], bundle[g])
                ba = self.bundle_matrix_product(bundle[g], bundle[b])
                row.append(
                    [
                        [
                            self.partial(bundle[g][i][j], b)
                            - self.partial(bundle[b][i][j], g)
                            + ab[i][j]
                            - ba[i][j]
                            for j in range(rank)
                        ]
                        for i in range(rank)
                    ]
                )
            result.append(row)
        return result


# =============================================================================
# Random connection data
# =============================================================================


def darboux_form(dimension: int) -> RationalMatrix:
    """Standard form with Omega_{2i, 2i+1} = 1."""
    if dimension % 2:
        raise ConnectionDataError("a symplectic form needs even dimension")
    rows = [[Fraction(0)] * dimension for _ in range(dimension)]
    for i in range(0, dimension, 2):
        rows[i][i + 1] = Fraction(1)
        rows[i + 1][i] = Fraction(-1)
    return tuple(tuple(row) for row in rows)


def random_base_poly(
    space: GradedSpace,
    rng: random.Random,
    degree: int = 1,
    constant: bool = True,
    density: float = 0.6,
) -> GradedPoly:
    """Random polynomial in the base coordinates up to a given degree."""
    degrees = range(0 if constant else 1, degree + 1)
    return random_poly(space, rng, flat_degrees=degrees, density=density)


def random_christoffel(
    space: GradedSpace,
    dimension: int,
    rng: random.Random,
    degree: int = 1,
    constant: bool = True,
    omega: RationalMatrix | None = None,
) -> list:
    """Random symbols symmetric in the lower indices, indexed [mu][a][b].

    With ``omega`` the symbols are Omega^-1 S for a totally symmetric S, so
    the constant form stays parallel.
    """
    n = dimension
    if omega is None:
        gamma = [[[space.zero()] * n for _ in range(n)] for _ in range(n)]
        for mu in range(n):
            for a in range(n):
                for b in range(a, n):
                    value = random_base_poly(space, rng, degree, constant)
                    gamma[mu][a][b] = value
                    gamma[mu][b][a] = value
        return gamma
    pinv = rational_inverse(omega)
    sym: dict[tuple[int, ...], GradedPoly] = {}
    for a in range(n):
        for b in range(a, n):
            for c in range(b, n):
                sym[(a, b, c)] = random_base_poly(space, rng, degree, constant)

    def s(*indices: int) -> GradedPoly:
        return sym[tuple(sorted(indices))]

    return [
        [
            [
                sum(
                    (
                        s(lam, a, b).scale(pinv[mu][lam])
                        for lam in range(n)
                        if pinv[mu][lam]
                    ),
                    space.zero(),
                )
                for b in range(n)
            ]
            for a in range(n)
        ]
        for mu in range(n)
    ]


def random_connection(
    dimension: int,
    rng: random.Random,
    degree: int = 1,
    constant: bool = True,
    anti_dimension: int = 0,
) -> ConnectionData:
    """Random torsion-free connection with polynomial Christoffel symbols."""
    space = base_space(dimension, anti_dimension)
    return ConnectionData(
        space, random_christoffel(space, dimension, rng, degree, constant)
    )


def random_symplectic_connection(
    dimension: int,
    rng: random.Random,
    degree: int = 1,
    constant: bool = True,
    anti_dimension: int = 0,
) -> ConnectionData:
    """Gamma = Omega^-1 S with S totally symmetric and Omega in Darboux form."""
    space = base_space(dimension, anti_dimension)
    omega = darboux_form(dimension)
    gamma = random_christoffel(space, dimension, rng, degree, constant, omega)
    return ConnectionData(space, gamma, omega=omega)


def flat_connection(
    dimension: int, anti_dimension: int = 0, symplectic: bool = False
) -> ConnectionData:
    """Connection with vanishing symbols, optionally with the Darboux form."""
    space = base_space(dimension, anti_dimension)
    n = dimension
    gamma = [[[space.zero()] * n for _ in range(n)] for _ in range(n)]
    omega = darboux_form(dimension) if symplectic else None
    return ConnectionData(space, gamma, omega=omega)


def random_bundle(
    cd: ConnectionData,
    rng: random.Random,
    fiber_degrees: Sequence[int] = (0, 0),
    degree: int = 1,
    constant: bool = True,
) -> ConnectionData:
    """Add a random degree-preserving bundle connection."""
    n, space = cd.dimension, cd.space
    rank = len(fiber_degrees)
    bundle = [
        [
            [
                random_base_poly(cd.space, rng, degree, constant)
                if fiber_degrees[a] == fiber_degrees[b]
                else space.zero()
                for b in range(rank)
            ]
            for a in range(rank)
        ]
        for _ in range(n)
    ]
    return replace(cd, bundle=bundle, fiber_degrees=tuple(fiber_degrees))


def random_vielbein(
    cd: ConnectionData, rng: random.Random, degree: int = 1
) -> ConnectionData:
    """Add a frame equal to the identity at the base point."""
    n = cd.dimension
    vielbein = [
        [
            random_base_poly(cd.space, rng, degree, constant=False) + int(a == mu)
            for mu in range(n)
        ]
        for a in range(n)
    ]
    return replace(cd, vielbein=vielbein)


def random_vector_field(
    cd: ConnectionData, rng: random.Random, degree: int = 2, vanishing: bool = False
) -> list[GradedPoly]:
    """Random polynomial vector field u^mu on the base."""
    return [
        random_base_poly(cd.space, rng, degree, constant=not vanishing)
        for _ in range(cd.dimension)
    ]


# =============================================================================
# Exponential maps
# =============================================================================


@dataclass(frozen=True)
class JetMap:
    """Components phi^A of a formal exponential map in a chart.

    ``body`` is indexed like the y coordinates and ``graded`` like the w
    coordinates; ``transport`` is the parallel transport matrix W.
    """

    chart: JetChart
    body: tuple[JetSeries, ...]
    graded: tuple[JetSeries, ...] = ()
    transport: tuple[tuple[JetSeries, ...], ...] | None = None

    @property
    def components(self) -> tuple[JetSeries, ...]:
        return self.body + self.graded

    def offsets(self) -> list[JetSeries]:
        return [phi - self.chart.gen(y) for phi, y in zip(self.body, self.chart.y)]


def _check_chart(cd: ConnectionData, chart: JetChart) -> None:
    if chart.dimension != cd.dimension or chart.anti_dimension != cd.anti_dimension:
        raise ConnectionDataError(f"{chart!r} does not match the connection data")
    if chart.fiber_degrees != cd.fiber_degrees:
        raise ConnectionDataError("chart and connection data disagree on fibre degrees")
    missing = [name for name in cd.parameters if name not in chart.space.index]
    if missing:
        raise ConnectionDataError(f"chart lacks parameters {missing}")


def _shift(chart: JetChart, delta: Sequence[JetSeries]) -> dict[str, JetSeries]:
    return {f"y{i}": chart.gen(y) + d for i, (y, d) in enumerate(zip(chart.y, delta))}


def _xi(chart: JetChart) -> list[JetSeries]:
    return [chart.gen(x) for x in chart.xi]


def exp_geodesic(cd: ConnectionData, chart: JetChart) -> JetMap:
    """Geodesic exponential map phi = y + delta, delta_1 = xi.

    Solves k(k-1) delta_k = -[Gamma(y + delta)(E delta)(E delta)]_k, the
    Taylor form of the geodesic equation along t -> phi(y, t xi).
    """
    _check_chart(cd, chart)
    n = cd.dimension
    delta = _xi(chart)
    for k in range(2, chart.order + 1):
        mapping = _shift(chart, delta)
        velocity = [d.euler() for d in delta]
        update = []
        for mu in range(n):
            acc = chart.zero()
            for a in range(n):
                for b in range(n):
                    entry = cd.gamma[mu][a][b]
                    if entry:
                        term = chart.embed(entry, mapping)
                        acc = acc + term * velocity[a] * velocity[b]
            update.append(acc.xi_part(k).scale(Fraction(-1, k * (k - 1))))
        delta = [d + u for d, u in zip(delta, update)]
    body = tuple(chart.gen(y) + d for y, d in zip(chart.y, delta))
    logger.debug("geodesic exponential map computed on %r", chart)
    return JetMap(chart, body)


def exp_orthonormal(cd: ConnectionData, chart: JetChart) -> JetMap:
    """Time-one flow of xi^a e_a, solved by k delta_k = [xi^a e_a(y + delta)]_k.

    Raises:
        ConnectionDataError: If the data carries no vielbein.
    """
    _check_chart(cd, chart)
    if cd.vielbein is None:
        raise ConnectionDataError("orthonormal exponential map needs a vielbein")
    n = cd.dimension
    xi = _xi(chart)
    delta = [chart.zero() for _ in range(n)]
    for k in range(1, chart.order + 1):
        mapping = _shift(chart, delta)
        update = []
        for mu in range(n):
            acc = chart.zero()
            for a in range(n):
                entry = cd.vielbein[a][mu]
                if entry:
                    acc = acc + xi[a] * chart.embed(entry, mapping)
            update.append(acc.xi_part(k).scale(Fraction(1, k)))
        delta = [d + u for d, u in zip(delta, update)]
    return JetMap(chart, tuple(chart.gen(y) + d for y, d in zip(chart.y, delta)))


def _cubic(chart: JetChart, tensor, mu: int) -> JetSeries:
    """sum over g, a, b of tensor[mu][g][a][b] xi^g xi^a xi^b."""
    n = chart.dimension
    xi = _xi(chart)
    acc = chart.zero()
    for g in range(n):
        for a in range(n):
            for b in range(n):
                entry = tensor[mu][g][a][b]
                if entry:
                    acc = acc + chart.embed(entry) * xi[g] * xi[a] * xi[b]
    return acc


def exp_symplectic(cd: ConnectionData, chart: JetChart) -> JetMap:
    """Geodesic map shifted by -(1/24) sR^mu_{gab} xi^g xi^a xi^b.

    The shift makes the pullback of the constant form agree with the form
    through the quadratic order in xi.
    """
    sr = cd.symplectic_curvature()
    geodesic = exp_geodesic(cd, chart)
    body = tuple(
        phi + _cubic(chart, sr, mu).scale(Fraction(-1, 24))
        for mu, phi in enumerate(geodesic.body)
    )
    return JetMap(chart, body)


def exp_graded(
    cd: ConnectionData, chart: JetChart, body: JetMap | None = None
) -> JetMap:
    """Graded exponential map phi^a = W^a_b (w^b + nu^b) over a body map.

    W is parallel transport along t -> phi(y, t xi) and solves
    k W_k = -[A(phi) (E delta) W]_k.

    Raises:
        ConnectionDataError: If the data carries no graded bundle.
    """
    _check_chart(cd, chart)
    if not cd.rank:
        raise ConnectionDataError("graded exponential map needs a graded bundle")
    if body is None:
        body = exp_geodesic(cd, chart)
    n, rank = cd.dimension, cd.rank
    velocity = [d.euler() for d in body.offsets()]
    mapping = {f"y{i}": phi for i, phi in enumerate(body.body)}
    drive = [[chart.zero() for _ in range(rank)] for _ in range(rank)]
    for alpha in range(n):
        for i in range(rank):
            for j in range(rank):
                entry = cd.bundle[alpha][i][j]
                if entry:
                    term = chart.embed(entry, mapping) * velocity[alpha]
                    drive[i][j] = drive[i][j] + term
    transport = identity_matrix(chart, rank)
    for k in range(1, chart.order + 1):
        rhs = matmul(drive, transport)
        transport = [
            [
                transport[i][j] - rhs[i][j].xi_part(k).scale(Fraction(1, k))
                for j in range(rank)
            ]
            for i in range(rank)
        ]
    fiber = [chart.gen(w) + chart.gen(v) for w, v in zip(chart.w, chart.nu)]
    graded = tuple(
        sum((transport[a][b] * fiber[b] for b in range(rank)), chart.zero())
        for a in range(rank)
    )
    return JetMap(
        chart,
        body.body,
        graded,
        tuple(tuple(row) for row in transport),
    )


# =============================================================================
# Transcribed expansions
# =============================================================================


def geodesic_formula(cd: ConnectionData, chart: JetChart) -> list[JetSeries]:
    """y + xi - 1/2 Gamma xi xi + (-1/6 dGamma + 1/3 Gamma Gamma) xi^3."""
    _check_chart(cd, chart)
    n, gamma = cd.dimension, cd.gamma
    xi = _xi(chart)
    result = []
    for mu in range(n):
        acc = chart.gen(chart.y[mu]) + xi[mu]
        for a in range(n):
            for b in range(n):
                if gamma[mu][a][b]:
                    term = chart.embed(gamma[mu][a][b]) * xi[a] * xi[b]
                    acc = acc - term.scale(Fraction(1, 2))
        for g in range(n):
            for a in range(n):
                for b in range(n):
                    coeff = cd.partial(gamma[mu][a][b], g).scale(Fraction(-1, 6))
                    for k in range(n):
                        coeff = coeff + (gamma[mu][k][g] * gamma[k][a][b]).scale(
                            Fraction(1, 3)
                        )
                    if coeff:
                        acc = acc + chart.embed(coeff) * xi[g] * xi[a] * xi[b]
        result.append(acc.xi_truncate(3))
    return result


def orthonormal_formula(cd: ConnectionData, chart: JetChart) -> list[JetSeries]:
    """y + xi^a e_a + 1/2 (e_b.de_a) xi^a xi^b + 1/6 e_c.d(e_b.de_a) xi^3."""
    _check_chart(cd, chart)
    if cd.vielbein is None:
        raise ConnectionDataError("orthonormal expansion needs a vielbein")
    n, e = cd.dimension, cd.vielbein

    def along(b: int, poly: GradedPoly) -> GradedPoly:
        terms = (e[b][nu] * cd.partial(poly, nu) for nu in range(n))
        return sum(terms, cd.space.zero())

    xi = _xi(chart)
    result = []
    for mu in range(n):
        acc = chart.gen(chart.y[mu])
        for a in range(n):
            acc = acc + xi[a] * chart.embed(e[a][mu])
            for b in range(n):
                second = along(b, e[a][mu])
                if second:
                    acc = acc + chart.embed(second) * xi[a] * xi[b] * Fraction(1, 2)
                for c in range(n):
                    third = along(c, second)
                    if third:
                        term = chart.embed(third) * xi[c] * xi[a] * xi[b]
                        acc = acc + term.scale(Fraction(1, 6))
        result.append(acc.xi_truncate(3))
    return result


def symplectic_formula(cd: ConnectionData, chart: JetChart) -> list[JetSeries]:
    """Geodesic expansion minus (1/24) sR^mu_{gab} xi^g xi^a xi^b."""
    sr = cd.symplectic_curvature()
    return [
        (phi - _cubic(chart, sr, mu).scale(Fraction(1, 24))).xi_truncate(3)
        for mu, phi in enumerate(geodesic_formula(cd, chart))
    ]


def _matrix_sum(cd: ConnectionData, *matrices) -> list:
    rank = cd.rank
    zero = cd.space.zero()
    return [
        [sum((m[i][j] for m in matrices), zero) for j in range(rank)]
        for i in range(rank)
    ]


def _matrix_scale(matrix, factor) -> list:
    return [[entry.scale(factor) for entry in row] for row in matrix]


def _matrix_partial(cd: ConnectionData, matrix, index: int) -> list:
    return [[cd.partial(entry, index) for entry in row] for row in matrix]


def _matrix_times_poly(matrix, poly: GradedPoly) -> list:
    return [[entry * poly for entry in row] for row in matrix]


def transport_formula(cd: ConnectionData, chart: JetChart) -> list[list[JetSeries]]:
    """Expansion of W through xi^3.

    W = I - A_a xi^a + 1/2 M_ab xi^a xi^b + 1/6 T_abg xi^a xi^b xi^g with
    M_ab = A_a A_b + Gamma^r_ab A_r - d_a A_b and
    T_abg = d_g M_ab - Gamma^r_ab (A_r A_g + A_g A_r + 2 A_s Gamma^s_rg
    - d_r A_g - d_g A_r) - M_ab A_g.
    """
    _check_chart(cd, chart)
    n, rank, gamma, bundle = cd.dimension, cd.rank, cd.gamma, cd.bundle
    prod = cd.bundle_matrix_product

    def contract(poly_of, matrix_of) -> list:
        return _matrix_sum(
            cd, *(_matrix_times_poly(matrix_of(r), poly_of(r)) for r in range(n))
        )

    m = {}
    for a in range(n):
        for b in range(n):
            m[a, b] = _matrix_sum(
                cd,
                prod(bundle[a], bundle[b]),
                contract(lambda r: gamma[r][a][b], lambda r: bundle[r]),
                _matrix_scale(_matrix_partial(cd, bundle[b], a), -1),
            )

    xi = _xi(chart)
    result = identity_matrix(chart, rank)

    def add(matrix, factor: Fraction, monomial: JetSeries) -> None:
        for i in range(rank):
            for j in range(rank):
                if matrix[i][j]:
                    term = chart.embed(matrix[i][j]) * monomial
                    result[i][j] = result[i][j] + term.scale(factor)

    for a in range(n):
        add(bundle[a], Fraction(-1), xi[a])
        for b in range(n):
            add(m[a, b], Fraction(1, 2), xi[a] * xi[b])
            for g in range(n):
                def inner(r: int, g: int = g) -> list:
                    return _matrix_sum(
                        cd,
                        prod(bundle[r], bundle[g]),
                        prod(bundle[g], bundle[r]),
                        contract(
                            lambda s: gamma[s][r][g],
                            lambda s: _matrix_scale(bundle[s], 2),
                        ),
                        _matrix_scale(_matrix_partial(cd, bundle[g], r), -1),
                        _matrix_scale(_matrix_partial(cd, bundle[r], g), -1),
                    )

                third = _matrix_sum(
                    cd,
                    _matrix_partial(cd, m[a, b], g),
                    _matrix_scale(contract(lambda r: gamma[r][a][b], inner), -1),
                    _matrix_scale(prod(m[a, b], bundle[g]), -1),
                )
                add(third, Fraction(1, 6), xi[a] * xi[b] * xi[g])
    return [[entry.xi_truncate(3) for entry in row] for row in result]


# =============================================================================
# Picard oracles in an auxiliary time t
# =============================================================================


def _require_time(chart: JetChart) -> JetSeries:
    if "t" not in chart.space.index:
        raise ConnectionDataError("oracles need a chart with the parameter 't'")
    return chart.gen("t")


def geodesic_oracle(cd: ConnectionData, chart: JetChart) -> list[JetSeries]:
    """Picard iteration of x'' = -Gamma(x) x' x', x(0) = y, x'(0) = xi, at t = 1."""
    _check_chart(cd, chart)
    t = _require_time(chart)
    n = cd.dimension
    start = [chart.gen(y) + t * x for y, x in zip(chart.y, _xi(chart))]
    curve = start
    for _ in range(chart.order + 1):
        mapping = {f"y{i}": c for i, c in enumerate(curve)}
        velocity = [c.derivative("t") for c in curve]
        following = []
        for mu in range(n):
            acc = chart.zero()
            for a in range(n):
                for b in range(n):
                    entry = cd.gamma[mu][a][b]
                    if entry:
                        term = chart.embed(entry, mapping)
                        acc = acc + term * velocity[a] * velocity[b]
            following.append(start[mu] - acc.integrate("t").integrate("t"))
        curve = following
    return [c.evaluate("t", 1) for c in curve]


def flow_oracle(cd: ConnectionData, chart: JetChart) -> list[JetSeries]:
    """Picard iteration of x' = xi^a e_a(x), x(0) = y, at t = 1."""
    _check_chart(cd, chart)
    _require_time(chart)
    if cd.vielbein is None:
        raise ConnectionDataError("flow oracle needs a vielbein")
    n = cd.dimension
    xi = _xi(chart)
    start = [chart.gen(y) for y in chart.y]
    curve = start
    for _ in range(chart.order + 1):
        mapping = {f"y{i}": c for i, c in enumerate(curve)}
        following = []
        for mu in range(n):
            acc = chart.zero()
            for a in range(n):
                if cd.vielbein[a][mu]:
                    acc = acc + xi[a] * chart.embed(cd.vielbein[a][mu], mapping)
            following.append(start[mu] + acc.integrate("t"))
        curve = following
    return [c.evaluate("t", 1) for c in curve]


def transport_oracle(cd: ConnectionData, body: JetMap) -> list[list[JetSeries]]:
    """Picard iteration of W' = -A(x) x' W along x(t) = phi(y, t xi), at t = 1."""
    chart = body.chart
    _check_chart(cd, chart)
    t = _require_time(chart)
    n, rank = cd.dimension, cd.rank
    scaling = {x: t * chart.gen(x) for x in chart.xi}
    curve = [phi.substitute(scaling) for phi in body.body]
    velocity = [c.derivative("t") for c in curve]
    mapping = {f"y{i}": c for i, c in enumerate(curve)}
    drive = [[chart.zero() for _ in range(rank)] for _ in range(rank)]
    for alpha in range(n):
        for i in range(rank):
            for j in range(rank):
                entry = cd.bundle[alpha][i][j]
                if entry:
                    term = chart.embed(entry, mapping) * velocity[alpha]
                    drive[i][j] = drive[i][j] + term
    unit = identity_matrix(chart, rank)
    transport = unit
    for _ in range(chart.order + 1):
        rhs = matmul(drive, transport)
        transport = [
            [unit[i][j] - rhs[i][j].integrate("t") for j in range(rank)]
            for i in range(rank)
        ]
    return [[entry.evaluate("t", 1) for entry in row] for row in transport]


# =============================================================================
# Reports
# =============================================================================


@dataclass(frozen=True)
class JetReport:
    """Residual series of an identity and the orders it was checked through."""

    name: str
    residuals: tuple[JetSeries, ...]
    xi_order: int
    base_order: int

    @property
    def passed(self) -> bool:
        return all(r.is_zero() for r in self.residuals)

    @property
    def residual_terms(self) -> int:
        return sum(len(r.terms) for r in self.residuals)

    def summary(self) -> str:
        status = "ok" if self.passed else f"FAILED ({self.residual_terms} terms)"
        return (
            f"{self.name}: {status} through xi^{self.xi_order}, "
            f"y^{self.base_order}"
        )

    def first_residual(self) -> str:
        for r in self.residuals:
            if r:
                return r.text()
        return "0"


def jet_report(
    name: str, residuals: Iterable[JetSeries], xi_limit: int | None = None
) -> JetReport:
    """Collect residuals, cut them at ``xi_limit`` and record their validity.

    Raises:
        InsufficientOrderError: If nothing of the identity survives truncation.
    """
    items = [r if xi_limit is None else r.xi_truncate(xi_limit) for r in residuals]
    xi_order, base_order = validity(items)
    if items and (xi_order < 0 or base_order < 0):
        raise InsufficientOrderError(
            f"{name}: residual is not determined at the chart orders"
        )
    report = JetReport(name, tuple(items), xi_order, base_order)
    logger.debug("%s", report.summary())
    return report


def compare(
    name: str,
    got: Iterable[JetSeries],
    want: Iterable[JetSeries],
    xi_limit: int | None = None,
) -> JetReport:
    return jet_report(name, (g - w for g, w in zip(got, want, strict=True)), xi_limit)


def compare_matrices(
    name: str,
    got: Sequence[Sequence[JetSeries]],
    want: Sequence[Sequence[JetSeries]],
    xi_limit: int | None = None,
) -> JetReport:
    return compare(
        name,
        [entry for row in got for entry in row],
        [entry for row in want for entry in row],
        xi_limit,
    )


# =============================================================================
# Grothendieck connection
# =============================================================================


@dataclass(frozen=True)
class GrothendieckConnection:
    """Rows G_A^C with D_A = d_A - G_A^C d_C annihilating every phi^B.

    Rows follow ``chart.base_coords`` and columns ``chart.flat_coords``;
    ``inverse`` is the inverse of the xi-Jacobian (dphi/dxi)^-1.
    """

    chart: JetChart
    phi: JetMap
    rows: tuple[tuple[JetSeries, ...], ...]
    inverse: tuple[tuple[JetSeries, ...], ...]

    def row(self, name: str | int) -> tuple[JetSeries, ...]:
        index = self.chart.index_of(name)
        return self.rows[self.chart.base_coords.index(index)]

    def without_xi_degree(self, degree: int) -> GrothendieckConnection:
        """Copy with the given xi degree removed from the body block."""
        chart = self.chart
        n = chart.dimension
        rows = []
        for k, row in enumerate(self.rows):
            if k < len(chart.base):
                row = tuple(
                    entry.filter(lambda m: chart.xi_degree(m) != degree)
                    if c < n
                    else entry
                    for c, entry in enumerate(row)
                )
            rows.append(row)
        return replace(self, rows=tuple(rows))


def grothendieck(phi: JetMap) -> GrothendieckConnection:
    """G = J_y J_xi^-1 from the Jacobians of the exponential map.

    Raises:
        ConnectionDataError: If the map does not cover every flat coordinate.
    """
    chart = phi.chart
    components = phi.components
    size = len(chart.flat_coords)
    if len(components) != size:
        raise ConnectionDataError(
            f"exponential map has {len(components)} components, chart needs {size}"
        )
    jacobian = [
        [phi_b.derivative(c) for phi_b in components] for c in chart.flat_coords
    ]
    inverse = invert(jacobian)
    rows = []
    for a in chart.base_coords:
        gradient = [phi_b.derivative(a) for phi_b in components]
        rows.append(tuple(vecmat(gradient, inverse)))
    return GrothendieckConnection(
        chart, phi, tuple(rows), tuple(tuple(row) for row in inverse)
    )


def check_flatness(connection: GrothendieckConnection) -> JetReport:
    """d_nu G_mu - d_mu G_nu + [G_mu, G_nu] over all pairs of base rows."""
    chart = connection.chart
    chart.require_order(2, "flatness")
    residuals = []
    base = chart.base
    for i in range(len(base)):
        for j in range(i + 1, len(base)):
            gi, gj = connection.rows[i], connection.rows[j]
            bracket = field_bracket(gi, gj)
            for c in range(len(chart.flat_coords)):
                residuals.append(
                    gi[c].derivative(base[j]) - gj[c].derivative(base[i]) + bracket[c]
                )
    return jet_report("flatness", residuals)


def grothendieck_formula(cd: ConnectionData, chart: JetChart) -> list[list[JetSeries]]:
    """Rows of G through xi^2 for the geodesic (and graded) exponential map.

    Body row g: delta^mu_g + Gamma^mu_{bg} xi^b - 1/3 R_{ga}^mu_b xi^a xi^b.
    Graded block: (A_g + 1/2 xi^b F_{bg} - 1/6 xi^a xi^b nabla_a F_{gb}) x
    acting on x = w + nu; w rows are the unit on nu.
    """
    _check_chart(cd, chart)
    if cd.anti_dimension:
        raise ConnectionDataError("expansion covers real base coordinates only")
    n, rank, gamma = cd.dimension, cd.rank, cd.gamma
    curv = cd.curvature()
    xi = _xi(chart)
    fiber = [chart.gen(w) + chart.gen(v) for w, v in zip(chart.w, chart.nu)]
    if rank:
        bundle, field_strength = cd.bundle, cd.bundle_curvature()
        prod = cd.bundle_matrix_product

        def nabla_f(a: int, g: int, b: int) -> list:
            parts = [
                _matrix_partial(cd, field_strength[g][b], a),
                prod(bundle[a], field_strength[g][b]),
                _matrix_scale(prod(field_strength[g][b], bundle[a]), -1),
            ]
            for s in range(n):
                parts.append(
                    _matrix_times_poly(field_strength[s][b], gamma[s][a][g].scale(-1))
                )
                parts.append(
                    _matrix_times_poly(field_strength[g][s], gamma[s][a][b].scale(-1))
                )
            return _matrix_sum(cd, *parts)

    rows = []
    for g in range(n):
        row = []
        for mu in range(n):
            acc = chart.constant(int(mu == g))
            for b in range(n):
                if gamma[mu][b][g]:
                    acc = acc + chart.embed(gamma[mu][b][g]) * xi[b]
                for a in range(n):
                    if curv[g][a][mu][b]:
                        term = chart.embed(curv[g][a][mu][b]) * xi[a] * xi[b]
                        acc = acc - term.scale(Fraction(1, 3))
            row.append(acc.xi_truncate(2))
        if rank:
            matrix = [[chart.embed(entry) for entry in r] for r in bundle[g]]
            for b in range(n):
                for i in range(rank):
                    for j in range(rank):
                        entry = field_strength[b][g][i][j]
                        if entry:
                            term = chart.embed(entry) * xi[b]
                            matrix[i][j] = matrix[i][j] + term.scale(Fraction(1, 2))
                for a in range(n):
                    nf = nabla_f(a, g, b)
                    for i in range(rank):
                        for j in range(rank):
                            if nf[i][j]:
                                term = chart.embed(nf[i][j]) * xi[a] * xi[b]
                                matrix[i][j] = matrix[i][j] - term.scale(Fraction(1, 6))
            for i in range(rank):
                parts = (matrix[i][j] * fiber[j] for j in range(rank))
                entry = sum(parts, chart.zero())
                row.append(entry.xi_truncate(2))
        rows.append(row)
    for a in range(rank):
        rows.append(
            [chart.zero() for _ in range(n)]
            + [chart.constant(int(a == b)) for b in range(rank)]
        )
    return rows


def grothendieck_shifted_formula(
    cd: ConnectionData, chart: JetChart
) -> list[list[JetSeries]]:
    """Body rows of G through xi^2 for the symplectic exponential map.

    The quadratic term becomes -1/3 R_{ga}^mu_b + 1/24 (sR^mu_{gab}
    + sR^mu_{agb} + sR^mu_{abg}).
    """
    _check_chart(cd, chart)
    n, gamma = cd.dimension, cd.gamma
    curv = cd.curvature()
    sr = cd.symplectic_curvature()
    xi = _xi(chart)
    rows = []
    for g in range(n):
        row = []
        for mu in range(n):
            acc = chart.constant(int(mu == g))
            for b in range(n):
                if gamma[mu][b][g]:
                    acc = acc + chart.embed(gamma[mu][b][g]) * xi[b]
                for a in range(n):
                    coeff = curv[g][a][mu][b].scale(Fraction(-1, 3)) + (
                        sr[mu][g][a][b] + sr[mu][a][g][b] + sr[mu][a][b][g]
                    ).scale(Fraction(1, 24))
                    if coeff:
                        acc = acc + chart.embed(coeff) * xi[a] * xi[b]
            row.append(acc.xi_truncate(2))
        rows.append(row)
    return rows


def grothendieck_hamiltonians(
    connection: GrothendieckConnection,
) -> tuple[GradedPoly, ...]:
    """Hamiltonian lifts of the body rows at the base point, through xi^3.

    Raises:
        SymplecticFormError: If the chart carries no symplectic form.
        NotSymplecticError: If a row is not symplectic through xi^2.
    """
    chart = connection.chart
    if chart.nu:
        raise ConnectionDataError("Hamiltonian lifts cover the body block only")
    result = []
    for row in connection.rows[: chart.dimension]:
        comps = [entry.at_base().xi_truncate(2).to_poly() for entry in row]
        result.append(hamiltonian_lift(comps, max_degree=3))
    return tuple(result)


# =============================================================================
# Lifted vector fields
# =============================================================================


def hat(
    u: Sequence[GradedPoly | JetSeries | None],
    phi: JetMap,
    connection: GrothendieckConnection | None = None,
) -> list[JetSeries]:
    """Jet vector field u-hat = u(phi) (dphi/dxi)^-1 - u^A G_A.

    ``u`` lists components along ``chart.base_coords``. Polynomials on the
    base space are moved to phi by substitution before truncation; series
    must already be polynomial in y.
    """
    chart = phi.chart
    if connection is None:
        connection = grothendieck(phi)
    if len(u) != len(chart.base_coords):
        raise ConnectionDataError(
            f"vector field has {len(u)} components, chart has "
            f"{len(chart.base_coords)} base coordinates"
        )
    names = {f"y{i}": p for i, p in enumerate(phi.body)}
    names.update({f"w{a}": p for a, p in enumerate(phi.graded)})
    indices = {chart.space.index[k]: v for k, v in names.items()}

    here: list[JetSeries] = []
    moved: dict[int, JetSeries] = {}
    for coord, comp in zip(chart.base_coords, u):
        if comp is None:
            value = chart.zero()
            shifted = value
        elif isinstance(comp, GradedPoly):
            value = chart.embed(comp)
            shifted = chart.embed(comp, names)
        else:
            value = comp
            shifted = comp.substitute(indices)
        here.append(value)
        if coord not in chart._base_set or coord in chart.y:
            moved[coord] = shifted

    sources = list(chart.y) + list(chart.w)
    result = []
    for c in range(len(chart.flat_coords)):
        acc = chart.zero()
        for b, coord in enumerate(sources):
            if moved[coord] and connection.inverse[b][c]:
                acc = acc + moved[coord] * connection.inverse[b][c]
        for a, value in enumerate(here):
            if value and connection.rows[a][c]:
                acc = acc - value * connection.rows[a][c]
        result.append(acc)
    return result


def covariant_derivative(cd: ConnectionData, u: Sequence[GradedPoly]) -> list:
    """nabla_b u^m = d_b u^m + Gamma^m_{bk} u^k, indexed [b][m]."""
    n, gamma = cd.dimension, cd.gamma
    return [
        [
            cd.partial(u[m], b)
            + sum((gamma[m][b][k] * u[k] for k in range(n)), cd.space.zero())
            for m in range(n)
        ]
        for b in range(n)
    ]


def second_covariant_derivative(cd: ConnectionData, u: Sequence[GradedPoly]) -> list:
    """nabla_a nabla_b u^m, indexed [a][b][m]."""
    n, gamma = cd.dimension, cd.gamma
    first = covariant_derivative(cd, u)
    zero = cd.space.zero()
    return [
        [
            [
                cd.partial(first[b][m], a)
                + sum((gamma[m][a][k] * first[b][k] for k in range(n)), zero)
                - sum((gamma[k][a][b] * first[k][m] for k in range(n)), zero)
                for m in range(n)
            ]
            for b in range(n)
        ]
        for a in range(n)
    ]


def hat_formula(
    cd: ConnectionData, chart: JetChart, u: Sequence[GradedPoly]
) -> list[JetSeries]:
    """xi^a d_a u^m + 1/2 xi^a xi^b (u^r R_{ra}^m_b + nabla_a nabla_b u^m)."""
    _check_chart(cd, chart)
    n = cd.dimension
    curv = cd.curvature()
    second = second_covariant_derivative(cd, u)
    xi = _xi(chart)
    result = []
    for m in range(n):
        acc = chart.zero()
        for a in range(n):
            if cd.partial(u[m], a):
                acc = acc + chart.embed(cd.partial(u[m], a)) * xi[a]
            for b in range(n):
                coeff = second[a][b][m]
                for r in range(n):
                    coeff = coeff + u[r] * curv[r][a][m][b]
                if coeff:
                    acc = acc + chart.embed(coeff) * xi[a] * xi[b] * Fraction(1, 2)
        result.append(acc.xi_truncate(2))
    return result
