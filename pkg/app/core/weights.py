"""Weight systems from vertex data.

Two families are provided. Lie-algebra weights take Theta = 1/6 f_{gab} l^g
l^a l^b on g[1] with the trace form as symplectic form and T = l^a T_a on the
circle. Rozansky-Witten weights take Theta = v^i Theta_i and v^i K_i built from
curvature jets; their coefficients are polynomials in the odd v^i, i.e.
antisymmetric tensors representing Dolbeault classes. Moment maps add odd l^a
and the Hamiltonian v^i Theta_i + l^a M_a, on which trivalent cocycles give
equivariant classes.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import sympy

from app.core.ce import CEChain
from app.core.correspondence import (
    VertexData,
    beta,
    beta_dagger,
    literal_amplitude,
    theta_cochain,
)
from app.core.exceptions import (
    HomogeneityError,
    LieDataError,
    RWDataError,
    SingularMatrixError,
)
from app.core.graded import (
    GradedPoly,
    GradedSpace,
    MatPoly,
    RationalMatrix,
    format_fraction,
    rational_inverse,
    to_fraction,
)
from app.core.graphs import (
    NAMED_GRAPHS,
    Graph,
    GraphChain,
    aut_order,
    catalog_name,
    format_graph,
    graph_differential,
    pair,
)

logger = logging.getLogger(__name__)

Matrix = tuple[tuple[Fraction, ...], ...]


def _matrix(rows: Sequence[Sequence[object]]) -> Matrix:
    return tuple(tuple(to_fraction(x) for x in row) for row in rows)


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    size = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(size)) for j in range(size))
        for i in range(size)
    )


def _trace(a: Matrix) -> Fraction:
    return sum((a[i][i] for i in range(len(a))), Fraction(0))


def _sympy_matrix(rows: Sequence[Sequence[Fraction]]) -> sympy.Matrix:
    return sympy.Matrix(
        [[sympy.Rational(x.numerator, x.denominator) for x in row] for row in rows]
    )


# =============================================================================
# Vertex chains
# =============================================================================


def vertex_chain(
    theta3: GradedPoly,
    t1: MatPoly | None,
    m: int,
    bar_sign: int = 1,
) -> list[CEChain]:
    """sum over p + q = m of bar_sign^q / (p! q) (Theta, ...) (x) Tr[T | ...].

    Chains that vanish (for instance every q > 0 term when ``t1`` is zero)
    are left out; m = 0 gives the empty list.

    Raises:
        HomogeneityError: If theta3 is not cubic or t1 is not linear in the
            flat coordinates.
    """
    if theta3.flat_degrees() - {3}:
        raise HomogeneityError("internal vertex must be cubic in the flat variables")
    if t1 is not None and t1.flat_degrees() - {1}:
        raise HomogeneityError("peripheral vertex must be linear in the flat variables")
    if m <= 0:
        return []
    data = VertexData(theta3, t1)
    chains = []
    for q in range(m + 1):
        p = m - q
        if q and (t1 is None or t1.is_zero()):
            continue
        chain = data.chain(p, q)
        if bar_sign < 0 and q % 2:
            chain = chain.scaled(-1)
        if not chain.is_zero():
            chains.append(chain)
    return chains


# =============================================================================
# Lie algebra data
# =============================================================================


@dataclass(frozen=True)
class LieData:
    """Structure constants f^c_{ab}, representation matrices T_a and the trace form.

    ``structure_constants[c][a][b]`` is f^c_{ab}.
    """

    structure_constants: tuple[tuple[tuple[Fraction, ...], ...], ...]
    representation: tuple[Matrix, ...]
    killing: Matrix = field(default=())

    def __post_init__(self) -> None:
        f = tuple(_matrix(layer) for layer in self.structure_constants)
        reps = tuple(_matrix(t) for t in self.representation)
        object.__setattr__(self, "structure_constants", f)
        object.__setattr__(self, "representation", reps)
        d = len(reps)
        if not d:
            raise LieDataError("representation has no generators")
        size = len(reps[0])
        if any(len(t) != size or any(len(row) != size for row in t) for t in reps):
            raise LieDataError("representation matrices must be square of one size")
        shapes = [len(layer) for layer in f] + [len(r) for layer in f for r in layer]
        if len(f) != d or any(s != d for s in shapes):
            raise LieDataError(f"structure constants must be {d}x{d}x{d}")
        killing = tuple(
            tuple(_trace(_matmul(reps[a], reps[b])) for b in range(d)) for a in range(d)
        )
        if self.killing and _matrix(self.killing) != killing:
            raise LieDataError("killing form does not equal Tr(T_a T_b)")
        object.__setattr__(self, "killing", killing)
        self._validate()

    def _validate(self) -> None:
        f, reps, d = self.structure_constants, self.representation, self.dimension
        for c, a, b in itertools.product(range(d), repeat=3):
            if f[c][a][b] != -f[c][b][a]:
                raise LieDataError(f"f^{c}_({a}{b}) is not antisymmetric")
        for a, b, c, e in itertools.product(range(d), repeat=4):
            jacobi = sum(
                f[e][a][k] * f[k][b][c]
                + f[e][b][k] * f[k][c][a]
                + f[e][c][k] * f[k][a][b]
                for k in range(d)
            )
            if jacobi:
                raise LieDataError("structure constants violate the Jacobi identity")
        size = self.rep_dimension
        for a, b in itertools.product(range(d), repeat=2):
            commutator = _matmul(reps[a], reps[b])
            other = _matmul(reps[b], reps[a])
            for i, j in itertools.product(range(size), repeat=2):
                expected = sum(f[c][a][b] * reps[c][i][j] for c in range(d))
                if commutator[i][j] - other[i][j] != expected:
                    raise LieDataError(
                        f"[T_{a}, T_{b}] differs from f^c_({a}{b}) T_c"
                    )
        try:
            rational_inverse(self.killing)
        except SingularMatrixError as e:
            raise LieDataError("trace form Tr(T_a T_b) is degenerate") from e

    @classmethod
    def from_matrices(cls, basis: Sequence[Sequence[Sequence[object]]]) -> LieData:
        """Read off f^c_{ab} from commutators by solving linear systems.

        Raises:
            LieDataError: If the span is not closed under commutators or the
                matrices are linearly dependent.
        """
        reps = [_matrix(t) for t in basis]
        d = len(reps)
        if not d:
            raise LieDataError("empty basis")
        size = len(reps[0])
        columns = _sympy_matrix(
            [
                [reps[c][i][j] for c in range(d)]
                for i in range(size)
                for j in range(size)
            ]
        )
        if columns.rank() < d:
            raise LieDataError("representation matrices are linearly dependent")
        f = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
        for a, b in itertools.combinations(range(d), 2):
            ab, ba = _matmul(reps[a], reps[b]), _matmul(reps[b], reps[a])
            rhs = _sympy_matrix(
                [[ab[i][j] - ba[i][j]] for i in range(size) for j in range(size)]
            )
            try:
                solution, _ = columns.gauss_jordan_solve(rhs)
            except ValueError as e:
                raise LieDataError(
                    f"[T_{a}, T_{b}] leaves the span of the basis"
                ) from e
            for c in range(d):
                value = to_fraction(solution[c, 0])
                f[c][a][b] = value
                f[c][b][a] = -value
        return cls(tuple(tuple(tuple(r) for r in layer) for layer in f), tuple(reps))

    @property
    def dimension(self) -> int:
        return len(self.representation)

    @property
    def rep_dimension(self) -> int:
        return len(self.representation[0])

    @property
    def killing_inverse(self) -> RationalMatrix:
        return rational_inverse(self.killing)

    def space(self) -> GradedSpace:
        """g[1] with odd coordinates l^a and the trace form of degree 2."""
        gens = [(f"l{a + 1}", 1) for a in range(self.dimension)]
        return GradedSpace(gens, symplectic=self.killing, form_degree=2)

    def fiber(self) -> GradedSpace:
        return GradedSpace([(f"z{i + 1}", 0) for i in range(self.rep_dimension)])

    def theta(self, space: GradedSpace | None = None) -> GradedPoly:
        """1/6 eta_{gk} f^k_{ab} l^g l^a l^b."""
        space = space or self.space()
        f, eta, d = self.structure_constants, self.killing, self.dimension
        theta = space.zero()
        for g, a, b in itertools.product(range(d), repeat=3):
            coeff = sum(eta[g][k] * f[k][a][b] for k in range(d))
            if coeff:
                term = space.gen(g) * space.gen(a) * space.gen(b)
                theta = theta + term.scale(coeff)
        return theta.scale(Fraction(1, 6))

    def peripheral(self, space: GradedSpace | None = None) -> MatPoly:
        """l^a T_a."""
        space = space or self.space()
        return MatPoly.linear(self.fiber(), space, self.representation)


def _sl2_basis() -> list[list[list[int]]]:
    return [[[1, 0], [0, -1]], [[0, 1], [0, 0]], [[0, 0], [1, 0]]]


def su2_fundamental() -> LieData:
    """The defining representation in the rational basis h, e, f."""
    return LieData.from_matrices(_sl2_basis())


def su2_adjoint() -> LieData:
    """The adjoint representation of the same algebra."""
    fundamental = su2_fundamental()
    f, d = fundamental.structure_constants, fundamental.dimension
    ad = [[[f[c][a][b] for b in range(d)] for c in range(d)] for a in range(d)]
    return LieData.from_matrices(ad)


def so3_vector() -> LieData:
    """(L_i)_{jk} = -epsilon_{ijk} on R^3."""

    def epsilon(i: int, j: int, k: int) -> int:
        perm = (i, j, k)
        if len(set(perm)) < 3:
            return 0
        return 1 if perm in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1

    basis = [
        [[-epsilon(i, j, k) for k in range(3)] for j in range(3)] for i in range(3)
    ]
    return LieData.from_matrices(basis)


def sp2_fundamental() -> LieData:
    """Hamiltonian matrices on R^2 in the basis of symmetric quadratic forms."""
    basis = [[[0, 1], [0, 0]], [[0, 0], [1, 0]], [[1, 0], [0, -1]]]
    return LieData.from_matrices(basis)


def abelian(rank: int = 2) -> LieData:
    """Commuting diagonal matrix units."""
    basis = [
        [[1 if i == j == a else 0 for j in range(rank)] for i in range(rank)]
        for a in range(rank)
    ]
    return LieData.from_matrices(basis)


BUILTIN_LIE_DATA = {
    "su2_fundamental": su2_fundamental,
    "su2_adjoint": su2_adjoint,
    "so3_vector": so3_vector,
    "sp2_fundamental": sp2_fundamental,
    "abelian": abelian,
}


@dataclass(frozen=True)
class Casimirs:
    """Dimensions and Casimir invariants computed from the matrices."""

    dim_g: int
    dim_r: int
    rep_casimir: Matrix
    rep_casimir_squared_trace: Fraction
    adjoint_casimir_trace: Fraction

    @property
    def c2_r(self) -> Fraction | None:
        """C_2(r) when the representation Casimir is scalar."""
        c = self.rep_casimir
        value = c[0][0]
        scalar = all(
            c[i][j] == (value if i == j else 0)
            for i in range(len(c))
            for j in range(len(c))
        )
        return value if scalar else None


def casimirs(data: LieData) -> Casimirs:
    """C_r = eta^{ab} T_a T_b, Tr(C_r^2) and d_G C_2(G) = eta^{ab} Tr(ad_a ad_b)."""
    eta_inv = data.killing_inverse
    d, size = data.dimension, data.rep_dimension
    reps, f = data.representation, data.structure_constants
    rep = [[Fraction(0)] * size for _ in range(size)]
    adjoint = Fraction(0)
    for a, b in itertools.product(range(d), repeat=2):
        weight = eta_inv[a][b]
        if not weight:
            continue
        product = _matmul(reps[a], reps[b])
        for i, j in itertools.product(range(size), repeat=2):
            rep[i][j] += weight * product[i][j]
        # Tr(ad_a ad_b) with (ad_a)^c_e = f^c_{ae}
        adjoint += weight * sum(
            f[c][a][e] * f[e][b][c] for c in range(d) for e in range(d)
        )
    rep_matrix = _matrix(rep)
    return Casimirs(
        dim_g=d,
        dim_r=size,
        rep_casimir=rep_matrix,
        rep_casimir_squared_trace=_trace(_matmul(rep_matrix, rep_matrix)),
        adjoint_casimir_trace=adjoint,
    )


def lie_closed_form(data: LieData) -> dict[str, Fraction]:
    """Predicted coefficients of Gamma4..Gamma7 in the m = 4 Lie weights."""
    cas = casimirs(data)
    x = cas.rep_casimir_squared_trace
    adjoint = cas.adjoint_casimir_trace
    return {
        "Gamma4": -x / 2,
        "Gamma5": adjoint / 8 - x / 4,
        "Gamma6": adjoint / 6,
        "Gamma7": -adjoint / 4,
    }


def lie_chain(data: LieData, m: int, include_plain: bool = False) -> list[CEChain]:
    """Vertex chain for Lie data; the plain (q = 0) term only on request."""
    space = data.space()
    chains = vertex_chain(data.theta(space), data.peripheral(space), m)
    if not include_plain:
        chains = [c for c in chains if c.q]
    return chains


def lie_weights(data: LieData, m: int, include_plain: bool = False) -> GraphChain:
    """Graph chain of the Lie-algebra weight system with rational coefficients."""
    weights = beta(lie_chain(data, m, include_plain))
    logger.info("Lie weights at m=%d: %d graph classes", m, len(weights))
    return weights


def lie_weights_bruteforce(data: LieData, graph: Graph) -> Fraction:
    """Coefficient of ``graph`` in the Lie weights by applying the recipe verbatim.

    The chain term of the right shape has identical entries of even
    suspended degree, so the sum over orderings is p! q copies of one
    literal contraction and the coefficient is that contraction over |Aut|.
    """
    p, q = graph.n_internal, graph.n_peripheral
    if not q:
        return Fraction(0)
    space = data.space()
    theta, t = data.theta(space), data.peripheral(space)
    if q and all(not e for row in t.entries for e in row):
        return Fraction(0)
    value = literal_amplitude(graph, [theta] * p, [t] * q)
    return value / aut_order(graph) if value else Fraction(0)


# =============================================================================
# Rozansky-Witten data
# =============================================================================


def _is_symmetric3(tensor: Sequence[Sequence[Sequence[Fraction]]]) -> bool:
    size = len(tensor)
    for i, j, k in itertools.product(range(size), repeat=3):
        value = tensor[i][j][k]
        for a, b, c in itertools.permutations((i, j, k)):
            if tensor[a][b][c] != value:
                return False
    return True


@dataclass(frozen=True)
class RWData:
    """Holomorphic symplectic form, curvature jets and bundle curvature.

    ``curvature[ib][i][j][k]`` is the cubic Taylor coefficient R_{ib ijk} of
    Theta_ib = 1/6 R_{ib ijk} xi^i xi^j xi^k; ``bundle_curvature[ib][j]`` is
    the matrix K_{ib j}. ``truncation_order`` records how far the jets go.
    ``moments`` holds one (hessian, cubic) pair per moment map, the Taylor
    coefficients of M_a = 1/2 H_ij xi^i xi^j + 1/6 C_ijk xi^i xi^j xi^k.
    """

    omega: Matrix
    curvature: tuple
    bundle_curvature: tuple = ()
    truncation_order: int = 3
    moments: tuple = ()

    def __post_init__(self) -> None:
        omega = _matrix(self.omega)
        object.__setattr__(self, "omega", omega)
        dim = len(omega)
        if dim % 2 or any(len(row) != dim for row in omega):
            raise RWDataError("omega must be a square matrix of even size")
        for i, j in itertools.product(range(dim), repeat=2):
            if omega[i][j] != -omega[j][i]:
                raise RWDataError("omega is not antisymmetric")
        try:
            rational_inverse(omega)
        except SingularMatrixError as e:
            raise RWDataError("omega is degenerate") from e
        curvature = tuple(
            tuple(_matrix(layer) for layer in tensor) for tensor in self.curvature
        )
        object.__setattr__(self, "curvature", curvature)
        for index, tensor in enumerate(curvature):
            if len(tensor) != dim or any(
                len(layer) != dim or any(len(row) != dim for row in layer)
                for layer in tensor
            ):
                raise RWDataError(f"curvature component {index} has the wrong shape")
            if not _is_symmetric3(tensor):
                raise RWDataError(
                    f"curvature component {index} is not symmetric in its last "
                    "three indices"
                )
        bundle = tuple(
            tuple(_matrix(k) for k in row) for row in self.bundle_curvature
        )
        object.__setattr__(self, "bundle_curvature", bundle)
        if bundle:
            if len(bundle) != len(curvature):
                raise RWDataError("bundle curvature needs one row per v direction")
            if any(len(row) != dim for row in bundle):
                raise RWDataError("bundle curvature needs one matrix per xi direction")
            size = len(bundle[0][0])
            if any(len(k) != size for row in bundle for k in row):
                raise RWDataError("bundle curvature matrices differ in size")
        if self.truncation_order < 3:
            raise RWDataError("curvature jets must reach order 3 in xi")
        moments = []
        for index, (hessian, cubic) in enumerate(self.moments):
            hessian = _matrix(hessian)
            cubic = tuple(_matrix(layer) for layer in cubic)
            if len(hessian) != dim or any(
                len(row) != dim or any(row[j] != hessian[j][i] for j in range(dim))
                for i, row in enumerate(hessian)
            ):
                raise RWDataError(f"moment {index} needs a symmetric hessian")
            if len(cubic) != dim or any(
                len(layer) != dim or any(len(row) != dim for row in layer)
                for layer in cubic
            ):
                raise RWDataError(f"moment {index} cubic jet has the wrong shape")
            if not _is_symmetric3(cubic):
                raise RWDataError(f"moment {index} cubic jet is not symmetric")
            moments.append((hessian, cubic))
        object.__setattr__(self, "moments", tuple(moments))

    @property
    def dimension(self) -> int:
        return len(self.omega)

    @property
    def anti_dimension(self) -> int:
        return len(self.curvature)

    @property
    def bundle_rank(self) -> int:
        return len(self.bundle_curvature[0][0]) if self.bundle_curvature else 0

    @classmethod
    def from_jets(cls, jets: Any) -> RWData:
        """Read R_{ib ijk} and K_{ib j} off the Taylor coefficients of computed jets.

        ``jets`` carries ``theta`` (one polynomial per anti-holomorphic index),
        ``kmat`` (one matrix polynomial per index, possibly empty), ``omega``
        and ``order``; other generators are set to zero.
        """
        if jets.order < 3:
            raise RWDataError("jets were truncated below order 3")
        curvature = []
        for theta in jets.theta:
            space = theta.space
            flat = space.flat
            curvature.append(
                [
                    [
                        [
                            theta.derivative(flat[k])
                            .derivative(flat[j])
                            .derivative(flat[i])
                            .evaluate_at_zero()
                            for k in range(len(flat))
                        ]
                        for j in range(len(flat))
                    ]
                    for i in range(len(flat))
                ]
            )
        bundle = []
        for kmat in jets.kmat:
            flat = kmat.space.flat
            bundle.append(
                [
                    [
                        [e.derivative(flat[j]).evaluate_at_zero() for e in row]
                        for row in kmat.entries
                    ]
                    for j in range(len(flat))
                ]
            )
        moments = []
        for moment in jets.moment:
            flat = moment.space.flat
            size = len(flat)
            second = [
                [moment.derivative(flat[j]).derivative(flat[i]) for j in range(size)]
                for i in range(size)
            ]
            hessian = [[e.evaluate_at_zero() for e in row] for row in second]
            cubic = [
                [[e.derivative(x).evaluate_at_zero() for x in flat] for e in row]
                for row in second
            ]
            moments.append((hessian, cubic))
        return cls(jets.omega, curvature, bundle, jets.order, moments)

    def space(self) -> GradedSpace:
        """Even xi^i with the holomorphic form plus odd parameters v^ib."""
        gens = [(f"xi{i + 1}", 0) for i in range(self.dimension)]
        gens += [(f"v{i + 1}", 1, True) for i in range(self.anti_dimension)]
        return GradedSpace(gens, symplectic=self.omega, form_degree=0)

    def equivariant_space(self) -> GradedSpace:
        """The RW space with odd parameters l^a of g[1] appended."""
        if not self.moments:
            return self.space()
        gens = [(f"xi{i + 1}", 0) for i in range(self.dimension)]
        gens += [(f"v{i + 1}", 1, True) for i in range(self.anti_dimension)]
        gens += [(f"l{a + 1}", 1, True) for a in range(len(self.moments))]
        return GradedSpace(gens, symplectic=self.omega, form_degree=0)

    def fiber(self) -> GradedSpace:
        return GradedSpace([(f"z{i + 1}", 0) for i in range(self.bundle_rank)])

    def moment(self, space: GradedSpace | None = None) -> GradedPoly:
        """l^a M_a through cubic order."""
        space = space or self.equivariant_space()
        dim = self.dimension
        offset = dim + self.anti_dimension
        result = space.zero()
        for a, (hessian, cubic) in enumerate(self.moments):
            ell = space.gen(offset + a)
            for i, j in itertools.product(range(dim), repeat=2):
                if hessian[i][j]:
                    term = ell * space.gen(i) * space.gen(j)
                    result = result + term.scale(hessian[i][j] / 2)
            for i, j, k in itertools.product(range(dim), repeat=3):
                if cubic[i][j][k]:
                    term = ell * space.gen(i) * space.gen(j) * space.gen(k)
                    result = result + term.scale(cubic[i][j][k] / 6)
        return result

    def theta(self, space: GradedSpace | None = None) -> GradedPoly:
        """v^ib Theta_ib at cubic order."""
        space = space or self.space()
        dim = self.dimension
        result = space.zero()
        for ib, tensor in enumerate(self.curvature):
            v = space.gen(dim + ib)
            for i, j, k in itertools.product(range(dim), repeat=3):
                value = tensor[i][j][k]
                if value:
                    result = result + (
                        v * space.gen(i) * space.gen(j) * space.gen(k)
                    ).scale(value / 6)
        return result

    def peripheral(self, space: GradedSpace | None = None) -> MatPoly | None:
        """v^ib K_ib at linear order."""
        if not self.bundle_curvature:
            return None
        space = space or self.space()
        dim, size = self.dimension, self.bundle_rank
        entries = [[space.zero() for _ in range(size)] for _ in range(size)]
        for ib, row in enumerate(self.bundle_curvature):
            v = space.gen(dim + ib)
            for j, k in enumerate(row):
                xi = space.gen(j)
                for a, b in itertools.product(range(size), repeat=2):
                    if k[a][b]:
                        entries[a][b] = entries[a][b] + (v * xi).scale(k[a][b])
        return MatPoly(self.fiber(), space, entries)


def rw_chain(data: RWData, m: int) -> list[CEChain]:
    """sum over p + q = m of (-1)^q / (p! q) (vTheta, ...) (x) Tr[vK | ...]."""
    space = data.space()
    return vertex_chain(data.theta(space), data.peripheral(space), m, bar_sign=-1)


def rw_weights(data: RWData, m: int) -> GraphChain:
    """Graph chain with coefficients that are polynomials of degree m in v."""
    if m > data.anti_dimension:
        logger.warning(
            "m=%d exceeds the %d anti-holomorphic directions; all weights vanish",
            m,
            data.anti_dimension,
        )
    weights = beta(rw_chain(data, m))
    logger.info("RW weights at m=%d: %d graph classes", m, len(weights))
    return weights


# =============================================================================
# Equivariant classes
# =============================================================================


def equivariant_rw_chain(data: RWData, k: int) -> CEChain:
    """(H, ..., H) / k! for H = v^ib Theta_ib + l^a M_a."""
    if k <= 0:
        raise HomogeneityError("an equivariant class needs at least one vertex")
    space = data.equivariant_space()
    h = data.theta(space) + data.moment(space)
    return CEChain(space, (h,) * k, (), Fraction(1, math.factorial(k)))


def equivariant_rw_class(
    data: RWData, cochain: GraphChain | None = None
) -> GradedPoly | Fraction:
    """Evaluate a trivalent graph cocycle on Theta + M.

    The value is a polynomial in the odd v^ib and l^a, one piece in each
    Omega^(0,p) (x) wedge^q g* with p + q equal to the vertex count. Without
    moments it is the plain RW class of the cocycle. ``cochain`` defaults to
    the dual of the theta graph.
    """
    cochain = theta_cochain() if cochain is None else cochain
    if not cochain:
        return Fraction(0)
    sizes = {g.n_internal for g in cochain}
    if len(sizes) != 1 or any(g.n_peripheral for g in cochain):
        raise HomogeneityError(
            "equivariant classes need plain graphs with one vertex count"
        )
    k = sizes.pop()
    value = beta_dagger(cochain, equivariant_rw_chain(data, k))
    logger.info(
        "equivariant class on %d vertices with %d moment maps", k, len(data.moments)
    )
    return value


# =============================================================================
# Weight tables
# =============================================================================


@dataclass(frozen=True)
class WeightResult:
    """A weight with its label.

    ``exact`` is False for Dolbeault-valued weights, which are only defined
    up to d-bar exact terms.
    """

    label: str
    value: Fraction | GradedPoly
    exact: bool = True

    def value_text(self) -> str:
        if isinstance(self.value, GradedPoly):
            return self.value.to_text(separator=" + ") if self.value else "0"
        return format_fraction(Fraction(self.value))


def _label(graph: Graph) -> tuple[str, int]:
    named = catalog_name(graph)
    if named is not None:
        return named
    return format_graph(graph), 1


def weight_table(chain: GraphChain, exact: bool = True) -> list[WeightResult]:
    """One row per graph class, labelled by catalog name when it has one."""
    rows = []
    for graph, coeff in chain.items():
        label, sign = _label(graph)
        value = coeff if sign > 0 else -coeff
        rows.append(WeightResult(label, value, exact))
    return sorted(rows, key=lambda r: (r.label not in NAMED_GRAPHS, r.label))


def pair_with_diagram(
    weights: GraphChain, diagram_cochain: GraphChain, exact: bool = True
) -> WeightResult:
    """<diagram cochain, weights> as a weight."""
    value = pair(diagram_cochain, weights)
    if isinstance(value, int):
        value = Fraction(value)
    label = " + ".join(_label(g)[0] for g in diagram_cochain) or "0"
    return WeightResult(label, value, exact)


def is_closed(weights: GraphChain) -> bool:
    """Whether the graph boundary of the weights vanishes exactly."""
    return graph_differential(weights).is_zero()

