"""The map beta from CE chains to graph chains and its dual beta-dagger.

Every Hamiltonian sits on an internal vertex and every bar entry on a
peripheral vertex. An edge a -> b carries the operator
(Omega^-1)^{AB} d^(a)_A d^(b)_B, where d^(k) differentiates the copy of the
coordinates belonging to vertex k. The vertices carry formal odd labels
(degree n+1 for internal, 1 for peripheral) that are stripped by the
derivative word d_{s_q}..d_{s_1} d_{t_p}..d_{t_1}; all signs come out of
reordering that word into per-vertex blocks.

Amplitudes are computed on unit monomials: entries are expanded
multilinearly and the bar trace is expanded into closed index cycles.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from app.core.ce import CEChain, CECochain, CESum, ce_boundary, ce_coboundary_eval
from app.core.exceptions import VertexDataError
from app.core.graded import (
    GradedPoly,
    GradedSpace,
    MatPoly,
    Monomial,
    RationalMatrix,
    flat_monomials,
    monomial_derivative,
    monomial_product,
    random_poly,
)
from app.core.graphs import (
    NAMED_GRAPHS,
    Graph,
    GraphChain,
    aut_order,
    enumerate_graphs,
    graph_cochain_degree,
    graph_differential,
    labeled_multigraphs,
)

logger = logging.getLogger(__name__)

RingValue = Fraction | GradedPoly


# =============================================================================
# Vertex data
# =============================================================================


def _require_vanishing(poly: GradedPoly, what: str) -> None:
    for mono in poly.terms:
        if poly.space.monomial_flat_degree(mono) == 0:
            raise VertexDataError(f"{what} does not vanish at the origin")


@dataclass(frozen=True)
class VertexData:
    """Internal vertex Hamiltonian, peripheral vertex matrix and Omega^-1."""

    internal_vertex: GradedPoly
    peripheral_vertex: MatPoly | None = None
    omega_inverse: RationalMatrix | None = None

    def __post_init__(self) -> None:
        space = self.internal_vertex.space
        if space.symplectic is None:
            raise VertexDataError("vertex data needs a symplectic space")
        if self.omega_inverse is None:
            object.__setattr__(self, "omega_inverse", space.omega_inverse)
        size = space.flat_dimension
        omega = space.symplectic
        pinv = self.omega_inverse
        for a in range(size):
            for c in range(size):
                value = sum(pinv[a][b] * omega[b][c] for b in range(size))
                if value != (1 if a == c else 0):
                    raise VertexDataError("omega_inverse is not the inverse of Omega")
        _require_vanishing(self.internal_vertex, "internal vertex")
        if self.peripheral_vertex is not None:
            if self.peripheral_vertex.space != space:
                raise VertexDataError("peripheral vertex lives on another space")
            for row in self.peripheral_vertex.entries:
                for entry in row:
                    _require_vanishing(entry, "peripheral vertex")

    @property
    def space(self) -> GradedSpace:
        return self.internal_vertex.space

    def chain(self, p: int, q: int) -> CEChain:
        """(Theta, ..., Theta) (x) [T | ... | T] normalized by 1/(p! q)."""
        if q and self.peripheral_vertex is None:
            raise VertexDataError("no peripheral vertex to place on the circle")
        norm = math.factorial(p) * (q or 1)
        bar = (self.peripheral_vertex,) * q if q else ()
        return CEChain(
            self.space, (self.internal_vertex,) * p, bar, Fraction(1, norm)
        )


# =============================================================================
# Contraction engine
# =============================================================================


def _parameter_free(space: GradedSpace) -> bool:
    return len(space.flat) == space.dimension


class _Contraction:
    """Amplitude of one labeled graph on a list of unit vertex monomials."""

    def __init__(self, space: GradedSpace) -> None:
        space.require_symplectic()
        if space.form_degree % 2:
            raise VertexDataError("the correspondence needs an even form degree")
        self.space = space
        self.pinv = space.omega_inverse
        self.flat = space.flat
        self.scalar = _parameter_free(space)
        self._derivatives: dict[tuple[Monomial, tuple[int, ...]], Any] = {}

    def _strip(self, mono: Monomial, letters: tuple[int, ...]):
        """(E h)(0) for E = d_{l1} ... d_{lr}; None when it vanishes."""
        key = (mono, letters)
        if key in self._derivatives:
            return self._derivatives[key]
        factor, current = 1, mono
        result = None
        for index in reversed(letters):
            res = monomial_derivative(self.space, current, index)
            if res is None:
                break
            f, current = res
            factor *= f
        else:
            if self.space.monomial_flat_degree(current) == 0:
                result = (factor, current)
        self._derivatives[key] = result
        return result

    def amplitude(
        self, edges: Sequence[tuple[int, int]], monos: Sequence[Monomial]
    ) -> RingValue:
        space = self.space
        n = len(monos)
        parity = space.parities
        position = space.flat_position
        need = [
            {position[i]: e for i, e in enumerate(mono) if e and i in position}
            for mono in monos
        ]
        h_parity = [space.monomial_degree(m) % 2 for m in monos]
        total: dict[Monomial, Fraction] = {}
        choice: list[tuple[int, int]] = []

        def finish() -> None:
            # word: tau_{n-1} .. tau_0, then (a, A), (b, B) per edge
            letters: list[tuple[int, int, int]] = []  # (vertex, order, parity)
            for k in reversed(range(n)):
                letters.append((k, -1, 1))
            blocks: list[list[int]] = [[] for _ in range(n)]
            for seq, ((a, b), (A, B)) in enumerate(zip(edges, choice)):
                ga, gb = self.flat[A], self.flat[B]
                letters.append((a, 2 * seq, parity[ga]))
                letters.append((b, 2 * seq + 1, parity[gb]))
                blocks[a].append(ga)
                blocks[b].append(gb)
            inversions = 0
            odd_keys = [(v, o) for v, o, par in letters if par]
            for i in range(len(odd_keys)):
                for j in range(i + 1, len(odd_keys)):
                    if odd_keys[i] > odd_keys[j]:
                        inversions += 1
            exponent = inversions
            x_before = 0
            for k in range(n):
                e_parity = sum(parity[g] for g in blocks[k]) % 2
                exponent += (1 + e_parity) * x_before + e_parity
                x_before += 1 + h_parity[k]
            coeff = Fraction(-1 if exponent % 2 else 1)
            for A, B in choice:
                coeff *= self.pinv[A][B]
            mono = space.origin
            for k in range(n):
                stripped = self._strip(monos[k], tuple(blocks[k]))
                if stripped is None:
                    return
                factor, rest = stripped
                coeff *= factor
                product = monomial_product(space, mono, rest)
                if product is None:
                    return
                sign, mono = product
                coeff *= sign
            total[mono] = total.get(mono, Fraction(0)) + coeff

        def search(index: int) -> None:
            if index == len(edges):
                finish()
                return
            a, b = edges[index]
            for A, count_a in list(need[a].items()):
                if not count_a:
                    continue
                need[a][A] -= 1
                row = self.pinv[A]
                for B, count_b in list(need[b].items()):
                    if not count_b or not row[B]:
                        continue
                    need[b][B] -= 1
                    choice.append((A, B))
                    search(index + 1)
                    choice.pop()
                    need[b][B] += 1
                need[a][A] += 1

        search(0)
        bundle = Fraction(1)
        for mult in _multiplicities(edges):
            bundle /= math.factorial(mult)
        value = GradedPoly(space, {m: c * bundle for m, c in total.items()})
        return value.constant_term if self.scalar else value


def _multiplicities(edges: Sequence[tuple[int, int]]) -> Iterator[int]:
    counts: dict[tuple[int, int], int] = {}
    for a, b in edges:
        key = (min(a, b), max(a, b))
        counts[key] = counts.get(key, 0) + 1
    return iter(counts.values())


# =============================================================================
# Unit expansion of chains
# =============================================================================


def _bar_cycles(bar: Sequence[MatPoly]) -> Iterator[tuple[Fraction, list[Monomial]]]:
    """Expand Tr[g_1 ... g_q] into closed index cycles of unit entries."""
    if not bar:
        yield Fraction(1), []
        return
    size = bar[0].size
    q = len(bar)

    def walk(k: int, start: int, i: int, coeff: Fraction, monos: list[Monomial]):
        if k == q:
            if i == start:
                yield coeff, list(monos)
            return
        for j in range(size):
            if k == q - 1 and j != start:
                continue
            for mono, c in sorted(bar[k].entries[i][j].terms.items()):
                monos.append(mono)
                yield from walk(k + 1, start, j, coeff * c, monos)
                monos.pop()

    for start in range(size):
        yield from walk(0, start, start, Fraction(1), [])


def _validate(chain: CEChain) -> None:
    if chain.fiber is not None and any(chain.fiber.parities):
        raise VertexDataError("the bar trace needs an even fiber")
    for f in chain.hamiltonians:
        _require_vanishing(f, "Hamiltonian")
    for g in chain.bar:
        for row in g.entries:
            for entry in row:
                _require_vanishing(entry, "bar entry")


def unit_vertices(chain: CEChain) -> Iterator[tuple[Fraction, list[Monomial]]]:
    """Multilinear expansion of a chain into coefficients and vertex monomials."""
    f_terms = [sorted(f.terms.items()) for f in chain.hamiltonians]
    for fs in itertools.product(*f_terms):
        head = chain.coefficient
        for _, c in fs:
            head *= c
        for bar_coeff, bar_monos in _bar_cycles(chain.bar):
            yield head * bar_coeff, [m for m, _ in fs] + bar_monos


def _as_chains(ch: CEChain | CESum | Iterable[CEChain]) -> list[CEChain]:
    if isinstance(ch, CEChain):
        return [ch]
    if isinstance(ch, CESum):
        return list(ch.chains())
    return list(ch)


def _orderings(
    space: GradedSpace, monos: Sequence[Monomial], p: int
) -> Iterator[tuple[int, list[Monomial]]]:
    """Permutations of the Hamiltonians and rotations of the bar with signs."""
    n = space.form_degree
    suspended = [(space.monomial_degree(m) + n + 1) % 2 for m in monos[:p]]
    bar = list(monos[p:])
    bar_parity = [(space.monomial_degree(m) + 1) % 2 for m in bar]
    q = len(bar)
    rotations = []
    total = sum(bar_parity)
    for r in range(q or 1):
        before = sum(bar_parity[:r])
        sign = -1 if (before * (total - before)) % 2 else 1
        rotations.append((sign, bar[r:] + bar[:r]))
    for perm in itertools.permutations(range(p)):
        inversions = sum(
            1
            for i in range(p)
            for j in range(i + 1, p)
            if perm[i] > perm[j] and suspended[perm[i]] and suspended[perm[j]]
        )
        sign = -1 if inversions % 2 else 1
        head = [monos[k] for k in perm]
        for rotation_sign, word in rotations:
            yield sign * rotation_sign, head + word


def _symmetrized(
    engine: _Contraction, graph: Graph, monos: Sequence[Monomial], p: int
) -> RingValue:
    total: RingValue = Fraction(0)
    for sign, ordered in _orderings(engine.space, monos, p):
        value = engine.amplitude(graph.edges, ordered)
        if value:
            total = total + (value if sign > 0 else -value)
    return total


def _scaled(value: RingValue, factor: Fraction) -> RingValue:
    return value.scale(factor) if isinstance(value, GradedPoly) else value * factor


# =============================================================================
# beta and beta-dagger
# =============================================================================


def beta(ch: CEChain | CESum | Iterable[CEChain]) -> GraphChain:
    """Graph chain of a CE chain.

    Summing amplitudes over every labeled loopless multigraph whose vertex
    valences match the flat degrees of the vertex monomials gives the
    permutation-symmetrized sum over classes with the 1/|Aut| weights.

    Raises:
        VertexDataError: If an entry does not vanish at the origin, the form
            degree is odd or the fiber is not even.
    """
    pieces: list[tuple[Graph, RingValue]] = []
    for chain in _as_chains(ch):
        if chain.is_zero():
            continue
        _validate(chain)
        engine = _Contraction(chain.space)
        p, q = chain.p, chain.q
        for coeff, monos in unit_vertices(chain):
            valences = tuple(chain.space.monomial_flat_degree(m) for m in monos)
            for edges in labeled_multigraphs(valences):
                value = engine.amplitude(edges, monos)
                if value:
                    pieces.append((Graph(p, q, edges), _scaled(value, coeff)))
    result = GraphChain(pieces)
    logger.debug("beta produced %d graph classes", len(result))
    return result


def beta_recipe(ch: CEChain | CESum | Iterable[CEChain]) -> GraphChain:
    """Graph chain by enumerating classes and summing over orderings / |Aut|."""
    pieces: list[tuple[Graph, RingValue]] = []
    for chain in _as_chains(ch):
        if chain.is_zero():
            continue
        _validate(chain)
        space = chain.space
        engine = _Contraction(space)
        p, q = chain.p, chain.q
        for coeff, monos in unit_vertices(chain):
            valences = [space.monomial_flat_degree(m) for m in monos]
            if sum(valences) % 2:
                continue
            internal = valences[:p] or [3]
            peripheral = valences[p:] or [1]
            graphs = enumerate_graphs(
                p,
                q,
                internal_valence=(min(internal), max(internal)),
                peripheral_valence=(min(peripheral), max(peripheral)),
                n_edges=sum(valences) // 2,
            )
            for graph in graphs:
                value = _symmetrized(engine, graph, monos, p)
                if value:
                    weight = coeff / aut_order(graph)
                    pieces.append((graph, _scaled(value, weight)))
    return GraphChain(pieces)


def beta_dagger(b: GraphChain, ch: CEChain | CESum | Iterable[CEChain]) -> RingValue:
    """Evaluate the CE cochain of the graph cochain ``b`` on a chain.

    Each graph contributes its contraction averaged over the p! q orderings
    of the chain entries, with no |Aut| factor.
    """
    total: RingValue = Fraction(0)
    if not b:
        return total
    for chain in _as_chains(ch):
        if chain.is_zero():
            continue
        _validate(chain)
        engine = _Contraction(chain.space)
        p, q = chain.p, chain.q
        norm = math.factorial(p) * (q or 1)
        graphs = [
            (g, w) for g, w in b.items() if g.n_internal == p and g.n_peripheral == q
        ]
        if not graphs:
            continue
        for coeff, monos in unit_vertices(chain):
            for graph, weight in graphs:
                value = _symmetrized(engine, graph, monos, p)
                if value:
                    total = total + _scaled(value, coeff * weight / norm)
    return total


def theta_cochain() -> GraphChain:
    """The dual of the theta graph."""
    return GraphChain.from_graph(NAMED_GRAPHS["Theta"])


def graph_cochain_ce(b: GraphChain, form_degree: int = 0) -> CECochain:
    """beta-dagger of ``b`` as a CE cochain."""
    degrees = {graph_cochain_degree(g, form_degree) for g in b}
    degree = degrees.pop() if len(degrees) == 1 else 0
    return CECochain(lambda chain: beta_dagger(b, chain), degree, name="beta_dagger")


# =============================================================================
# Closed forms
# =============================================================================


def _right_derivative(f: GradedPoly, index: int) -> GradedPoly:
    """f d<-_A = (-1)^(|A|(|f|+1)) d_A f, applied per parity part."""
    space = f.space
    result = space.zero()
    for part, par in zip(f.split_parity(), (0, 1)):
        if not part:
            continue
        d = part.derivative(index)
        if space.parities[index] and not par:
            d = -d
        result = result + d
    return result


def cocycle_2pt(f1: GradedPoly, f2: GradedPoly) -> GradedPoly:
    """1/6 (-1)^|f1| (f1 d<-_ABC) P^AD P^BE P^CF (d_FED f2) with P = Omega^-1."""
    space = f1.space
    space.require_symplectic()
    pinv = space.omega_inverse
    flat = space.flat
    size = len(flat)
    lefts: dict[tuple[int, ...], GradedPoly] = {}
    for a, b, c in itertools.product(range(size), repeat=3):
        left = _right_derivative(
            _right_derivative(_right_derivative(f1, flat[a]), flat[b]), flat[c]
        )
        if left:
            lefts[(a, b, c)] = left
    rights: dict[tuple[int, ...], GradedPoly] = {}
    for d, e, f in itertools.product(range(size), repeat=3):
        right = f2.derivative(flat[d]).derivative(flat[e]).derivative(flat[f])
        if right:
            rights[(f, e, d)] = right
    result = space.zero()
    for (a, b, c), left in lefts.items():
        for (f, e, d), right in rights.items():
            weight = pinv[a][d] * pinv[b][e] * pinv[c][f]
            if weight:
                result = result + (left * right).scale(weight)
    even, odd = f1.split_parity()
    if odd and not even:
        result = -result
    return result.scale(Fraction(1, 6))


# =============================================================================
# Checks
# =============================================================================


@dataclass
class ChainMapReport:
    """Both sides of the boundary / beta square for one chain."""

    boundary_of_beta: GraphChain
    beta_of_boundary: GraphChain
    difference: GraphChain = field(init=False)

    def __post_init__(self) -> None:
        self.difference = self.boundary_of_beta - self.beta_of_boundary

    @property
    def equal(self) -> bool:
        return self.difference.is_zero()


def check_chain_map(ch: CEChain) -> ChainMapReport:
    """Compare the graph boundary of beta(ch) with beta of the CE boundary."""
    if ch.is_zero():
        return ChainMapReport(GraphChain(), GraphChain())
    lhs = graph_differential(beta(ch))
    rhs = beta(ce_boundary(ch))
    report = ChainMapReport(lhs, rhs)
    if not report.equal:
        logger.warning("beta fails to commute with the boundary on %s", ch)
    return report


def quadratic_hamiltonians(space: GradedSpace) -> list[GradedPoly]:
    """Basis of the quadratic Hamiltonians (the linear symplectic algebra)."""
    return [GradedPoly(space, {m: 1}) for m in flat_monomials(space, 2)]


def check_basic(
    c: CECochain,
    space: GradedSpace,
    shape: tuple[int, int],
    rng: random.Random | None = None,
    fiber: GradedSpace | None = None,
    samples: int = 3,
) -> bool:
    """True when ``c`` vanishes as soon as one Hamiltonian is quadratic.

    The remaining arguments are dense random polynomials of flat degree 1..4.
    """
    p, q = shape
    if p == 0:
        return True
    rng = rng or random.Random(0)
    for _ in range(samples):
        others = [random_poly(space, rng, (1, 2, 3, 4), 0.6) for _ in range(p - 1)]
        bar: tuple[MatPoly, ...] = ()
        if q:
            if fiber is None:
                raise VertexDataError("a fiber is needed for peripheral arguments")
            bar = tuple(_random_bar_entry(fiber, space, rng) for _ in range(q))
        for quad in quadratic_hamiltonians(space):
            chain = CEChain(space, (quad, *others), bar)
            if c(chain):
                return False
    return True


def _random_bar_entry(
    fiber: GradedSpace, space: GradedSpace, rng: random.Random
) -> MatPoly:
    size = fiber.dimension
    rows = [
        [random_poly(space, rng, (1, 2), 0.6) for _ in range(size)]
        for _ in range(size)
    ]
    return MatPoly(fiber, space, rows)


def check_cocycle(b: GraphChain, chains: Iterable[CEChain]) -> list[Any]:
    """Values of d(beta-dagger b) on the given chains (all zero for a cocycle)."""
    cochain = graph_cochain_ce(b)
    values = []
    for chain in chains:
        value = ce_coboundary_eval(cochain, chain)
        if value:
            logger.warning("coboundary of %s is %s on %s", cochain.name, value, chain)
        values.append(value)
    return values


# =============================================================================
# Literal recipe
# =============================================================================


def literal_amplitude(
    graph: Graph,
    hamiltonians: Sequence[GradedPoly],
    bar: Sequence[MatPoly] = (),
) -> Fraction:
    """Apply the derivative word of ``graph`` verbatim to the product F.

    Every vertex gets its own copy of the coordinates and its own odd label,
    F = t_1 f_1 ... t_p f_p Tr[s_1 g_1 | ... | s_q g_q] is built as one
    polynomial and the word d_{s_q}..d_{s_1} d_{t_p}..d_{t_1} E_1 .. E_m is
    applied derivative by derivative. Multiple edges carry 1/k!.

    Raises:
        VertexDataError: If the space has parameter generators.
    """
    if len(hamiltonians) != graph.n_internal or len(bar) != graph.n_peripheral:
        raise VertexDataError("graph shape does not match the chain")
    if hamiltonians:
        space = hamiltonians[0].space
    elif bar:
        space = bar[0].space
    else:
        return Fraction(1)
    if not _parameter_free(space):
        raise VertexDataError("the literal recipe needs a parameter-free space")
    space.require_symplectic()
    n = graph.n_vertices
    dim = space.dimension
    labels = [
        (f"t{k}", space.form_degree + 1) if k < graph.n_internal else (f"s{k}", 1)
        for k in range(n)
    ]
    copies = [
        (f"{g.name}@{k}", g.degree)
        for k in range(n)
        for g in space.generators
    ]
    big = GradedSpace(labels + copies)

    def embed(poly: GradedPoly, k: int) -> GradedPoly:
        terms = {}
        for mono, c in poly.terms.items():
            wide = [0] * big.dimension
            wide[n + k * dim : n + (k + 1) * dim] = mono
            terms[tuple(wide)] = c
        return GradedPoly(big, terms)

    def label(k: int) -> GradedPoly:
        return big.gen(k)

    head = big.constant(1)
    for k, f in enumerate(hamiltonians):
        head = head * (label(k) * embed(f, k))
    product = big.zero()
    p = graph.n_internal
    for cycle in _index_cycles(bar):
        term = head
        for offset, (g, (i, j)) in enumerate(zip(bar, cycle)):
            k = p + offset
            term = term * (label(k) * embed(g.entries[i][j], k))
            if not term:
                break
        product = product + term
    if not bar:
        product = head

    pinv = space.omega_inverse
    flat = space.flat
    for a, b in reversed(graph.edges):
        acc = big.zero()
        for ka, A in enumerate(flat):
            for kb, B in enumerate(flat):
                weight = pinv[ka][kb]
                if not weight:
                    continue
                hit = product.derivative(n + b * dim + B).derivative(n + a * dim + A)
                if hit:
                    acc = acc + hit.scale(weight)
        product = acc
        if not product:
            return Fraction(0)
    for k in range(n):
        product = product.derivative(k)
    value = product.evaluate_at_zero()
    for mult in _multiplicities(graph.edges):
        value /= math.factorial(mult)
    return value


def _index_cycles(bar: Sequence[MatPoly]) -> Iterator[list[tuple[int, int]]]:
    if not bar:
        return
    size = bar[0].size
    for indices in itertools.product(range(size), repeat=len(bar)):
        yield [
            (indices[k], indices[(k + 1) % len(bar)]) for k in range(len(bar))
        ]
