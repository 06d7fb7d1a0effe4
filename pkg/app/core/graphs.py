"""Graphs, chord diagrams and the graph differential.

A ``Graph`` has ``n_internal`` internal vertices and ``n_peripheral`` vertices
sitting in cyclic order on an oriented circle. Vertices are stored 0-based:
internal vertices first (0..p-1), then peripheral ones (p..p+q-1). In text the
labels are 1-based and peripheral vertices are written ``pK``.

Orientation conventions:

* relabeling the internal vertices by a permutation contributes its sign;
* rotating the peripheral labels by k steps contributes (-1)^(k(q-1));
* flipping one edge contributes -1.

A graph equal to minus itself (for instance one with a self-loop) is zero.
"""

from __future__ import annotations

import itertools
import logging
import re
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from typing import Any

import networkx as nx

from app.config import get_settings
from app.core.exceptions import GraphFormatError, ResourceLimitError
from app.core.graded import GradedPoly, format_fraction, to_fraction

logger = logging.getLogger(__name__)

Edge = tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """A plain (``n_peripheral == 0``) or extended graph with directed edges."""

    n_internal: int
    n_peripheral: int = 0
    edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        if self.n_internal < 0 or self.n_peripheral < 0:
            raise GraphFormatError("vertex counts must be non-negative")
        total = self.n_internal + self.n_peripheral
        for a, b in self.edges:
            if not (0 <= a < total and 0 <= b < total):
                raise GraphFormatError(f"edge ({a}, {b}) refers to a missing vertex")

    @property
    def n_vertices(self) -> int:
        return self.n_internal + self.n_peripheral

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def is_extended(self) -> bool:
        return self.n_peripheral > 0

    def is_internal(self, vertex: int) -> bool:
        return vertex < self.n_internal

    def valences(self) -> list[int]:
        counts = [0] * self.n_vertices
        for a, b in self.edges:
            counts[a] += 1
            counts[b] += 1
        return counts

    def has_self_loop(self) -> bool:
        return any(a == b for a, b in self.edges)

    def __str__(self) -> str:
        return format_graph(self)


# Plain graphs are graphs without a circle; both share one representation.
PlainGraph = Graph
ExtGraph = Graph


@dataclass(frozen=True)
class GraphClass:
    """Canonical representative and the sign relating the input to it.

    ``sign == 0`` flags the zero class.
    """

    canonical: Graph
    sign: int

    @property
    def is_zero(self) -> bool:
        return self.sign == 0


# =============================================================================
# Text format
# =============================================================================

_GRAPH_RE = re.compile(
    r"^\s*graph\s+I\s*=\s*(\d+)\s+P\s*=\s*(\d+)\s*;\s*(?:E\s*:\s*(.*?))?;?\s*$"
)


def _parse_vertex(token: str, p: int, q: int) -> int:
    token = token.strip()
    if token.startswith("p"):
        index = int(token[1:])
        if not 1 <= index <= q:
            raise GraphFormatError(f"peripheral label {token} outside 1..{q}")
        return p + index - 1
    index = int(token)
    if not 1 <= index <= p:
        raise GraphFormatError(f"internal label {token} outside 1..{p}")
    return index - 1


def parse_graph(text: str) -> Graph:
    """Parse ``graph I=<p> P=<q>; E: a->b, a->p1;``.

    Raises:
        GraphFormatError: If the text or its labels are malformed.
    """
    match = _GRAPH_RE.match(text)
    if not match:
        raise GraphFormatError(f"cannot parse graph {text!r}")
    p, q = int(match.group(1)), int(match.group(2))
    body = (match.group(3) or "").strip().rstrip(";")
    edges: list[Edge] = []
    if body:
        for item in body.split(","):
            if not item.strip():
                continue
            if "->" not in item:
                raise GraphFormatError(f"edge {item.strip()!r} lacks '->'")
            left, right = item.split("->", 1)
            try:
                edges.append((_parse_vertex(left, p, q), _parse_vertex(right, p, q)))
            except ValueError as e:
                raise GraphFormatError(f"bad vertex label in {item.strip()!r}") from e
    return Graph(p, q, tuple(edges))


def _vertex_label(graph: Graph, vertex: int) -> str:
    if graph.is_internal(vertex):
        return str(vertex + 1)
    return f"p{vertex - graph.n_internal + 1}"


def format_graph(graph: Graph) -> str:
    edges = ", ".join(
        f"{_vertex_label(graph, a)}->{_vertex_label(graph, b)}" for a, b in graph.edges
    )
    return f"graph I={graph.n_internal} P={graph.n_peripheral}; E: {edges};"


# =============================================================================
# Canonical form
# =============================================================================


def _permutation_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def relabel(
    graph: Graph, internal: tuple[int, ...], rotation: int = 0
) -> tuple[Graph, int]:
    """Apply an internal permutation (old -> new) and a peripheral rotation.

    Returns the relabeled graph with edges oriented small -> large, and the sign.
    """
    p, q = graph.n_internal, graph.n_peripheral

    def image(v: int) -> int:
        return internal[v] if v < p else p + (v - p + rotation) % q

    sign = _permutation_sign(internal)
    if q and (rotation * (q - 1)) % 2:
        sign = -sign
    edges = []
    for a, b in graph.edges:
        na, nb = image(a), image(b)
        if na > nb:
            na, nb = nb, na
            sign = -sign
        edges.append((na, nb))
    return Graph(p, q, tuple(sorted(edges))), sign


def _vertex_invariants(graph: Graph) -> list[tuple]:
    p = graph.n_internal
    valences = graph.valences()
    neighbors: list[Counter] = [Counter() for _ in range(graph.n_vertices)]
    for a, b in graph.edges:
        neighbors[a][b] += 1
        neighbors[b][a] += 1
    invariants = []
    for v in range(p):
        multiplicities = tuple(sorted(neighbors[v].values()))
        peripheral = sum(c for u, c in neighbors[v].items() if u >= p)
        around = tuple(sorted(valences[u] for u in neighbors[v].elements()))
        invariants.append((valences[v], peripheral, multiplicities, around))
    return invariants


def _candidate_relabelings(graph: Graph) -> Iterator[tuple[tuple[int, ...], int]]:
    """Internal permutations respecting invariant cells, times rotations."""
    p, q = graph.n_internal, graph.n_peripheral
    invariants = _vertex_invariants(graph)
    order = sorted(set(invariants))
    cells = [[v for v in range(p) if invariants[v] == inv] for inv in order]
    offsets = []
    start = 0
    for cell in cells:
        offsets.append(start)
        start += len(cell)
    rotations = range(q) if q else range(1)
    for choice in itertools.product(*(itertools.permutations(c) for c in cells)):
        perm = [0] * p
        for offset, arrangement in zip(offsets, choice):
            for position, vertex in enumerate(arrangement):
                perm[vertex] = offset + position
        perm_t = tuple(perm)
        for rotation in rotations:
            yield perm_t, rotation


@cache
def _canonical_data(graph: Graph) -> tuple[Graph, int, int]:
    """Canonical representative, sign (0 for the zero class) and |Aut|."""
    best: Graph | None = None
    best_signs: set[int] = set()
    count = 0
    for perm, rotation in _candidate_relabelings(graph):
        image, sign = relabel(graph, perm, rotation)
        if best is None or image.edges < best.edges:
            best, best_signs, count = image, {sign}, 1
        elif image.edges == best.edges:
            best_signs.add(sign)
            count += 1
    assert best is not None
    if graph.has_self_loop() or len(best_signs) > 1:
        return best, 0, count
    return best, best_signs.pop(), count


def canonicalize(graph: Graph) -> GraphClass:
    """Canonical representative with the sign relating ``graph`` to it.

    ``graph = sign * canonical``; the zero class has sign 0.
    """
    canonical, sign, _ = _canonical_data(graph)
    return GraphClass(canonical, sign)


def aut_order(graph: Graph) -> int:
    """Number of vertex relabelings (with peripheral rotations) fixing the graph."""
    return _canonical_data(graph)[2]


def canonicalize_bruteforce(graph: Graph) -> GraphClass:
    """Reference canonical form over all relabelings, without refinement."""
    p, q = graph.n_internal, graph.n_peripheral
    best: Graph | None = None
    signs: set[int] = set()
    for perm in itertools.permutations(range(p)):
        for rotation in range(q) if q else range(1):
            image, sign = relabel(graph, perm, rotation)
            if best is None or image.edges < best.edges:
                best, signs = image, {sign}
            elif image.edges == best.edges:
                signs.add(sign)
    assert best is not None
    if graph.has_self_loop() or len(signs) > 1:
        return GraphClass(best, 0)
    return GraphClass(best, signs.pop())


def aut_order_bruteforce(graph: Graph) -> int:
    p, q = graph.n_internal, graph.n_peripheral
    target = sorted(tuple(sorted(e)) for e in graph.edges)
    count = 0
    for perm in itertools.permutations(range(p)):
        for rotation in range(q) if q else range(1):
            image, _ = relabel(graph, perm, rotation)
            if list(image.edges) == target:
                count += 1
    return count


def graph_cochain_degree(graph: Graph, form_degree: int) -> int:
    """Degree of the dual cochain: n E - (n+1) p - q."""
    return (
        form_degree * graph.n_edges
        - (form_degree + 1) * graph.n_internal
        - graph.n_peripheral
    )


# =============================================================================
# Graph chains
# =============================================================================


class GraphChain:
    """Formal linear combination of canonical graphs.

    Coefficients are Fractions or GradedPolys; zero coefficients and zero
    classes are dropped eagerly.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Graph, Any] | Iterable[tuple[Graph, Any]] = ()):
        acc: dict[Graph, Any] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for graph, coeff in items:
            if isinstance(coeff, (int, str)):
                coeff = to_fraction(coeff)
            cls = canonicalize(graph)
            if cls.is_zero or not coeff:
                continue
            value = coeff if cls.sign > 0 else -coeff
            if cls.canonical in acc:
                acc[cls.canonical] = acc[cls.canonical] + value
            else:
                acc[cls.canonical] = value
        self.terms = {g: c for g, c in acc.items() if c}

    @classmethod
    def from_graph(cls, graph: Graph, coeff: Any = 1) -> GraphChain:
        return cls([(graph, coeff)])

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __iter__(self) -> Iterator[Graph]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def coefficient(self, graph: Graph) -> Any:
        """Coefficient of ``graph`` (any representative) in this chain."""
        cls = canonicalize(graph)
        if cls.is_zero or cls.canonical not in self.terms:
            return Fraction(0)
        value = self.terms[cls.canonical]
        return value if cls.sign > 0 else -value

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        if not isinstance(other, GraphChain):
            return NotImplemented
        return (self - other).is_zero()

    def __add__(self, other: GraphChain) -> GraphChain:
        return GraphChain(itertools.chain(self.terms.items(), other.terms.items()))

    def __neg__(self) -> GraphChain:
        return GraphChain({g: -c for g, c in self.terms.items()})

    def __sub__(self, other: GraphChain) -> GraphChain:
        return self + (-other)

    def __mul__(self, factor: Any) -> GraphChain:
        if isinstance(factor, (int, str)):
            factor = to_fraction(factor)
        return GraphChain({g: c * factor for g, c in self.terms.items()})

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"GraphChain({format_chain(self, separator=' + ')})"

    def map_coefficients(self, fn) -> GraphChain:
        return GraphChain({g: fn(c) for g, c in self.terms.items()})


# =============================================================================
# Differential
# =============================================================================


def _contract_internal(graph: Graph, index: int) -> Iterator[tuple[int, Graph]]:
    """Shrink the internal edge ``index``; the larger label merges into the smaller."""
    p, q = graph.n_internal, graph.n_peripheral
    a, b = graph.edges[index]
    lo, hi = min(a, b), max(a, b)
    sign = -1 if (hi + 1) % 2 else 1
    if a > b:
        sign = -sign

    def image(v: int) -> int:
        if v == hi:
            return lo
        return v - 1 if v > hi else v

    rest = graph.edges[:index] + graph.edges[index + 1 :]
    edges = tuple((image(u), image(v)) for u, v in rest)
    yield sign, Graph(p - 1, q, edges)


def _contract_mixed(graph: Graph, index: int) -> Iterator[tuple[int, Graph]]:
    """Shrink an edge between a peripheral and an internal vertex."""
    p, q = graph.n_internal, graph.n_peripheral
    a, b = graph.edges[index]
    internal, peripheral = (a, b) if a < p else (b, a)
    sign = -1 if (internal + 1) % 2 else 1
    if a == internal:
        sign = -sign

    def image(v: int) -> int:
        if v == internal:
            return peripheral - 1
        return v - 1 if v > internal else v

    rest = graph.edges[:index] + graph.edges[index + 1 :]
    edges = tuple((image(u), image(v)) for u, v in rest)
    yield sign, Graph(p - 1, q, edges)


def _collapse_peripheral(graph: Graph) -> Iterator[tuple[int, Graph]]:
    """Merge adjacent peripheral vertices along the circle."""
    p, q = graph.n_internal, graph.n_peripheral
    if q < 2:
        return
    for j in range(1, q):
        # merge j and j+1 (1-based) into j
        sign = -1 if (p + j + 1) % 2 else 1

        def image(v: int, j: int = j) -> int:
            if v < p:
                return v
            k = v - p + 1
            if k <= j:
                return v
            return v - 1

        edges = tuple((image(u), image(v)) for u, v in graph.edges)
        yield sign, Graph(p, q - 1, edges)

    # last with first becomes the new vertex 1
    sign = -1 if (p + q + 1) % 2 else 1

    def wrap(v: int) -> int:
        if v < p:
            return v
        return p if v - p + 1 == q else v

    edges = tuple((wrap(u), wrap(v)) for u, v in graph.edges)
    yield sign, Graph(p, q - 1, edges)


def differential_terms(graph: Graph) -> Iterator[tuple[int, Graph]]:
    """All signed terms of the differential, before canonicalization."""
    p = graph.n_internal
    for index, (a, b) in enumerate(graph.edges):
        if a == b:
            continue
        if a < p and b < p:
            yield from _contract_internal(graph, index)
        elif (a < p) != (b < p):
            yield from _contract_mixed(graph, index)
    yield from _collapse_peripheral(graph)


def graph_differential(chain: GraphChain | Graph) -> GraphChain:
    """Apply the differential (internal + mixed + peripheral) linearly."""
    if isinstance(chain, Graph):
        chain = GraphChain.from_graph(chain)
    pieces: list[tuple[Graph, Any]] = []
    for graph, coeff in chain.items():
        for sign, image in differential_terms(graph):
            pieces.append((image, coeff if sign > 0 else -coeff))
    return GraphChain(pieces)


def pair(cochain: GraphChain, chain: GraphChain) -> Any:
    """The pairing with <[G]*, [G']> = +-1 when [G] = +-[G']."""
    total: Any = Fraction(0)
    for graph, coeff in chain.items():
        dual = cochain.terms.get(graph)
        if dual is not None:
            total = total + coeff * dual
    return total


# =============================================================================
# Enumeration
# =============================================================================


def _as_range(
    value: int | tuple[int, int] | None, default: tuple[int, int]
) -> tuple[int, int]:
    if value is None:
        return default
    if isinstance(value, int):
        return value, value
    return value[0], value[1]


def enumerate_graphs(
    n_internal: int,
    n_peripheral: int = 0,
    internal_valence: int | tuple[int, int] | None = 3,
    peripheral_valence: int | tuple[int, int] | None = 1,
    n_edges: int | None = None,
    max_classes: int | None = None,
) -> list[Graph]:
    """One canonical representative per nonzero class with the given shape.

    Valence constraints are exact integers or inclusive ``(min, max)`` ranges.

    Raises:
        ResourceLimitError: If the shape or the number of classes is too large.
    """
    settings = get_settings()
    p, q = n_internal, n_peripheral
    if p + q > settings.max_graph_vertices:
        raise ResourceLimitError(
            f"{p + q} vertices exceed the limit of {settings.max_graph_vertices}"
        )
    limit = max_classes or settings.max_enumeration_classes
    int_lo, int_hi = _as_range(internal_valence, (1, 2 * (p + q)))
    per_lo, per_hi = _as_range(peripheral_valence, (0, 2 * (p + q)))
    total = p + q
    lows = [int_lo] * p + [per_lo] * q
    highs = [int_hi] * p + [per_hi] * q
    slots = [(a, b) for a in range(total) for b in range(a + 1, total)]

    found: dict[Graph, None] = {}
    valence = [0] * total
    chosen: list[Edge] = []

    # vertex -> index of the last slot touching it, for early minimum checks
    last_slot = [-1] * total
    for index, (a, b) in enumerate(slots):
        last_slot[a] = index
        last_slot[b] = index

    def search(index: int) -> None:
        if n_edges is not None and len(chosen) > n_edges:
            return
        if index == len(slots):
            if n_edges is not None and len(chosen) != n_edges:
                return
            if any(v < lo for v, lo in zip(valence, lows)):
                return
            cls = canonicalize(Graph(p, q, tuple(chosen)))
            if not cls.is_zero and cls.canonical not in found:
                found[cls.canonical] = None
                if len(found) > limit:
                    raise ResourceLimitError(
                        f"more than {limit} graph classes for I={p} P={q}"
                    )
            return
        a, b = slots[index]
        room = min(highs[a] - valence[a], highs[b] - valence[b])
        for mult in range(0, room + 1):
            valence[a] += mult
            valence[b] += mult
            chosen.extend([(a, b)] * mult)
            ok = True
            for v in (a, b):
                if last_slot[v] == index and valence[v] < lows[v]:
                    ok = False
            if ok:
                search(index + 1)
            del chosen[len(chosen) - mult :]
            valence[a] -= mult
            valence[b] -= mult

    if total == 0:
        return [Graph(0, 0, ())] if not n_edges else []
    search(0)
    result = sorted(found, key=lambda g: (g.n_edges, g.edges))
    logger.debug("enumerated %d classes for I=%d P=%d", len(result), p, q)
    return result


@cache
def labeled_multigraphs(valences: tuple[int, ...]) -> tuple[tuple[Edge, ...], ...]:
    """All loopless edge multisets with exactly the given vertex valences.

    Edges are written (a, b) with a < b and listed in slot order, so every
    labeled multigraph appears once.
    """
    total = len(valences)
    if sum(valences) % 2:
        return ()
    slots = [(a, b) for a in range(total) for b in range(a + 1, total)]
    last_slot = [-1] * total
    for index, (a, b) in enumerate(slots):
        last_slot[a] = index
        last_slot[b] = index
    remaining = list(valences)
    chosen: list[Edge] = []
    out: list[tuple[Edge, ...]] = []

    def search(index: int) -> None:
        if index == len(slots):
            if not any(remaining):
                out.append(tuple(chosen))
            return
        a, b = slots[index]
        for mult in range(min(remaining[a], remaining[b]) + 1):
            remaining[a] -= mult
            remaining[b] -= mult
            chosen.extend([(a, b)] * mult)
            if not (
                (last_slot[a] == index and remaining[a])
                or (last_slot[b] == index and remaining[b])
            ):
                search(index + 1)
            del chosen[len(chosen) - mult :]
            remaining[a] += mult
            remaining[b] += mult

    if total == 0 or not slots:
        return ((),) if not any(valences) else ()
    search(0)
    return tuple(out)


@dataclass
class CocycleCertificate:
    """Outcome of a cocycle check; ``violations`` lists graphs G with b(dG) != 0."""

    is_cocycle: bool
    violations: list[tuple[Graph, Any]]


def is_trivalent_cocycle(cochain: GraphChain) -> CocycleCertificate:
    """Check that the cochain annihilates the differential of every graph
    with one more vertex and one more edge than a graph in its support."""
    shapes: set[tuple[int, int, int]] = set()
    top = 1
    for graph in cochain:
        shapes.add((graph.n_internal, graph.n_peripheral, graph.n_edges))
        top = max(top, *graph.valences(), 1)
    violations: list[tuple[Graph, Any]] = []
    checked: set[Graph] = set()
    for p, q, e in sorted(shapes):
        for pp, qq in ((p + 1, q), (p, q + 1)):
            for graph in enumerate_graphs(
                pp,
                qq,
                internal_valence=(2, top + 1),
                peripheral_valence=(1, top + 1),
                n_edges=e + 1,
            ):
                if graph in checked:
                    continue
                checked.add(graph)
                value = pair(cochain, graph_differential(graph))
                if value:
                    violations.append((graph, value))
    return CocycleCertificate(not violations, violations)


# =============================================================================
# Connectivity and DOT export
# =============================================================================


def to_networkx(graph: Graph) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    for v in range(graph.n_vertices):
        g.add_node(
            v,
            label=_vertex_label(graph, v),
            kind="internal" if graph.is_internal(v) else "peripheral",
        )
    for a, b in graph.edges:
        g.add_edge(a, b, kind="edge")
    return g


def is_connected(graph: Graph) -> bool:
    """Connectivity through edges only (the circle is not counted)."""
    if graph.n_vertices == 0:
        return True
    return nx.is_weakly_connected(to_networkx(graph))


def connected_part(chain: GraphChain) -> GraphChain:
    return GraphChain({g: c for g, c in chain.items() if is_connected(g)})


def to_dot(graph: Graph, name: str = "G") -> str:
    """DOT text; the peripheral circle is drawn as dashed edges."""
    g = nx.MultiDiGraph(name=name)
    for v, data in to_networkx(graph).nodes(data=True):
        internal = data["kind"] == "internal"
        g.add_node(
            v,
            label=data["label"],
            xlabel=data["label"],
            shape="circle" if internal else "point",
        )
    g.add_edges_from(graph.edges)
    p, q = graph.n_internal, graph.n_peripheral
    for k in range(q):
        g.add_edge(p + k, p + (k + 1) % q, style="dashed", arrowhead="none")
    return nx.nx_pydot.to_pydot(g).to_string().rstrip("\n") + "\n"


# =============================================================================
# Named graphs
# =============================================================================

NAMED_GRAPHS: dict[str, Graph] = {
    "Gamma1": parse_graph("graph I=4 P=0; E: 1->2, 4->3, 2->3, 3->1, 2->4, 1->4;"),
    "Gamma2": parse_graph("graph I=4 P=0; E: 1->2, 1->2, 4->3, 4->3, 2->3, 1->4;"),
    "Gamma3": parse_graph("graph I=3 P=0; E: 1->2, 1->2, 1->3, 1->3, 2->3;"),
    "Gamma4": parse_graph("graph I=0 P=4; E: p1->p2, p4->p3;"),
    "Gamma5": parse_graph("graph I=0 P=4; E: p1->p3, p2->p4;"),
    "Gamma6": parse_graph("graph I=1 P=3; E: p1->1, p2->1, p3->1;"),
    "Gamma7": parse_graph("graph I=2 P=2; E: p1->1, p2->2, 1->2, 1->2;"),
    "Gamma8": parse_graph("graph I=0 P=3; E: p1->p2, p3->p2;"),
    "Gamma9": parse_graph("graph I=1 P=2; E: p1->1, 1->p2, 1->p2;"),
    "Theta": parse_graph("graph I=2 P=0; E: 1->2, 1->2, 1->2;"),
}


@cache
def _catalog_index() -> dict[Graph, tuple[str, int]]:
    index = {}
    for name, graph in NAMED_GRAPHS.items():
        cls = canonicalize(graph)
        if not cls.is_zero:
            index[cls.canonical] = (name, cls.sign)
    return index


def lookup_graph(token: str) -> Graph:
    """Resolve a catalog name or graph text."""
    token = token.strip()
    if token in NAMED_GRAPHS:
        return NAMED_GRAPHS[token]
    return parse_graph(token)


def catalog_name(graph: Graph) -> tuple[str, int] | None:
    """Name of a canonical graph in the catalog and its sign relative to it."""
    return _catalog_index().get(graph)


def format_coefficient(coeff: Any) -> str:
    if isinstance(coeff, Fraction):
        return format_fraction(coeff)
    if isinstance(coeff, GradedPoly):
        return f"({coeff.to_text(separator=' + ')})"
    return str(coeff)


def chain_entries(chain: GraphChain) -> list[tuple[str, Any]]:
    """(label, coefficient) pairs using catalog names where possible."""
    entries = []
    for graph, coeff in sorted(
        chain.items(), key=lambda item: (item[0].n_vertices, item[0].edges)
    ):
        named = catalog_name(graph)
        if named is not None:
            name, sign = named
            entries.append((name, coeff if sign > 0 else -coeff))
        else:
            entries.append((format_graph(graph), coeff))
    entries.sort(key=lambda item: item[0])
    return entries


def format_chain(chain: GraphChain, separator: str = "\n") -> str:
    """Render as ``6 * Gamma3`` lines, or ``0`` for the zero chain."""
    if chain.is_zero():
        return "0"
    return separator.join(
        f"{format_coefficient(coeff)} * {label}"
        for label, coeff in chain_entries(chain)
    )


def parse_chain(text: str) -> GraphChain:
    """Parse lines ``coeff * <graph text or catalog name>`` (coeff optional)."""
    pieces: list[tuple[Graph, Fraction]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line == "0":
            continue
        coeff = Fraction(1)
        head, sep, tail = line.partition("*")
        if sep and not head.strip().startswith("graph"):
            try:
                coeff = to_fraction(head.strip())
                line = tail.strip()
            except ValueError as e:
                raise GraphFormatError(f"bad coefficient in {line!r}") from e
        pieces.append((lookup_graph(line), coeff))
    return GraphChain(pieces)
