"""Tests for graphs, canonical forms and the graph differential."""

from fractions import Fraction

import pydot
import pytest

from app.core.exceptions import GraphFormatError, ResourceLimitError
from app.core.graphs import (
    NAMED_GRAPHS,
    Graph,
    GraphChain,
    aut_order,
    aut_order_bruteforce,
    canonicalize,
    canonicalize_bruteforce,
    catalog_name,
    connected_part,
    enumerate_graphs,
    format_chain,
    format_graph,
    graph_cochain_degree,
    graph_differential,
    is_connected,
    labeled_multigraphs,
    lookup_graph,
    pair,
    parse_chain,
    parse_graph,
    relabel,
    to_dot,
)


def chain(**terms) -> GraphChain:
    return GraphChain(
        [(NAMED_GRAPHS[name], coeff) for name, coeff in terms.items()]
    )


class TestGraphText:
    """Tests for parsing and printing graph text."""

    def test_parse_extended_graph(self):
        """Test that peripheral labels map after the internal vertices."""
        graph = parse_graph("graph I=1 P=3; E: p1->1, p2->1, p3->1;")
        assert graph.n_internal == 1
        assert graph.n_peripheral == 3
        assert graph.edges == ((1, 0), (2, 0), (3, 0))

    def test_format_matches_input(self):
        """Test that printing reproduces normalized graph text."""
        text = "graph I=2 P=2; E: p1->1, p2->2, 1->2, 1->2;"
        assert format_graph(parse_graph(text)) == text

    def test_graph_without_edges(self):
        """Test that the edge block may be omitted."""
        graph = parse_graph("graph I=2 P=0;")
        assert graph.edges == ()

    @pytest.mark.parametrize(
        "text",
        [
            "nonsense",
            "graph I=2 P=0; E: 1->3;",
            "graph I=1 P=1; E: 1-p1;",
            "graph I=1 P=1; E: 1->p2;",
            "graph I=1 P=0; E: x->1;",
        ],
    )
    def test_malformed_text_raises(self, text):
        """Test that malformed graph text raises GraphFormatError."""
        with pytest.raises(GraphFormatError):
            parse_graph(text)

    def test_edge_to_missing_vertex_raises(self):
        """Test that a Graph rejects edges outside its vertex range."""
        with pytest.raises(GraphFormatError):
            Graph(2, 0, ((0, 2),))

    def test_lookup_catalog_name(self):
        """Test that catalog names resolve to the named graphs."""
        assert lookup_graph(" Theta ") == NAMED_GRAPHS["Theta"]


class TestCanonicalForm:
    """Tests for canonical representatives and automorphisms."""

    @pytest.mark.parametrize(
        ("name", "order"),
        [
            ("Gamma1", 24),
            ("Gamma2", 4),
            ("Gamma3", 2),
            ("Gamma4", 2),
            ("Gamma5", 4),
            ("Gamma6", 3),
            ("Gamma7", 2),
            ("Gamma8", 1),
            ("Gamma9", 1),
        ],
    )
    def test_aut_orders_of_named_graphs(self, name, order):
        """Test that automorphism counts of the named graphs are exact."""
        assert aut_order(NAMED_GRAPHS[name]) == order

    @pytest.mark.parametrize("name", sorted(NAMED_GRAPHS))
    def test_refined_search_matches_bruteforce(self, name):
        """Test that the refined search agrees with the full search."""
        graph = NAMED_GRAPHS[name]
        assert canonicalize(graph).is_zero == canonicalize_bruteforce(graph).is_zero
        assert aut_order(graph) == aut_order_bruteforce(graph)

    def test_relabeled_graph_has_same_class(self):
        """Test that relabeling does not change the canonical representative."""
        graph = NAMED_GRAPHS["Gamma2"]
        image, _ = relabel(graph, (2, 0, 3, 1))
        assert canonicalize(image).canonical == canonicalize(graph).canonical

    def test_flipping_an_edge_flips_the_sign(self):
        """Test that reversing one edge negates the class."""
        graph = parse_graph("graph I=1 P=3; E: p1->1, p2->1, p3->1;")
        flipped = parse_graph("graph I=1 P=3; E: 1->p1, p2->1, p3->1;")
        assert canonicalize(graph).sign == -canonicalize(flipped).sign

    def test_self_loop_is_zero(self):
        """Test that a graph with a self-loop is the zero class."""
        assert canonicalize(parse_graph("graph I=1 P=0; E: 1->1;")).is_zero

    def test_odd_automorphism_is_zero(self):
        """Test that a double edge between two bivalent vertices vanishes."""
        graph = parse_graph("graph I=2 P=0; E: 1->2, 1->2;")
        assert canonicalize(graph).is_zero
        assert GraphChain.from_graph(graph).is_zero()

    def test_theta_is_nonzero(self):
        """Test that the theta graph survives with two automorphisms."""
        theta = NAMED_GRAPHS["Theta"]
        assert not canonicalize(theta).is_zero
        assert aut_order(theta) == 2

    def test_cochain_degree(self):
        """Test the cochain degree n E - (n+1) p - q."""
        assert graph_cochain_degree(NAMED_GRAPHS["Theta"], 2) == 0
        assert graph_cochain_degree(NAMED_GRAPHS["Gamma6"], 2) == 6 - 3 - 3


class TestDifferential:
    """Tests for the graph differential."""

    @pytest.mark.parametrize(
        ("name", "expected"),
        [
            ("Gamma1", {"Gamma3": 6}),
            ("Gamma2", {"Gamma3": 2}),
            ("Gamma4", {"Gamma8": -2}),
            ("Gamma5", {"Gamma8": 4}),
            ("Gamma6", {"Gamma8": -3, "Gamma9": 3}),
            ("Gamma7", {"Gamma9": 2}),
        ],
    )
    def test_named_differentials(self, name, expected):
        """Test that the differentials of the named graphs are exact."""
        assert graph_differential(NAMED_GRAPHS[name]) == chain(**expected)

    def test_printed_differential(self):
        """Test that the differential prints with catalog names."""
        assert format_chain(graph_differential(NAMED_GRAPHS["Gamma1"])) == (
            "6 * Gamma3"
        )

    def test_empty_chain(self):
        """Test that the empty chain has zero differential."""
        boundary = graph_differential(parse_chain(""))
        assert boundary.is_zero()
        assert format_chain(boundary) == "0"

    @pytest.mark.parametrize(
        "terms",
        [
            {
                "Gamma5": Fraction(1, 4),
                "Gamma6": Fraction(1, 3),
                "Gamma7": Fraction(-1, 2),
            },
            {"Gamma5": 1, "Gamma4": 2},
        ],
    )
    def test_weight_system_cycles(self, terms):
        """Test that the two degree-four combinations are cycles."""
        assert graph_differential(chain(**terms)).is_zero()

    @pytest.mark.parametrize("name", sorted(NAMED_GRAPHS))
    def test_differential_squares_to_zero(self, name):
        """Test that applying the differential twice gives zero."""
        graph = NAMED_GRAPHS[name]
        assert graph_differential(graph_differential(graph)).is_zero()

    def test_squares_to_zero_on_enumerated_graphs(self):
        """Test that d^2 = 0 on every trivalent-univalent graph of a shape."""
        for graph in enumerate_graphs(2, 2):
            assert graph_differential(graph_differential(graph)).is_zero()


class TestChains:
    """Tests for chain arithmetic, text and pairing."""

    def test_parse_chain_with_coefficients(self):
        """Test that chain lines accept rational coefficients."""
        parsed = parse_chain("1/4 * Gamma5\n1/3 * Gamma6\n-1/2 * Gamma7")
        assert parsed.coefficient(NAMED_GRAPHS["Gamma7"]) == Fraction(-1, 2)
        assert len(parsed) == 3

    def test_bad_coefficient_raises(self):
        """Test that a malformed coefficient raises GraphFormatError."""
        with pytest.raises(GraphFormatError):
            parse_chain("x/y * Gamma5")

    def test_arithmetic(self):
        """Test that addition and scaling combine coefficients."""
        total = chain(Gamma5=1) + chain(Gamma5=1) * 2 - chain(Gamma4=1)
        assert total.coefficient(NAMED_GRAPHS["Gamma5"]) == 3
        assert total.coefficient(NAMED_GRAPHS["Gamma4"]) == -1
        assert (total - total) == 0

    def test_pairing(self):
        """Test that the pairing reads off the dual coefficient."""
        cochain = parse_chain("Gamma5")
        target = parse_chain("1/4 * Gamma5\n1/3 * Gamma6")
        assert pair(cochain, target) == Fraction(1, 4)

    def test_pairing_disjoint_support(self):
        """Test that chains with disjoint support pair to zero."""
        assert pair(chain(Gamma4=1), chain(Gamma5=1)) == 0


class TestEnumeration:
    """Tests for graph enumeration."""

    def test_chord_diagrams_on_four_points(self):
        """Test that four univalent points give the two chord diagrams."""
        graphs = enumerate_graphs(0, 4, internal_valence=None, peripheral_valence=1)
        names = {catalog_name(g)[0] for g in graphs}
        assert names == {"Gamma4", "Gamma5"}

    def test_tripod(self):
        """Test that one trivalent vertex on three points gives the tripod."""
        graphs = enumerate_graphs(1, 3)
        assert len(graphs) == 1
        assert aut_order(graphs[0]) == 3

    def test_vertex_limit(self):
        """Test that too many vertices raise ResourceLimitError."""
        with pytest.raises(ResourceLimitError):
            enumerate_graphs(9, 0)

    def test_class_limit(self):
        """Test that exceeding the class limit raises ResourceLimitError."""
        with pytest.raises(ResourceLimitError):
            enumerate_graphs(0, 4, internal_valence=None, max_classes=1)

    def test_labeled_multigraphs(self):
        """Test that labeled multigraphs with fixed valences are listed once."""
        assert labeled_multigraphs((3, 3)) == (((0, 1), (0, 1), (0, 1)),)
        assert len(labeled_multigraphs((1, 1, 1, 1))) == 3
        assert labeled_multigraphs((1, 2)) == ()


class TestExport:
    """Tests for connectivity and DOT export."""

    def test_connectivity(self):
        """Test that connectivity ignores the circle."""
        assert not is_connected(NAMED_GRAPHS["Gamma4"])
        assert is_connected(NAMED_GRAPHS["Gamma6"])

    def test_connected_part(self):
        """Test that connected_part drops disconnected graphs."""
        assert connected_part(chain(Gamma4=1, Gamma6=2)) == chain(Gamma6=2)

    def test_dot(self):
        """Test that DOT output draws the circle dashed."""
        dot = to_dot(NAMED_GRAPHS["Gamma6"], name="Gamma6")
        assert dot.splitlines()[0].replace('"', "").split()[:2] == ["digraph", "Gamma6"]
        assert dot.count("style=dashed") == 3
        assert dot.count("->") == 6

    def test_dot_reads_back(self):
        """Test that the DOT text parses back to the same edges and circle."""
        parsed = pydot.graph_from_dot_data(to_dot(NAMED_GRAPHS["Theta"], "Theta"))[0]
        assert parsed.get_name().strip('"') == "Theta"
        assert len(parsed.get_edges()) == 3
        assert len(parsed.get_nodes()) == 2
