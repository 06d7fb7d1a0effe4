"""Tests for the command-line front end."""

import json
from pathlib import Path

import pytest

from app.cli import EXIT_INPUT, EXIT_OK, EXIT_ORDER, EXIT_RESOURCE, main

MANIFESTS = Path(__file__).resolve().parents[1] / "data" / "manifests"


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGraphCommand:
    """Tests for `workbench graph`."""

    def test_diff(self, capsys):
        """Test that the differential prints one term per line."""
        assert run(capsys, "graph", "diff", "Gamma1")[:2] == (EXIT_OK, "6 * Gamma3\n")

    def test_diff_of_empty_chain(self, capsys):
        """Test that an empty chain prints 0."""
        assert run(capsys, "graph", "diff", "")[:2] == (EXIT_OK, "0\n")

    def test_diff_of_manifest(self, capsys):
        """Test that a manifest prints one differential per graph and the chain."""
        code, out, _ = run(
            capsys, "graph", "diff", str(MANIFESTS / "named_graphs.json")
        )
        lines = out.splitlines()
        assert code == EXIT_OK
        assert lines[0] == "d Gamma1 = 6 * Gamma3"
        assert lines[-1] == "d chain = 0"

    def test_aut(self, capsys):
        """Test that a single graph prints its automorphism count."""
        assert run(capsys, "graph", "aut", "Gamma6")[:2] == (EXIT_OK, "3\n")

    def test_aut_json_lines(self, capsys):
        """Test that json-lines output carries the graph and the count."""
        code, out, _ = run(
            capsys, "graph", "aut", "Gamma1", "--format", "json-lines"
        )
        assert code == EXIT_OK
        assert json.loads(out) == {"aut_order": 24, "graph": "Gamma1"}

    def test_enumerate(self, capsys):
        """Test that one trivalent vertex on three points gives one class."""
        code, out, _ = run(
            capsys, "graph", "enumerate", "--internal", "1", "--peripheral", "3"
        )
        assert code == EXIT_OK
        assert len(out.splitlines()) == 1

    def test_pair(self, capsys):
        """Test pairing a chain with --cochain."""
        code, out, _ = run(
            capsys, "graph", "pair", "1/4 * Gamma5", "--cochain", "Gamma5"
        )
        assert (code, out) == (EXIT_OK, "1/4\n")

    def test_malformed_graph(self, capsys):
        """Test that malformed graph text exits with the input code."""
        code, _, err = run(capsys, "graph", "aut", "nonsense")
        assert code == EXIT_INPUT
        assert err.startswith("error:")

    def test_missing_input(self, capsys):
        """Test that diff without a chain is an input error."""
        assert run(capsys, "graph", "diff")[0] == EXIT_INPUT

    def test_vertex_limit(self, capsys):
        """Test that an oversized enumeration exits with the resource code."""
        code = run(capsys, "graph", "enumerate", "--internal", "9")[0]
        assert code == EXIT_RESOURCE

    def test_bad_valence_range(self):
        """Test that a malformed valence is rejected by the parser."""
        with pytest.raises(SystemExit):
            main(["graph", "enumerate", "--internal-valence", "a:b"])


class TestWeightsCommand:
    """Tests for `workbench weights`."""

    def test_lie_table(self, capsys):
        """Test that su2 weights print as an aligned table."""
        code, out, _ = run(
            capsys, "weights", str(MANIFESTS / "su2_fundamental.json")
        )
        assert code == EXIT_OK
        assert out.splitlines() == [
            "Gamma4  -9/4",
            "Gamma5  3/8",
            "Gamma6  2",
            "Gamma7  -3",
        ]

    def test_diagram_pairing(self, capsys):
        """Test that --diagram reads off the weight of one diagram."""
        code, out, _ = run(
            capsys,
            "weights",
            str(MANIFESTS / "su2_fundamental.json"),
            "--diagram",
            "Gamma7",
        )
        assert (code, out) == (EXIT_OK, "Gamma7  -3\n")

    def test_equivariant_class(self, capsys):
        """Test that --equivariant evaluates the theta cocycle on jets."""
        code, out, _ = run(
            capsys,
            "weights",
            str(MANIFESTS / "symplectic_jets.json"),
            "--equivariant",
        )
        assert code == EXIT_OK
        lines = out.splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("Theta  ")

    def test_equivariant_needs_rw_data(self, capsys):
        """Test that a Lie manifest has no equivariant class."""
        code, _, err = run(
            capsys,
            "weights",
            str(MANIFESTS / "su2_fundamental.json"),
            "--equivariant",
        )
        assert code == EXIT_INPUT
        assert "rw or jets" in err

    def test_wrong_manifest_kind(self, capsys):
        """Test that a graphs manifest is not accepted for weights."""
        code, _, err = run(capsys, "weights", str(MANIFESTS / "named_graphs.json"))
        assert code == EXIT_INPUT
        assert "expected a" in err


class TestVerifyCommand:
    """Tests for `workbench verify`."""

    def test_passing_suite(self, capsys):
        """Test that a passing suite exits 0 and ends with its summary."""
        code, out, _ = run(capsys, "verify", "ce-d2", "--instances", "1")
        lines = out.splitlines()
        assert code == EXIT_OK
        assert all(line.startswith("PASS") for line in lines[:-1])
        assert lines[-1].startswith("ce-d2: 6/6 passed")

    def test_chain_map_suite(self, capsys):
        """Test that the chain-map suite passes under the default settings."""
        code, out, _ = run(capsys, "verify", "chain-map")
        assert code == EXIT_OK
        assert out.splitlines()[-1].startswith("chain-map: 60/60 passed")

    def test_json_lines_summary(self, capsys):
        """Test that every json-lines record names the suite."""
        code, out, _ = run(
            capsys,
            "verify",
            "cocycle",
            "--instances",
            "1",
            "--seed",
            "4",
            "--format",
            "json-lines",
        )
        records = [json.loads(line) for line in out.splitlines()]
        assert code == EXIT_OK
        assert all(record["suite"] == "cocycle" for record in records)
        assert records[-1]["seed"] == 4
        assert records[-1]["passed"] is True

    def test_order_too_low(self, capsys):
        """Test that a truncation below the suite minimum exits 4."""
        code, _, err = run(capsys, "verify", "flatness", "--order", "1")
        assert code == EXIT_ORDER
        assert "order" in err


class TestExportDotCommand:
    """Tests for `workbench export-dot`."""

    def test_single_graph_to_stdout(self, capsys):
        """Test that a single graph is written to stdout."""
        code, out, _ = run(capsys, "export-dot", "Gamma6")
        assert code == EXIT_OK
        assert out.replace('"', "").startswith("digraph Gamma6 {")

    def test_output_file(self, capsys, tmp_path):
        """Test that --output writes the DOT file."""
        target = tmp_path / "theta.dot"
        code, out, _ = run(capsys, "export-dot", "Theta", "--output", str(target))
        assert code == EXIT_OK
        dot = target.read_text(encoding="utf-8")
        assert dot.replace('"', "").startswith("digraph Theta")
        assert out == f"wrote {target}\n"
