"""Tests for manifest parsing and validation."""

import json
from fractions import Fraction
from pathlib import Path

import pytest

from app.core.exceptions import ManifestError
from app.core.graphs import NAMED_GRAPHS
from app.schemas.manifest import (
    GraphsManifest,
    JetsManifest,
    LieManifest,
    RWManifest,
    load_manifest,
    parse_manifest,
)

MANIFESTS = Path(__file__).resolve().parents[1] / "data" / "manifests"


class TestParseManifest:
    """Tests for selecting and validating manifest kinds."""

    def test_lie_manifest(self):
        """Test that a lie manifest builds validated Lie data."""
        manifest = parse_manifest(
            {"kind": "lie", "matrices": [[[1, 0], [0, -1]]], "m": 2}
        )
        assert isinstance(manifest, LieManifest)
        assert manifest.to_data().killing == ((2,),)

    def test_rational_strings(self):
        """Test that num/den strings become exact rationals."""
        manifest = parse_manifest(
            {"kind": "rw", "omega": [[0, "1/2"], ["-1/2", 0]], "curvature": []}
        )
        assert isinstance(manifest, RWManifest)
        assert manifest.omega[0][1] == Fraction(1, 2)

    def test_rw_moment_without_cubic(self):
        """Test that a moment given by its hessian gets a zero cubic jet."""
        manifest = parse_manifest(
            {
                "kind": "rw",
                "omega": [[0, 1], [-1, 0]],
                "curvature": [],
                "moments": [{"hessian": [[1, 0], [0, 0]]}],
            }
        )
        data = manifest.to_data()
        (moment,) = data.moments
        assert moment[0][0][0] == 1
        assert not any(x for layer in moment[1] for row in layer for x in row)

    def test_bad_rational_names_location(self):
        """Test that errors name the offending field."""
        with pytest.raises(ManifestError) as excinfo:
            parse_manifest({"kind": "lie", "matrices": [[["1.5"]]]})
        assert "matrices -> 0 -> 0 -> 0" in str(excinfo.value)

    def test_unknown_kind(self):
        """Test that an unknown kind is rejected."""
        with pytest.raises(ManifestError):
            parse_manifest({"kind": "tensor"})

    def test_extra_fields_are_rejected(self):
        """Test that misspelled fields do not pass silently."""
        with pytest.raises(ManifestError):
            parse_manifest({"kind": "graphs", "graph": ["Gamma1"]})

    def test_rational_serializes_as_text(self):
        """Test that rationals dump back to num/den strings."""
        manifest = parse_manifest(
            {"kind": "rw", "omega": [[0, "1/2"], ["-1/2", 0]], "curvature": []}
        )
        assert manifest.model_dump()["omega"] == [["0", "1/2"], ["-1/2", "0"]]

    def test_jets_gamma_count(self):
        """Test that gamma needs one matrix per base direction."""
        with pytest.raises(ManifestError) as excinfo:
            parse_manifest({"kind": "jets", "dimension": 2, "gamma": [[[0]]]})
        assert "gamma needs 2 matrices" in str(excinfo.value)

    def test_bundle_needs_fiber_degrees(self):
        """Test that a bundle connection needs its fiber degrees."""
        with pytest.raises(ManifestError):
            parse_manifest(
                {
                    "kind": "jets",
                    "dimension": 1,
                    "gamma": [[[0]]],
                    "bundle": [[[0]]],
                }
            )

    def test_graphs_manifest(self):
        """Test that graph names and chains resolve."""
        manifest = parse_manifest(
            {"kind": "graphs", "graphs": ["Gamma6"], "chain": "2 * Gamma6"}
        )
        assert isinstance(manifest, GraphsManifest)
        assert manifest.parsed_graphs() == [NAMED_GRAPHS["Gamma6"]]
        assert manifest.parsed_chain().coefficient(NAMED_GRAPHS["Gamma6"]) == 2
        assert manifest.parsed_cochain() is None


class TestLoadManifest:
    """Tests for reading manifest files."""

    def test_missing_file(self, tmp_path):
        """Test that an unreadable path raises ManifestError."""
        with pytest.raises(ManifestError, match="cannot read"):
            load_manifest(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        """Test that malformed JSON reports its line."""
        path = tmp_path / "broken.json"
        path.write_text('{\n"kind": }', encoding="utf-8")
        with pytest.raises(ManifestError, match="line 2"):
            load_manifest(path)

    def test_round_trip_through_file(self, tmp_path):
        """Test that a written manifest loads back."""
        path = tmp_path / "lie.json"
        path.write_text(
            json.dumps({"kind": "lie", "matrices": [[[1]]]}), encoding="utf-8"
        )
        assert isinstance(load_manifest(path), LieManifest)


class TestBundledManifests:
    """Tests for the example manifests shipped in data/manifests."""

    def test_su2(self):
        """Test that the su2 manifest gives three generators."""
        manifest = load_manifest(MANIFESTS / "su2_fundamental.json")
        assert manifest.to_data().dimension == 3
        assert manifest.m == 4

    def test_rw(self):
        """Test that the RW manifest gives two anti-holomorphic directions."""
        manifest = load_manifest(MANIFESTS / "rw_cubic.json")
        assert manifest.to_data().anti_dimension == 2

    def test_jets(self):
        """Test that the jets manifest builds a connection and its moments."""
        manifest = load_manifest(MANIFESTS / "symplectic_jets.json")
        assert isinstance(manifest, JetsManifest)
        cd = manifest.to_connection()
        (moment,) = manifest.to_moments(cd)
        assert moment.flat_degrees() == {3}

    def test_graphs(self):
        """Test that the graphs manifest resolves every graph."""
        manifest = load_manifest(MANIFESTS / "named_graphs.json")
        assert len(manifest.parsed_graphs()) == 6
        assert manifest.enumeration.n_peripheral == 3

    def test_bad_moment_text(self):
        """Test that an unknown generator in a moment raises ManifestError."""
        manifest = load_manifest(MANIFESTS / "symplectic_jets.json")
        broken = manifest.model_copy(update={"moments": ["2 * q7"]})
        with pytest.raises(ManifestError, match="moments"):
            broken.to_moments(broken.to_connection())
