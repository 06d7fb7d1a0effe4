"""Tests for truncated jets, exponential maps and the Grothendieck connection."""

from fractions import Fraction

import pytest

from app.core.exceptions import ConnectionDataError, InsufficientOrderError
from app.core.jets import (
    ConnectionData,
    JetChart,
    base_space,
    check_flatness,
    compare,
    compare_matrices,
    darboux_form,
    exp_geodesic,
    exp_graded,
    exp_orthonormal,
    exp_symplectic,
    flat_connection,
    flow_oracle,
    geodesic_formula,
    geodesic_oracle,
    grothendieck,
    orthonormal_formula,
    random_bundle,
    random_connection,
    random_symplectic_connection,
    random_vielbein,
    symplectic_formula,
    transport_formula,
    transport_oracle,
)


def chart_for(cd, order=3, extra=()):
    return JetChart.for_connection(cd, order=order, base_order=1, extra=extra)


class TestJetChart:
    """Tests for charts and truncated series."""

    def test_order_must_be_positive(self):
        """Test that a zero truncation order is rejected."""
        with pytest.raises(InsufficientOrderError):
            JetChart(2, order=0)

    def test_needs_a_coordinate(self):
        """Test that a chart needs a base coordinate."""
        with pytest.raises(ValueError):
            JetChart(0)

    def test_xi_truncation(self):
        """Test that products above the xi order are dropped."""
        chart = JetChart(1, order=2)
        xi = chart.gen("xi0")
        assert (xi * xi * xi).is_zero()
        assert not (xi * xi).is_zero()

    def test_require_order(self):
        """Test that checks can demand a minimum order."""
        chart = JetChart(1, order=2)
        with pytest.raises(InsufficientOrderError):
            chart.require_order(3, "cubic jets")

    def test_coordinate_groups(self):
        """Test the coordinate groups of a graded chart."""
        chart = JetChart(2, anti_dimension=1, fiber_degrees=(0, 1))
        assert len(chart.base_coords) == 2 + 1 + 2
        assert len(chart.flat_coords) == 2 + 2


class TestConnectionData:
    """Tests for validating connection data."""

    def test_torsion_raises(self):
        """Test that asymmetric symbols are rejected."""
        space = base_space(2)
        gamma = [[[0, 1], [0, 0]], [[0, 0], [0, 0]]]
        with pytest.raises(ConnectionDataError, match="torsion"):
            ConnectionData(space, gamma)

    def test_text_entries(self):
        """Test that entries may be written as polynomial text."""
        space = base_space(1)
        cd = ConnectionData(space, [[["1/2 * y0"]]])
        assert cd.gamma[0][0][0] == space.gen("y0").scale(Fraction(1, 2))

    def test_mixed_fiber_degrees_raise(self):
        """Test that the bundle connection preserves fibre degrees."""
        space = base_space(1)
        with pytest.raises(ConnectionDataError):
            ConnectionData(
                space, [[[0]]], bundle=[[[0, 1], [0, 0]]], fiber_degrees=(0, 1)
            )

    def test_degenerate_vielbein_raises(self):
        """Test that the frame must be invertible at the base point."""
        space = base_space(2)
        gamma = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
        with pytest.raises(ConnectionDataError):
            ConnectionData(space, gamma, vielbein=[[1, 0], [1, 0]])

    def test_form_must_be_parallel(self):
        """Test that a connection not preserving the form is rejected."""
        space = base_space(2)
        gamma = [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]
        with pytest.raises(ConnectionDataError, match="symplectic form"):
            ConnectionData(space, gamma, omega=darboux_form(2))

    def test_odd_symplectic_dimension(self):
        """Test that the Darboux form needs an even dimension."""
        with pytest.raises(ConnectionDataError):
            darboux_form(3)

    def test_chart_must_match(self, rng):
        """Test that maps refuse charts of another dimension."""
        cd = random_connection(2, rng)
        with pytest.raises(ConnectionDataError):
            exp_geodesic(cd, JetChart(3))


class TestExponentialMaps:
    """Tests for geodesic, frame, symplectic and graded exponential maps."""

    def test_flat_geodesic_is_translation(self):
        """Test that vanishing symbols give phi = y + xi."""
        cd = flat_connection(2)
        chart = chart_for(cd)
        phi = exp_geodesic(cd, chart)
        assert phi.offsets() == [chart.gen(x) for x in chart.xi]

    def test_geodesic_matches_oracle(self, rng):
        """Test the Taylor recursion against a time-dependent geodesic."""
        cd = random_connection(2, rng)
        timed = chart_for(cd, extra=("t",))
        report = compare(
            "geodesic oracle",
            exp_geodesic(cd, timed).body,
            geodesic_oracle(cd, timed),
        )
        assert report.passed

    def test_geodesic_expansion(self, rng):
        """Test the closed expansion of the geodesic map through xi^3."""
        cd = random_connection(2, rng)
        chart = chart_for(cd)
        report = compare(
            "geodesic expansion",
            exp_geodesic(cd, chart).body,
            geodesic_formula(cd, chart),
            xi_limit=3,
        )
        assert report.passed

    def test_orthonormal_matches_flow(self, rng):
        """Test the frame exponential map against its flow oracle."""
        cd = random_vielbein(random_connection(2, rng), rng)
        timed = chart_for(cd, extra=("t",))
        report = compare(
            "flow oracle", exp_orthonormal(cd, timed).body, flow_oracle(cd, timed)
        )
        assert report.passed

    def test_orthonormal_expansion(self, rng):
        """Test the closed expansion of the frame exponential map."""
        cd = random_vielbein(random_connection(2, rng), rng)
        chart = chart_for(cd)
        report = compare(
            "flow expansion",
            exp_orthonormal(cd, chart).body,
            orthonormal_formula(cd, chart),
            xi_limit=3,
        )
        assert report.passed

    def test_symplectic_expansion(self, rng):
        """Test the symplectic exponential map through xi^3."""
        cd = random_symplectic_connection(2, rng, constant=False)
        chart = chart_for(cd)
        report = compare(
            "symplectic expansion",
            exp_symplectic(cd, chart).body,
            symplectic_formula(cd, chart),
            xi_limit=3,
        )
        assert report.passed

    def test_transport_matches_oracle(self, rng):
        """Test the transport matrix against the transport ODE."""
        cd = random_bundle(random_connection(2, rng), rng)
        timed = chart_for(cd, extra=("t",))
        report = compare_matrices(
            "transport oracle",
            exp_graded(cd, timed).transport,
            transport_oracle(cd, exp_geodesic(cd, timed)),
        )
        assert report.passed

    def test_transport_expansion_on_flat_base(self, rng):
        """Test the transport expansion when the base connection vanishes."""
        cd = random_bundle(flat_connection(2), rng)
        chart = chart_for(cd)
        report = compare_matrices(
            "transport expansion",
            exp_graded(cd, chart).transport,
            transport_formula(cd, chart),
            xi_limit=3,
        )
        assert report.passed


class TestGrothendieckConnection:
    """Tests for flatness of the Grothendieck connection."""

    def test_flat_for_geodesic_map(self, rng):
        """Test that the connection of the geodesic map is flat."""
        cd = random_connection(2, rng)
        report = check_flatness(grothendieck(exp_geodesic(cd, chart_for(cd))))
        assert report.passed

    def test_flat_for_graded_map(self, rng):
        """Test flatness with a graded bundle of mixed fibre degrees."""
        cd = random_bundle(random_connection(2, rng), rng, fiber_degrees=(0, 1))
        report = check_flatness(grothendieck(exp_graded(cd, chart_for(cd))))
        assert report.passed

    def test_report_summary(self, rng):
        """Test that a passing report states the orders it reached."""
        cd = random_connection(2, rng)
        report = check_flatness(grothendieck(exp_geodesic(cd, chart_for(cd))))
        assert report.summary().startswith(f"{report.name}: ok through xi^")
        assert report.first_residual() == "0"
