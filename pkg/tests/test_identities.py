"""Tests for the identities checked on jets."""

from pathlib import Path

import pytest

from app.core.exceptions import ConnectionDataError, InsufficientOrderError
from app.core.identities import (
    check_equivariance,
    check_hamiltonian_key_identity,
    check_key_identity,
    check_neat_relation,
    check_qhat_formula,
    check_qhat_mc,
    check_rw_maurer_cartan,
    check_rw_truncations,
    check_symplectic_pullback,
    check_variation,
    gradient_field,
    linear_part_algebra,
    rw_jets,
    tangent_connection,
)
from app.core.jets import (
    JetChart,
    exp_orthonormal,
    exp_symplectic,
    flat_connection,
    grothendieck,
    grothendieck_hamiltonians,
    hat,
    random_base_poly,
    random_bundle,
    random_christoffel,
    random_connection,
    random_symplectic_connection,
    random_vector_field,
    random_vielbein,
)
from app.core.weights import RWData
from app.schemas.manifest import load_manifest

MANIFESTS = Path(__file__).resolve().parents[1] / "data" / "manifests"


def chart_for(cd, order=3):
    return JetChart.for_connection(cd, order=order, base_order=1)


class TestKeyIdentity:
    """Tests for the hat map identity on vector fields."""

    def test_geodesic(self, rng):
        """Test the identity for the geodesic exponential map."""
        cd = random_connection(2, rng)
        u, v = random_vector_field(cd, rng), random_vector_field(cd, rng)
        assert check_key_identity(cd, u, v, chart_for(cd)).passed

    def test_orthonormal(self, rng):
        """Test the identity for the frame exponential map."""
        cd = random_vielbein(random_connection(2, rng), rng)
        u, v = random_vector_field(cd, rng), random_vector_field(cd, rng)
        report = check_key_identity(cd, u, v, chart_for(cd), exp_orthonormal)
        assert report.passed

    def test_hamiltonian(self, rng):
        """Test the identity on lifted Hamiltonians."""
        cd = random_symplectic_connection(2, rng, constant=False)
        f = random_base_poly(cd.space, rng, degree=2)
        h = random_base_poly(cd.space, rng, degree=2)
        assert check_hamiltonian_key_identity(cd, f, h, chart_for(cd)).passed


class TestSymplecticJets:
    """Tests for the symplectic exponential map and its connection."""

    def test_pullback_preserves_form(self, rng):
        """Test that the map pulls the form back to itself."""
        cd = random_symplectic_connection(2, rng, constant=False)
        assert check_symplectic_pullback(cd, chart_for(cd)).passed

    def test_pullback_needs_form(self, rng):
        """Test that the pullback check needs a symplectic form."""
        cd = random_connection(2, rng)
        with pytest.raises(ConnectionDataError):
            check_symplectic_pullback(cd, chart_for(cd))

    def test_connection_rows_have_hamiltonians(self, rng):
        """Test that every connection row lifts to a Hamiltonian."""
        cd = random_symplectic_connection(2, rng, constant=False)
        connection = grothendieck(exp_symplectic(cd, chart_for(cd)))
        assert len(grothendieck_hamiltonians(connection)) == 2

    def test_gradient_hat_is_symplectic(self, rng):
        """Test that the hat of a gradient field is linear symplectic at x0."""
        cd = random_symplectic_connection(2, rng, constant=False)
        phi = exp_symplectic(cd, chart_for(cd))
        connection = grothendieck(phi)
        f = random_base_poly(cd.space, rng, degree=3, constant=False)
        lifted = hat(gradient_field(cd, f), phi, connection)
        kinds = linear_part_algebra([c.at_base() for c in lifted], cd.omega)
        assert "sp" in kinds
        assert kinds[0] == "gl"


class TestVariation:
    """Tests for variations of the connection data."""

    def test_metric_variation(self, rng):
        """Test the variation of phi under a change of symbols."""
        cd = random_connection(2, rng)
        gamma = random_christoffel(cd.space, 2, rng)
        u = random_vector_field(cd, rng)
        assert check_variation(cd, gamma=gamma, u=u, order=3, base_order=1).passed

    def test_equivariance(self, rng):
        """Test that a coordinate change vanishing at x0 acts to first order."""
        cd = random_connection(2, rng)
        v = random_vector_field(cd, rng, vanishing=True)
        assert check_equivariance(cd, v, 3, 1).passed


class TestShiftedTangent:
    """Tests for the lifted differential on T[1]M."""

    def test_expansion(self, rng):
        """Test the closed expansion of the lifted differential."""
        tangent = tangent_connection(random_connection(2, rng, constant=False))
        assert check_qhat_formula(tangent, chart_for(tangent)).passed

    def test_square(self, rng):
        """Test the Maurer-Cartan relation of the lifted differential."""
        tangent = tangent_connection(random_connection(2, rng, constant=False))
        assert check_qhat_mc(tangent, chart_for(tangent)).passed


class TestHolomorphicJets:
    """Tests for the holomorphic symplectic jets."""

    def test_truncations(self, rng):
        """Test Theta at x0 against its leading Taylor coefficients."""
        cd = random_symplectic_connection(2, rng, constant=False, anti_dimension=2)
        for report in check_rw_truncations(cd, chart_for(cd)):
            assert report.passed, report.summary()

    def test_maurer_cartan(self, rng):
        """Test the holomorphic Maurer-Cartan relation."""
        cd = random_symplectic_connection(2, rng, constant=False, anti_dimension=2)
        assert check_rw_maurer_cartan(cd, chart_for(cd)).passed

    def test_bundle_relation(self, rng):
        """Test the bundle jet relation on a flat symplectic base."""
        base = flat_connection(2, 2, symplectic=True)
        cd = random_bundle(base, rng, fiber_degrees=(0,))
        assert check_neat_relation(cd, chart_for(cd)).passed

    def test_needs_cubic_order(self, rng):
        """Test that the jets need order 3 in xi."""
        cd = random_symplectic_connection(2, rng, anti_dimension=2)
        with pytest.raises(InsufficientOrderError):
            rw_jets(cd, chart_for(cd, order=2))

    def test_needs_anti_holomorphic_directions(self, rng):
        """Test that jets need anti-holomorphic base directions."""
        cd = random_symplectic_connection(2, rng)
        with pytest.raises(ConnectionDataError):
            rw_jets(cd, chart_for(cd))

    def test_manifest_jets_feed_rw_data(self):
        """Test that jets of the example manifest give RW tensors."""
        manifest = load_manifest(MANIFESTS / "symplectic_jets.json")
        cd = manifest.to_connection()
        jets = rw_jets(cd, chart_for(cd), manifest.to_moments(cd))
        assert len(jets.theta) == 2
        assert len(jets.moment) == 1
        data = RWData.from_jets(jets)
        assert data.dimension == 2
        assert data.anti_dimension == 2
