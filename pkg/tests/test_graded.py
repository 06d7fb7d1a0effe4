"""Tests for the graded polynomial algebra."""

from fractions import Fraction

import pytest

from app.core.exceptions import (
    NotSymplecticError,
    SingularMatrixError,
    SpaceMismatchError,
    SymplecticFormError,
)
from app.core.graded import (
    GradedPoly,
    GradedSpace,
    MatPoly,
    flat_monomials,
    format_fraction,
    hamiltonian_lift,
    hamiltonian_vector_field,
    poisson_bracket,
    random_poly,
    rational_inverse,
    to_fraction,
)


@pytest.fixture
def plane():
    """Even Darboux plane with coordinates x, p."""
    return GradedSpace([("x", 0), ("p", 0)], symplectic=[[0, 1], [-1, 0]])


@pytest.fixture
def odd_pair():
    """Two odd generators of degree 1 paired in degree 2."""
    return GradedSpace(
        [("t1", 1), ("t2", 1)], symplectic=[[1, 0], [0, 1]], form_degree=2
    )


class TestRationals:
    """Tests for exact rational parsing and printing."""

    @pytest.mark.parametrize(
        ("value", "expected"),
        [("3/2", Fraction(3, 2)), (" -4 ", Fraction(-4)), (7, Fraction(7))],
    )
    def test_to_fraction(self, value, expected):
        """Test that integers and num/den strings parse exactly."""
        assert to_fraction(value) == expected

    def test_rejects_floats_in_text(self):
        """Test that decimal text is not an exact rational."""
        with pytest.raises(ValueError):
            to_fraction("1.5")

    def test_rejects_booleans(self):
        """Test that booleans are not accepted as rationals."""
        with pytest.raises(TypeError):
            to_fraction(True)

    def test_format(self):
        """Test that rationals print as num/den and integers bare."""
        assert format_fraction(Fraction(-3, 2)) == "-3/2"
        assert format_fraction(Fraction(4)) == "4"

    def test_inverse(self):
        """Test exact inversion of the Darboux form."""
        assert rational_inverse([[0, 1], [-1, 0]]) == ((0, -1), (1, 0))

    def test_singular_inverse_raises(self):
        """Test that a singular matrix raises SingularMatrixError."""
        with pytest.raises(SingularMatrixError):
            rational_inverse([[1, 2], [2, 4]])


class TestGradedSpace:
    """Tests for graded spaces and their forms."""

    def test_duplicate_names_raise(self):
        """Test that generator names must be unique."""
        with pytest.raises(ValueError):
            GradedSpace([("x", 0), ("x", 1)])

    def test_odd_form_degree_raises(self):
        """Test that the form degree must be even."""
        with pytest.raises(SymplecticFormError):
            GradedSpace([("x", 0)], form_degree=1)

    def test_form_not_antisymmetric_raises(self):
        """Test that an even form must be antisymmetric."""
        with pytest.raises(SymplecticFormError):
            GradedSpace([("x", 0), ("p", 0)], symplectic=[[0, 1], [1, 0]])

    def test_degenerate_form_raises(self):
        """Test that a degenerate form raises SymplecticFormError."""
        with pytest.raises(SymplecticFormError):
            GradedSpace([("x", 0), ("p", 0)], symplectic=[[0, 0], [0, 0]])

    def test_form_degree_mismatch_raises(self):
        """Test that the form pairs generators whose degrees sum to n."""
        with pytest.raises(SymplecticFormError):
            GradedSpace(
                [("x", 0), ("p", 0)], symplectic=[[0, 1], [-1, 0]], form_degree=2
            )

    def test_parameters_are_not_flat(self):
        """Test that parameters are excluded from the flat generators."""
        space = GradedSpace([("x", 0), ("eps", 0, True)])
        assert space.flat == (0,)
        assert space.flat_dimension == 1


class TestGradedPoly:
    """Tests for graded-commutative arithmetic."""

    def test_odd_generators_anticommute(self, odd_pair):
        """Test that odd generators anticommute and square to zero."""
        t1, t2 = odd_pair.gen("t1"), odd_pair.gen("t2")
        assert t1 * t2 == -(t2 * t1)
        assert (t1 * t1).is_zero()

    def test_even_generators_commute(self, plane):
        """Test that even generators commute."""
        x, p = plane.gen("x"), plane.gen("p")
        assert x * p == p * x

    def test_left_derivative_sign(self, odd_pair):
        """Test that the left derivative moves the generator to the front."""
        t1, t2 = odd_pair.gen("t1"), odd_pair.gen("t2")
        assert (t2 * t1).derivative("t1") == -t2

    def test_even_derivative(self, plane):
        """Test the power rule on an even generator."""
        x = plane.gen("x")
        assert (x**3).derivative("x") == x * x * 3

    def test_from_text(self, plane):
        """Test that text terms parse into the same polynomial."""
        x, p = plane.gen("x"), plane.gen("p")
        parsed = GradedPoly.from_text(plane, "1/2 * x^2; 3 * p\n-1")
        assert parsed == x * x / 2 + p * 3 - 1

    def test_from_text_unknown_generator(self, plane):
        """Test that unknown generators are rejected."""
        with pytest.raises(ValueError):
            GradedPoly.from_text(plane, "2 * q")

    def test_to_text(self, plane):
        """Test that text output orders terms by flat degree."""
        x, p = plane.gen("x"), plane.gen("p")
        assert (x * p + 2).to_text(separator=" + ") == "2 + 1 * x * p"

    def test_space_mismatch(self, plane, odd_pair):
        """Test that adding polynomials on different spaces raises."""
        with pytest.raises(SpaceMismatchError):
            plane.gen("x") + odd_pair.gen("t1")

    def test_truncation_drops_high_degrees(self, plane):
        """Test that products respect the truncation of their factors."""
        x = plane.gen("x").truncate(2)
        assert (x * x * x).is_zero()
        assert not (x * x).is_zero()

    def test_substitute(self, plane):
        """Test substituting a generator by a polynomial."""
        x, p = plane.gen("x"), plane.gen("p")
        assert (x * x).substitute({0: x + p}) == x * x + x * p * 2 + p * p

    def test_degree_of_inhomogeneous_raises(self, odd_pair):
        """Test that mixed degrees have no single degree."""
        with pytest.raises(ValueError):
            _ = (odd_pair.gen("t1") + 1).degree


class TestPoissonBracket:
    """Tests for the Poisson bracket of the constant form."""

    def test_generators_pair_through_inverse_form(self, plane):
        """Test that {xi^A, xi^B} is the inverse form."""
        gens = plane.flat_generator_polys()
        for a, ga in enumerate(gens):
            for b, gb in enumerate(gens):
                assert poisson_bracket(ga, gb) == plane.omega_inverse[a][b]

    def test_antisymmetry(self, plane, rng):
        """Test that the bracket of even polynomials is antisymmetric."""
        f = random_poly(plane, rng, (1, 2, 3))
        g = random_poly(plane, rng, (1, 2, 3))
        assert poisson_bracket(f, g) == -poisson_bracket(g, f)

    def test_jacobi(self, plane, rng):
        """Test the Jacobi identity on random even polynomials."""
        f, g, h = (random_poly(plane, rng, (1, 2, 3)) for _ in range(3))
        left = poisson_bracket(f, poisson_bracket(g, h))
        right = poisson_bracket(poisson_bracket(f, g), h) + poisson_bracket(
            g, poisson_bracket(f, h)
        )
        assert left == right

    def test_requires_form(self):
        """Test that a space without a form has no bracket."""
        space = GradedSpace([("x", 0)])
        with pytest.raises(SymplecticFormError):
            poisson_bracket(space.gen("x"), space.gen("x"))


class TestHamiltonianLift:
    """Tests for lifting symplectic vector fields to Hamiltonians."""

    def test_lift_recovers_hamiltonian(self, plane, rng):
        """Test that lifting a Hamiltonian field returns its Hamiltonian."""
        f = random_poly(plane, rng, (1, 2, 3))
        assert hamiltonian_lift(hamiltonian_vector_field(f)) == f

    def test_non_symplectic_field_raises(self, plane):
        """Test that a field with divergence has no lift."""
        x = plane.gen("x")
        with pytest.raises(NotSymplecticError):
            hamiltonian_lift([x, plane.zero()])

    def test_component_count_must_match(self, plane):
        """Test that the field needs one component per flat generator."""
        with pytest.raises(SpaceMismatchError):
            hamiltonian_lift([plane.gen("x")])


class TestMatPoly:
    """Tests for matrix-valued polynomials."""

    def test_supertrace(self, plane):
        """Test that odd fiber directions enter the trace with a minus sign."""
        fiber = GradedSpace([("z1", 0), ("z2", 1)])
        matrix = MatPoly.from_rationals(fiber, plane, [[3, 0], [0, 5]])
        assert matrix.trace() == -2

    def test_matmul(self, plane):
        """Test the product of constant matrices."""
        fiber = GradedSpace([("z1", 0), ("z2", 0)])
        a = MatPoly.from_rationals(fiber, plane, [[1, 2], [0, 1]])
        b = MatPoly.from_rationals(fiber, plane, [[1, -2], [0, 1]])
        assert a @ b == MatPoly.from_rationals(fiber, plane, [[1, 0], [0, 1]])

    def test_linear(self, plane):
        """Test that linear matrices pair generators with constant matrices."""
        fiber = GradedSpace([("z1", 0)])
        matrix = MatPoly.linear(fiber, plane, [[[2]], [[-1]]])
        assert matrix.entry(0, 0) == plane.gen("x") * 2 - plane.gen("p")

    def test_shape_mismatch_raises(self, plane):
        """Test that the entries must match the fiber dimension."""
        fiber = GradedSpace([("z1", 0), ("z2", 0)])
        with pytest.raises(SpaceMismatchError):
            MatPoly(fiber, plane, [[plane.zero()]])


class TestRandomData:
    """Tests for monomial enumeration and random polynomials."""

    def test_odd_squares_are_skipped(self, odd_pair):
        """Test that odd generators appear at most once in a monomial."""
        assert list(flat_monomials(odd_pair, 2)) == [(1, 1)]

    def test_homogeneous_random_poly(self, odd_pair, rng):
        """Test that a total degree makes the result homogeneous."""
        poly = random_poly(odd_pair, rng, (1, 2), total_degree=2)
        assert poly
        assert poly.degree == 2
