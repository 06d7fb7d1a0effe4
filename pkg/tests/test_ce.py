"""Tests for the extended Chevalley-Eilenberg complex."""

from fractions import Fraction

import pytest

from app.core.ce import (
    CEChain,
    CECochain,
    CESum,
    check_action_composition,
    check_boundary_squared,
    ce_boundary,
    ce_coboundary_eval,
    random_chain,
    random_matpoly,
)
from app.core.exceptions import SpaceMismatchError
from app.core.graded import GradedSpace, flat_monomials, poisson_bracket, random_poly
from app.core.suites import FIBER, even_space, mixed_space, odd_space

SPACES = {"even": even_space, "odd": odd_space, "mixed": mixed_space}


def available_degrees(space, flat_degrees):
    monomials = (m for d in flat_degrees for m in flat_monomials(space, d))
    return sorted({space.monomial_degree(m) for m in monomials})


def homogeneous(space, rng, flat_degrees):
    degree = rng.choice(available_degrees(space, flat_degrees))
    return random_poly(space, rng, flat_degrees, 0.5, degree, max_terms=2)


class TestNormalForm:
    """Tests for normalized sums of chains."""

    def test_suspended_even_hamiltonians_anticommute(self, rng):
        """Test that swapping two degree-1 suspended entries flips the sign."""
        space = even_space()
        f = random_poly(space, rng, (2,), total_degree=0, max_terms=1)
        g = random_poly(space, rng, (3,), total_degree=0, max_terms=1)
        forward = CESum.from_chains(space, [CEChain(space, (f, g))])
        backward = CESum.from_chains(space, [CEChain(space, (g, f))])
        assert forward == backward.scale(-1)
        assert not forward.is_zero()

    def test_repeated_odd_entry_vanishes(self, rng):
        """Test that an odd suspended entry repeated twice vanishes."""
        space = even_space()
        f = space.gen("x1") * space.gen("x2")
        assert CESum.from_chains(space, [CEChain(space, (f, f))]).is_zero()

    def test_coefficient_is_linear(self, rng):
        """Test that sums scale with the chain coefficient."""
        space = odd_space()
        chain = random_chain(space, rng, 2, 1, FIBER)
        once = CESum.from_chains(space, [chain])
        thrice = CESum.from_chains(space, [chain.scaled(3)])
        assert thrice == once.scale(3)

    def test_zero_entry_makes_zero_chain(self):
        """Test that a zero Hamiltonian makes the chain zero."""
        space = even_space()
        assert CEChain(space, (space.zero(), space.gen("x1"))).is_zero()

    def test_space_mismatch(self):
        """Test that entries must live on the chain's space."""
        other = GradedSpace([("y", 0)])
        with pytest.raises(SpaceMismatchError):
            CEChain(even_space(), (other.gen("y"),))

    def test_homogeneous_components_cover_the_chain(self, rng):
        """Test that splitting by degree preserves the normalized sum."""
        space = mixed_space()
        f = space.gen("q") * space.gen("p") + space.gen("a")
        g = space.gen("q") ** 2 + space.gen("p")
        chain = CEChain(space, (f, g))
        parts = list(chain.homogeneous_components())
        assert len(parts) == 4
        assert CESum.from_chains(space, parts) == CESum.from_chains(space, [chain])


class TestBoundary:
    """Tests for the boundary operator."""

    @pytest.mark.parametrize("label", sorted(SPACES))
    @pytest.mark.parametrize(("p", "q"), [(2, 0), (3, 0), (1, 1), (2, 1), (0, 2)])
    def test_boundary_squares_to_zero(self, label, p, q, rng):
        """Test that the boundary applied twice vanishes."""
        space = SPACES[label]()
        chain = random_chain(space, rng, p, q, FIBER)
        assert check_boundary_squared(chain).is_zero()

    def test_single_hamiltonian_has_no_internal_boundary(self, rng):
        """Test that a chain with one Hamiltonian and no bar is a cycle."""
        space = even_space()
        chain = CEChain(space, (random_poly(space, rng, (2,), total_degree=0),))
        assert ce_boundary(chain).is_zero()

    def test_boundary_of_sum_is_linear(self, rng):
        """Test that the boundary of a sum is the sum of boundaries."""
        space = odd_space()
        a = random_chain(space, rng, 2, 0)
        b = random_chain(space, rng, 2, 0)
        total = CESum.from_chains(space, [a, b])
        assert ce_boundary(total) == ce_boundary(a) + ce_boundary(b)


class TestBarAction:
    """Tests for the action of Hamiltonians on bar words."""

    @pytest.mark.parametrize("label", sorted(SPACES))
    def test_action_composes_through_bracket(self, label, rng):
        """Test that acting twice differs from the bracket by the graded swap."""
        space = SPACES[label]()
        u = homogeneous(space, rng, (2, 3))
        v = homogeneous(space, rng, (2, 3))
        degrees = available_degrees(space, (1, 2))
        bar = [
            random_matpoly(FIBER, space, rng, rng.choice(degrees)) for _ in range(2)
        ]
        assert check_action_composition(u, v, bar).is_zero()


class TestCochains:
    """Tests for extensional cochains."""

    def test_cochain_is_linear_in_the_coefficient(self, rng):
        """Test that evaluation scales with the chain coefficient."""
        space = even_space()
        counter = CECochain(lambda chain: Fraction(chain.p), degree=0, name="p")
        chain = random_chain(space, rng, 2, 0)
        assert counter(chain.with_coefficient(5)) == 5 * counter(
            chain.with_coefficient(1)
        )

    def test_zero_chain_evaluates_to_zero(self):
        """Test that cochains vanish on zero chains."""
        space = even_space()
        counter = CECochain(lambda chain: Fraction(1), degree=0)
        assert counter(CEChain(space, (space.zero(),))) == 0


class TestCoboundary:
    """Tests for the module term of the coboundary."""

    def test_polynomial_values_are_acted_on(self):
        """Test that a polynomial-valued cochain picks up the bracket term."""
        space = even_space()
        f, g = space.gen("x1"), space.gen("x2") ** 2
        c = CECochain(lambda chain: g if chain.p == 0 else Fraction(0), degree=0)
        value = ce_coboundary_eval(c, CEChain(space, (f,)))
        assert value == -poisson_bracket(f, g)
        assert value != 0

    def test_rational_values_form_the_trivial_module(self):
        """Test that Hamiltonians act by zero on rational-valued cochains."""
        space = even_space()
        c = CECochain(lambda chain: Fraction(3) if chain.p == 0 else 0, degree=0)
        assert ce_coboundary_eval(c, CEChain(space, (space.gen("x1"),))) == 0
