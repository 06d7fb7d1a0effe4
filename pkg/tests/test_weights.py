"""Tests for Lie-algebra and Rozansky-Witten weight systems."""

from fractions import Fraction

import pytest

from app.core.correspondence import beta_dagger, theta_cochain
from app.core.exceptions import HomogeneityError, LieDataError, RWDataError
from app.core.graphs import NAMED_GRAPHS, parse_chain
from app.core.weights import (
    BUILTIN_LIE_DATA,
    LieData,
    RWData,
    abelian,
    casimirs,
    equivariant_rw_chain,
    equivariant_rw_class,
    is_closed,
    lie_closed_form,
    lie_weights,
    pair_with_diagram,
    rw_chain,
    rw_weights,
    so3_vector,
    su2_adjoint,
    su2_fundamental,
    vertex_chain,
    weight_table,
)

NAMED = ("Gamma4", "Gamma5", "Gamma6", "Gamma7")


@pytest.fixture(scope="module")
def su2_weights():
    return lie_weights(su2_fundamental(), 4)


def rw_data(**overrides) -> RWData:
    fields = {
        "omega": [[0, 1], [-1, 0]],
        "curvature": [
            [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
            [[[0, "1/2"], ["1/2", 0]], [["1/2", 0], [0, 0]]],
        ],
    }
    fields.update(overrides)
    return RWData(**fields)


class TestLieData:
    """Tests for validating Lie algebra data."""

    def test_structure_constants_from_commutators(self):
        """Test that [h, e] = 2e is read off the matrices."""
        data = su2_fundamental()
        f = data.structure_constants
        assert f[1][0][1] == 2
        assert f[1][1][0] == -2
        assert f[0][1][2] == 1

    def test_trace_form(self):
        """Test that the trace form pairs h with h and e with f."""
        assert su2_fundamental().killing == ((2, 0, 0), (0, 0, 1), (0, 1, 0))

    def test_span_not_closed_raises(self):
        """Test that e and f alone do not close under the commutator."""
        with pytest.raises(LieDataError):
            LieData.from_matrices([[[0, 1], [0, 0]], [[0, 0], [1, 0]]])

    def test_dependent_matrices_raise(self):
        """Test that a repeated generator is rejected."""
        with pytest.raises(LieDataError):
            LieData.from_matrices([[[1, 0], [0, -1]], [[2, 0], [0, -2]]])

    def test_degenerate_trace_form_raises(self):
        """Test that a nilpotent generator has a degenerate trace form."""
        with pytest.raises(LieDataError):
            LieData.from_matrices([[[0, 1], [0, 0]]])

    def test_wrong_killing_form_raises(self):
        """Test that a supplied trace form must equal Tr(T_a T_b)."""
        data = abelian(1)
        with pytest.raises(LieDataError):
            LieData(data.structure_constants, data.representation, ((2,),))

    def test_non_antisymmetric_constants_raise(self):
        """Test that f^c_ab must be antisymmetric in a and b."""
        with pytest.raises(LieDataError):
            LieData((((1,),),), (((1,),),))

    @pytest.mark.parametrize("name", sorted(BUILTIN_LIE_DATA))
    def test_builtin_data_is_valid(self, name):
        """Test that every built-in data set validates."""
        assert BUILTIN_LIE_DATA[name]().dimension >= 1


class TestCasimirs:
    """Tests for Casimir invariants."""

    def test_su2_fundamental(self):
        """Test the Casimirs of the defining representation."""
        cas = casimirs(su2_fundamental())
        assert cas.c2_r == Fraction(3, 2)
        assert cas.rep_casimir_squared_trace == Fraction(9, 2)
        assert cas.adjoint_casimir_trace == 12

    def test_closed_form_values(self):
        """Test the predicted coefficients for the defining representation."""
        assert lie_closed_form(su2_fundamental()) == {
            "Gamma4": Fraction(-9, 4),
            "Gamma5": Fraction(3, 8),
            "Gamma6": Fraction(2),
            "Gamma7": Fraction(-3),
        }

    def test_abelian_has_no_adjoint_part(self):
        """Test that commuting generators have vanishing adjoint Casimir."""
        cas = casimirs(abelian(2))
        assert cas.adjoint_casimir_trace == 0
        assert cas.c2_r == 1


class TestLieWeights:
    """Tests for the Lie-algebra weight system at m = 4."""

    @pytest.mark.parametrize("name", NAMED)
    def test_matches_closed_form(self, name, su2_weights):
        """Test that computed coefficients equal the Casimir prediction."""
        expected = lie_closed_form(su2_fundamental())[name]
        assert su2_weights.coefficient(NAMED_GRAPHS[name]) == expected

    def test_weights_are_closed(self, su2_weights):
        """Test that the weight chain has zero graph boundary."""
        assert is_closed(su2_weights)

    def test_abelian_kills_internal_vertices(self):
        """Test that zero structure constants leave only chord diagrams."""
        weights = lie_weights(abelian(2), 4)
        assert weights.coefficient(NAMED_GRAPHS["Gamma6"]) == 0
        assert weights.coefficient(NAMED_GRAPHS["Gamma7"]) == 0
        assert weights.coefficient(NAMED_GRAPHS["Gamma4"]) == -1

    def test_isomorphic_algebras_are_proportional(self):
        """Test that su2 adjoint and so3 vector give proportional weights."""
        left = lie_weights(su2_adjoint(), 4)
        right = lie_weights(so3_vector(), 4)
        base = NAMED_GRAPHS["Gamma4"]
        for name in NAMED:
            graph = NAMED_GRAPHS[name]
            assert left.coefficient(graph) * right.coefficient(base) == (
                right.coefficient(graph) * left.coefficient(base)
            )

    def test_vertex_chain_rejects_non_cubic_theta(self):
        """Test that the internal vertex must be cubic."""
        data = su2_fundamental()
        space = data.space()
        quadratic = space.gen(0) * space.gen(1)
        with pytest.raises(HomogeneityError):
            vertex_chain(quadratic, data.peripheral(space), 4)

    def test_vertex_chain_is_empty_at_zero(self):
        """Test that m = 0 gives no chains."""
        data = su2_fundamental()
        assert vertex_chain(data.theta(), data.peripheral(), 0) == []


class TestWeightTable:
    """Tests for labelled weight rows."""

    def test_rows_use_catalog_names(self, su2_weights):
        """Test that named graphs are labelled by their catalog names."""
        rows = weight_table(su2_weights)
        assert [row.label for row in rows] == list(NAMED)
        by_label = {row.label: row for row in rows}
        assert by_label["Gamma6"].value_text() == "2"
        assert by_label["Gamma5"].value_text() == "3/8"

    def test_pair_with_diagram(self, su2_weights):
        """Test that pairing with a diagram reads off its weight."""
        result = pair_with_diagram(su2_weights, parse_chain("Gamma7"))
        assert result.label == "Gamma7"
        assert result.value == -3


class TestRWData:
    """Tests for Rozansky-Witten data."""

    def test_odd_dimension_raises(self):
        """Test that the holomorphic form needs an even dimension."""
        with pytest.raises(RWDataError):
            rw_data(omega=[[0]], curvature=[])

    def test_degenerate_form_raises(self):
        """Test that a degenerate holomorphic form is rejected."""
        with pytest.raises(RWDataError):
            rw_data(omega=[[0, 0], [0, 0]])

    def test_curvature_must_be_symmetric(self):
        """Test that R_ib ijk must be symmetric in i, j, k."""
        with pytest.raises(RWDataError):
            rw_data(curvature=[[[[0, 1], [0, 0]], [[0, 0], [0, 0]]]])

    def test_truncation_below_cubic_raises(self):
        """Test that jets truncated below order 3 are rejected."""
        with pytest.raises(RWDataError):
            rw_data(truncation_order=2)

    def test_bundle_rows_must_match(self):
        """Test that the bundle curvature needs one row per direction."""
        with pytest.raises(RWDataError):
            rw_data(bundle_curvature=[[[[1]], [[0]]]])

    def test_space_layout(self):
        """Test that v directions are odd parameters after the xi."""
        space = rw_data().space()
        assert space.flat_dimension == 2
        assert space.degrees == (0, 0, 1, 1)

    def test_theta_is_linear_in_v(self):
        """Test that every term of v Theta carries exactly one v."""
        theta = rw_data().theta()
        assert theta
        assert theta.flat_degrees() == {3}

    def test_weights_vanish_beyond_anti_dimension(self):
        """Test that more than two odd v factors vanish."""
        assert rw_weights(rw_data(), 3).is_zero()

    def test_no_bundle_has_no_peripheral(self):
        """Test that without bundle jets there is no peripheral vertex."""
        assert rw_data().peripheral() is None


ZERO_CUBIC = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
FLAT_CURVATURE = [ZERO_CUBIC, ZERO_CUBIC]


def cube(axis: int) -> list:
    """C_ijk = 1 exactly when i = j = k = axis."""
    return [
        [[int(i == j == k == axis) for k in range(2)] for j in range(2)]
        for i in range(2)
    ]


class TestEquivariantClasses:
    """Tests for trivalent cocycles evaluated on Theta + M."""

    def test_moments_must_be_symmetric(self):
        """Test that a non-symmetric moment hessian is rejected."""
        with pytest.raises(RWDataError, match="hessian"):
            rw_data(moments=[([[0, 1], [0, 0]], ZERO_CUBIC)])

    def test_space_appends_g_parameters(self):
        """Test that each moment map adds one odd l after the v directions."""
        data = rw_data(moments=[([[1, 0], [0, 0]], ZERO_CUBIC)])
        assert data.equivariant_space().degrees == (0, 0, 1, 1, 1)
        assert data.moment().flat_degrees() == {2}

    def test_without_moments_is_the_rw_class(self):
        """Test that no moment maps gives the plain theta class."""
        data = rw_data()
        expected = beta_dagger(theta_cochain(), rw_chain(data, 2))
        assert equivariant_rw_class(data) == expected

    def test_quadratic_moments_drop_out(self):
        """Test that moments without cubic jets do not reach trivalent vertices."""
        data = rw_data(
            curvature=FLAT_CURVATURE,
            moments=[([[1, 0], [0, 1]], ZERO_CUBIC), ([[0, 1], [1, 0]], ZERO_CUBIC)],
        )
        assert not equivariant_rw_class(data)

    def test_cubic_moments_give_pure_g_classes(self):
        """Test that a flat base leaves only the wedge^2 g* piece."""
        data = rw_data(
            curvature=FLAT_CURVATURE,
            moments=[([[0, 0], [0, 0]], cube(0)), ([[0, 0], [0, 0]], cube(1))],
        )
        value = equivariant_rw_class(data)
        assert value
        for mono in value.terms:
            assert mono[2:4] == (0, 0)
            assert mono[4:] == (1, 1)

    def test_v_part_is_the_rw_class(self):
        """Test that dropping every l term recovers the plain class."""
        plain = rw_data()
        data = rw_data(moments=[([[0, 0], [0, 0]], cube(0))])
        value = equivariant_rw_class(data)
        restricted = {
            mono[:4]: c for mono, c in value.terms.items() if not any(mono[4:])
        }
        expected = beta_dagger(theta_cochain(), rw_chain(plain, 2))
        assert restricted == dict(getattr(expected, "terms", {}))

    def test_chain_is_normalized(self):
        """Test that the chain carries 1/k! and k copies of Theta + M."""
        chain = equivariant_rw_chain(rw_data(), 3)
        assert chain.p == 3
        assert chain.coefficient == Fraction(1, 6)

    def test_mixed_cochain_raises(self):
        """Test that circle graphs are not accepted."""
        chord = parse_chain("graph I=0 P=2; E: p1->p2;")
        with pytest.raises(HomogeneityError):
            equivariant_rw_class(rw_data(), chord)
