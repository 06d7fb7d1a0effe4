"""Graded polynomial algebra with exact rational coefficients.

Polynomials live on a ``GradedSpace``: an ordered list of generators with
non-negative degrees. Generators flagged as parameters behave as graded
coefficients; they are carried along in products and derivatives but never
enter the symplectic pairing. All derivatives are left derivatives and all
signs are Koszul signs computed by counting odd transpositions.
"""

from __future__ import annotations

import itertools
import logging
import random
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

import sympy

from app.core.exceptions import (
    NotSymplecticError,
    SingularMatrixError,
    SpaceMismatchError,
    SymplecticFormError,
)

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]
RationalMatrix = tuple[tuple[Fraction, ...], ...]

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


# =============================================================================
# Rational helpers
# =============================================================================


def to_fraction(value: object) -> Fraction:
    """Convert ints, strings like ``"3/2"`` and sympy rationals to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL_RE.match(text):
            raise ValueError(f"not an exact rational: {value!r}")
        return Fraction(text)
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_fraction(value: Fraction) -> str:
    """Render a rational as ``num/den`` (or ``num`` for integers)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_inverse(matrix: Sequence[Sequence[Fraction]]) -> RationalMatrix:
    """Invert a square rational matrix exactly.

    Raises:
        SingularMatrixError: If the matrix is not square or not invertible.
    """
    size = len(matrix)
    if size == 0:
        return ()
    if any(len(row) != size for row in matrix):
        raise SingularMatrixError("matrix is not square")
    m = sympy.Matrix(
        [[sympy.Rational(x.numerator, x.denominator) for x in row] for row in matrix]
    )
    if m.det() == 0:
        raise SingularMatrixError("matrix is singular")
    inv = m.inv()
    return tuple(
        tuple(to_fraction(inv[i, j]) for j in range(size)) for i in range(size)
    )


def small_rational(rng: random.Random) -> Fraction:
    """Draw a nonzero small-denominator rational."""
    return Fraction(rng.choice((-3, -2, -1, 1, 2, 3)), rng.choice((1, 1, 2, 3)))


# =============================================================================
# Graded space
# =============================================================================


@dataclass(frozen=True)
class Generator:
    """A generator of the graded polynomial algebra."""

    name: str
    degree: int
    parameter: bool = False

    @property
    def odd(self) -> bool:
        return self.degree % 2 == 1


class GradedSpace:
    """Ordered generators with an optional constant symplectic pairing.

    The pairing ``symplectic`` is indexed by the flat (non-parameter)
    generators in their order of appearance.
    """

    def __init__(
        self,
        generators: Iterable[Generator | tuple],
        symplectic: Sequence[Sequence[object]] | None = None,
        form_degree: int = 0,
    ) -> None:
        gens = tuple(
            g if isinstance(g, Generator) else Generator(*g) for g in generators
        )
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        for g in gens:
            if g.degree < 0:
                raise ValueError(f"generator {g.name} has negative degree")
        if form_degree < 0 or form_degree % 2:
            raise SymplecticFormError(
                f"form degree must be even and non-negative, got {form_degree}"
            )

        self.generators = gens
        self.form_degree = form_degree
        self.index = {g.name: i for i, g in enumerate(gens)}
        self.degrees = tuple(g.degree for g in gens)
        self.parities = tuple(g.degree % 2 for g in gens)
        self.odd = tuple(i for i, g in enumerate(gens) if g.odd)
        self.flat = tuple(i for i, g in enumerate(gens) if not g.parameter)
        self.flat_position = {i: k for k, i in enumerate(self.flat)}
        self._flat_mask = tuple(not g.parameter for g in gens)

        self.symplectic: RationalMatrix | None = None
        self.omega_inverse: RationalMatrix | None = None
        if symplectic is not None:
            self.symplectic = self._validate_form(symplectic)
            try:
                self.omega_inverse = rational_inverse(self.symplectic)
            except SingularMatrixError as e:
                raise SymplecticFormError("symplectic form is degenerate") from e

        self._key = (gens, self.symplectic, form_degree)
        self._hash = hash(self._key)

    def _validate_form(self, symplectic: Sequence[Sequence[object]]) -> RationalMatrix:
        size = len(self.flat)
        rows = tuple(tuple(to_fraction(x) for x in row) for row in symplectic)
        if len(rows) != size or any(len(row) != size for row in rows):
            raise SymplecticFormError(
                f"symplectic form must be {size}x{size} over the flat generators"
            )
        for a, ia in enumerate(self.flat):
            for b, ib in enumerate(self.flat):
                value = rows[a][b]
                if value and self.degrees[ia] + self.degrees[ib] != self.form_degree:
                    raise SymplecticFormError(
                        f"form pairs {self.generators[ia].name} and "
                        f"{self.generators[ib].name} whose degrees do not sum "
                        f"to {self.form_degree}"
                    )
                sign = -1 if self.parities[ia] and self.parities[ib] else 1
                if rows[b][a] != -sign * value:
                    raise SymplecticFormError(
                        "symplectic form is not graded antisymmetric at "
                        f"({self.generators[ia].name}, {self.generators[ib].name})"
                    )
        return rows

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, GradedSpace):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        gens = ", ".join(
            f"{g.name}:{g.degree}{'p' if g.parameter else ''}" for g in self.generators
        )
        return f"GradedSpace([{gens}], n={self.form_degree})"

    @property
    def dimension(self) -> int:
        return len(self.generators)

    @property
    def flat_dimension(self) -> int:
        return len(self.flat)

    def require_symplectic(self) -> None:
        """Raise unless the space carries a symplectic form."""
        if self.symplectic is None:
            raise SymplecticFormError("space carries no symplectic form")

    def monomial_degree(self, mono: Monomial) -> int:
        return sum(e * d for e, d in zip(mono, self.degrees) if e)

    def monomial_flat_degree(self, mono: Monomial) -> int:
        return sum(e for e, flat in zip(mono, self._flat_mask) if flat)

    def unit(self, index: int) -> Monomial:
        mono = [0] * len(self.generators)
        mono[index] = 1
        return tuple(mono)

    @property
    def origin(self) -> Monomial:
        return (0,) * len(self.generators)

    def gen(self, name: str | int) -> GradedPoly:
        """Return the generator as a polynomial."""
        index = name if isinstance(name, int) else self.index[name]
        return GradedPoly(self, {self.unit(index): Fraction(1)})

    def constant(self, value: object) -> GradedPoly:
        return GradedPoly(self, {self.origin: to_fraction(value)})

    def zero(self) -> GradedPoly:
        return GradedPoly(self)

    def flat_generator_polys(self) -> tuple[GradedPoly, ...]:
        return tuple(self.gen(i) for i in self.flat)


def monomial_product(
    space: GradedSpace, left: Monomial, right: Monomial
) -> tuple[int, Monomial] | None:
    """Multiply two monomials, returning the Koszul sign and the result.

    Returns None when an odd generator would appear squared.
    """
    count = 0
    odd = space.odd
    if odd:
        left_odd = [i for i in odd if left[i]]
        if left_odd:
            for j in odd:
                if right[j]:
                    if left[j]:
                        return None
                    for i in left_odd:
                        if i > j:
                            count += 1
    mono = tuple(a + b for a, b in zip(left, right))
    return (-1 if count & 1 else 1), mono


def monomial_derivative(
    space: GradedSpace, mono: Monomial, index: int
) -> tuple[int, Monomial] | None:
    """Left derivative of a monomial with respect to one generator."""
    exponent = mono[index]
    if not exponent:
        return None
    if space.parities[index]:
        before = 0
        for i in space.odd:
            if i >= index:
                break
            before += mono[i]
        factor = -1 if before & 1 else 1
    else:
        factor = exponent
    new = list(mono)
    new[index] -= 1
    return factor, tuple(new)


# =============================================================================
# Graded polynomials
# =============================================================================


class GradedPoly:
    """Immutable truncated polynomial with exact rational coefficients."""

    __slots__ = ("space", "terms", "truncation", "_hash")

    def __init__(
        self,
        space: GradedSpace,
        terms: Mapping[Monomial, object] | None = None,
        truncation: int | None = None,
    ) -> None:
        clean: dict[Monomial, Fraction] = {}
        if terms:
            odd = space.odd
            for mono, coeff in terms.items():
                c = coeff if isinstance(coeff, Fraction) else to_fraction(coeff)
                if not c:
                    continue
                if any(mono[i] > 1 for i in odd):
                    continue
                if (
                    truncation is not None
                    and space.monomial_flat_degree(mono) > truncation
                ):
                    continue
                clean[mono] = c
        self.space = space
        self.terms = clean
        self.truncation = truncation
        self._hash: int | None = None

    # ------------------------------------------------------------------
    # Construction helpers

    @classmethod
    def from_text(cls, space: GradedSpace, text: str) -> GradedPoly:
        """Parse ``coeff * gen^k * gen`` terms, one per line or ``;``-separated.

        Generators are multiplied in the written order, so odd generators
        pick up the Koszul sign of their placement.
        """
        result = space.zero()
        for line in re.split(r"[\n;]", text):
            line = line.strip()
            if not line or line == "0":
                continue
            term = space.constant(1)
            for token in (t.strip() for t in line.split("*")):
                if not token:
                    raise ValueError(f"empty factor in term {line!r}")
                if _RATIONAL_RE.match(token):
                    term = term * to_fraction(token)
                    continue
                sign = 1
                if token.startswith("-"):
                    sign, token = -1, token[1:].strip()
                name, _, power = token.partition("^")
                name = name.strip()
                if name not in space.index:
                    raise ValueError(f"unknown generator {name!r}")
                exponent = int(power) if power else 1
                factor = space.constant(sign)
                for _ in range(exponent):
                    factor = factor * space.gen(name)
                term = term * factor
            result = result + term
        return result

    # ------------------------------------------------------------------
    # Basic protocol

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.terms == (
                {self.space.origin: Fraction(other)} if other else {}
            )
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.space == other.space and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.space, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"GradedPoly({self.to_text(separator='; ')})"

    def __str__(self) -> str:
        return self.to_text(separator=" + ")

    def _check(self, other: GradedPoly) -> None:
        if self.space is not other.space and self.space != other.space:
            raise SpaceMismatchError("polynomials live on different graded spaces")

    def _merge_truncation(self, other: GradedPoly) -> int | None:
        if self.truncation is None:
            return other.truncation
        if other.truncation is None:
            return self.truncation
        return min(self.truncation, other.truncation)

    # ------------------------------------------------------------------
    # Arithmetic

    def __add__(self, other: GradedPoly | int | Fraction) -> GradedPoly:
        if isinstance(other, (int, Fraction)):
            other = self.space.constant(other)
        self._check(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, 0) + c
        return GradedPoly(self.space, terms, self._merge_truncation(other))

    __radd__ = __add__

    def __neg__(self) -> GradedPoly:
        return GradedPoly(
            self.space, {m: -c for m, c in self.terms.items()}, self.truncation
        )

    def __sub__(self, other: GradedPoly | int | Fraction) -> GradedPoly:
        return self + (-other)

    def __rsub__(self, other: int | Fraction) -> GradedPoly:
        return (-self) + other

    def __mul__(self, other: GradedPoly | int | Fraction) -> GradedPoly:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return poly_mul(self, other)

    def __rmul__(self, other: int | Fraction) -> GradedPoly:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other: int | Fraction) -> GradedPoly:
        return self.scale(Fraction(1) / Fraction(other))

    def scale(self, factor: int | Fraction) -> GradedPoly:
        factor = Fraction(factor)
        if not factor:
            return GradedPoly(self.space, truncation=self.truncation)
        return GradedPoly(
            self.space, {m: c * factor for m, c in self.terms.items()}, self.truncation
        )

    def __pow__(self, exponent: int) -> GradedPoly:
        result = self.space.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    # ------------------------------------------------------------------
    # Degrees and parts

    def degrees(self) -> set[int]:
        return {self.space.monomial_degree(m) for m in self.terms}

    def flat_degrees(self) -> set[int]:
        return {self.space.monomial_flat_degree(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int:
        """Total graded degree of a homogeneous polynomial (0 for zero)."""
        degrees = self.degrees()
        if len(degrees) > 1:
            raise ValueError(f"polynomial is not homogeneous: degrees {degrees}")
        return degrees.pop() if degrees else 0

    @property
    def parity(self) -> int:
        parities = {d % 2 for d in self.degrees()}
        if len(parities) > 1:
            raise ValueError("polynomial has mixed parity")
        return parities.pop() if parities else 0

    @property
    def flat_degree(self) -> int:
        """Highest flat degree present (-1 for zero)."""
        return max(self.flat_degrees(), default=-1)

    def split_parity(self) -> tuple[GradedPoly, GradedPoly]:
        even: dict[Monomial, Fraction] = {}
        odd: dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            (odd if self.space.monomial_degree(mono) % 2 else even)[mono] = c
        return (
            GradedPoly(self.space, even, self.truncation),
            GradedPoly(self.space, odd, self.truncation),
        )

    def homogeneous_part(self, flat_degree: int) -> GradedPoly:
        return self.filter(lambda m: self.space.monomial_flat_degree(m) == flat_degree)

    def truncate(self, max_flat_degree: int | None) -> GradedPoly:
        if max_flat_degree is None:
            return self
        return GradedPoly(self.space, self.terms, max_flat_degree)

    def filter(self, keep) -> GradedPoly:
        return GradedPoly(
            self.space,
            {m: c for m, c in self.terms.items() if keep(m)},
            self.truncation,
        )

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get(self.space.origin, Fraction(0))

    def evaluate_at_zero(self) -> Fraction:
        """Value with every generator (flat and parameter) set to zero."""
        return self.constant_term

    # ------------------------------------------------------------------
    # Calculus

    def derivative(self, name: str | int) -> GradedPoly:
        """Left derivative with respect to a generator."""
        index = name if isinstance(name, int) else self.space.index[name]
        terms: dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            res = monomial_derivative(self.space, mono, index)
            if res is None:
                continue
            factor, new = res
            terms[new] = terms.get(new, 0) + factor * c
        return GradedPoly(self.space, terms, self.truncation)

    def substitute(self, mapping: Mapping[int, GradedPoly]) -> GradedPoly:
        """Replace generators by polynomials of the same parity."""
        result = GradedPoly(self.space, truncation=self.truncation)
        powers: dict[tuple[int, int], GradedPoly] = {}

        def power(index: int, exponent: int) -> GradedPoly:
            key = (index, exponent)
            if key not in powers:
                base = mapping.get(index, self.space.gen(index))
                if exponent > 1:
                    base = power(index, exponent - 1) * base
                powers[key] = base
            return powers[key]

        for mono, c in self.terms.items():
            term = self.space.constant(c)
            for index, exponent in enumerate(mono):
                if exponent:
                    term = term * power(index, exponent)
            result = result + term
        return result

    # ------------------------------------------------------------------
    # Text

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        space = self.space
        return sorted(
            self.terms.items(),
            key=lambda item: (
                space.monomial_flat_degree(item[0]),
                tuple(-e for e in item[0]),
            ),
        )

    def to_text(self, separator: str = "\n") -> str:
        """Serialize as ``coeff * gen^k * gen`` terms."""
        if not self.terms:
            return "0"
        lines = []
        for mono, c in self.sorted_terms():
            factors = [format_fraction(c)]
            for index, exponent in enumerate(mono):
                if exponent:
                    name = self.space.generators[index].name
                    factors.append(name if exponent == 1 else f"{name}^{exponent}")
            lines.append(" * ".join(factors))
        return separator.join(lines)


def _common_space(a: GradedPoly, b: GradedPoly) -> GradedSpace:
    a._check(b)
    return a.space


def poly_mul(a: GradedPoly, b: GradedPoly) -> GradedPoly:
    """Graded-commutative product with Koszul signs; truncation is the min."""
    space = _common_space(a, b)
    truncation = a._merge_truncation(b)
    terms: dict[Monomial, Fraction] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            res = monomial_product(space, ma, mb)
            if res is None:
                continue
            sign, mono = res
            if truncation is not None and space.monomial_flat_degree(mono) > truncation:
                continue
            value = ca * cb
            terms[mono] = terms.get(mono, 0) + (value if sign > 0 else -value)
    return GradedPoly(space, terms, truncation)


def poisson_bracket(a: GradedPoly, b: GradedPoly) -> GradedPoly:
    """Poisson bracket {a, b} from the inverse of the constant form.

    {f, g} = sum over A, B of (-1)^(|A||f|) (d_A f) (Omega^-1)^{AB} (d_B g),
    so that {xi^A, xi^B} = (Omega^-1)^{AB}.

    Raises:
        SymplecticFormError: If the space has no symplectic form.
    """
    space = _common_space(a, b)
    space.require_symplectic()
    pinv = space.omega_inverse
    flat = space.flat
    dg = [b.derivative(B) for B in flat]
    contracted: list[GradedPoly | None] = []
    for ka in range(len(flat)):
        acc = space.zero()
        for kb, coeff in enumerate(pinv[ka]):
            if coeff and dg[kb]:
                acc = acc + dg[kb].scale(coeff)
        contracted.append(acc if acc else None)

    result = GradedPoly(space, truncation=a._merge_truncation(b))
    for part, parity in zip(a.split_parity(), (0, 1)):
        if not part:
            continue
        for ka, A in enumerate(flat):
            if contracted[ka] is None:
                continue
            df = part.derivative(A)
            if not df:
                continue
            product = df * contracted[ka]
            if parity and space.parities[A]:
                product = -product
            result = result + product
    return result


def hamiltonian_vector_field(f: GradedPoly) -> tuple[GradedPoly, ...]:
    """Components X^B = {f, xi^B} over the flat generators."""
    return tuple(poisson_bracket(f, f.space.gen(B)) for B in f.space.flat)


def action(f: GradedPoly, g: GradedPoly) -> GradedPoly:
    """The Hamiltonian action f o g = {f, g}."""
    return poisson_bracket(f, g)


def hamiltonian_lift(
    v: Sequence[GradedPoly], max_degree: int | None = None
) -> GradedPoly:
    """Find Theta with {Theta, xi^C} = v^C and zero constant term.

    Args:
        v: Components over the flat generators, in flat order.
        max_degree: Flat-degree window for Theta; v is compared one degree lower.

    Returns:
        The Hamiltonian lift Theta.

    Raises:
        NotSymplecticError: If v does not preserve the symplectic form.
    """
    if not v:
        raise SpaceMismatchError("empty vector field")
    space = v[0].space
    space.require_symplectic()
    flat = space.flat
    if len(v) != len(flat):
        raise SpaceMismatchError(
            f"vector field has {len(v)} components, "
            f"space has {len(flat)} flat generators"
        )
    omega = space.symplectic

    theta = space.zero()
    for field_parity in (0, 1):
        comps = [
            vc.filter(
                lambda m, C=C: (space.monomial_degree(m) - space.degrees[C]) % 2
                == field_parity
            )
            for vc, C in zip(v, flat)
        ]
        if not any(comps):
            continue
        for kb, B in enumerate(flat):
            grad = space.zero()
            for kc, comp in enumerate(comps):
                if comp and omega[kc][kb]:
                    grad = grad + comp.scale(omega[kc][kb])
            if not grad:
                continue
            if field_parity and space.parities[B]:
                grad = -grad
            # Euler integration in the flat degree
            weighted = {
                m: c / (space.monomial_flat_degree(m) + 1)
                for m, c in grad.terms.items()
            }
            theta = theta + space.gen(B) * GradedPoly(space, weighted)
    theta = theta.truncate(max_degree)

    window = None if max_degree is None else max_degree - 1
    field = hamiltonian_vector_field(theta)
    for got, want, C in zip(field, v, flat):
        if got.truncate(window) != GradedPoly(space, want.terms, window):
            raise NotSymplecticError(
                f"vector field is not symplectic: component {space.generators[C].name} "
                "has no Hamiltonian lift"
            )
    return theta


# =============================================================================
# Matrix-valued polynomials
# =============================================================================


class MatPoly:
    """Square matrix of graded polynomials acting on a fiber space."""

    __slots__ = ("fiber", "space", "entries")

    def __init__(
        self,
        fiber: GradedSpace,
        space: GradedSpace,
        entries: Sequence[Sequence[GradedPoly]],
    ) -> None:
        size = fiber.dimension
        if len(entries) != size or any(len(row) != size for row in entries):
            raise SpaceMismatchError(
                f"matrix shape does not match fiber dimension {size}"
            )
        for row in entries:
            for entry in row:
                if entry.space != space:
                    raise SpaceMismatchError("matrix entries live on another space")
        self.fiber = fiber
        self.space = space
        self.entries = tuple(tuple(row) for row in entries)

    @classmethod
    def zero(cls, fiber: GradedSpace, space: GradedSpace) -> MatPoly:
        size = fiber.dimension
        return cls(fiber, space, [[space.zero()] * size for _ in range(size)])

    @classmethod
    def from_rationals(
        cls, fiber: GradedSpace, space: GradedSpace, matrix: Sequence[Sequence[object]]
    ) -> MatPoly:
        return cls(
            fiber, space, [[space.constant(x) for x in row] for row in matrix]
        )

    @classmethod
    def linear(
        cls,
        fiber: GradedSpace,
        space: GradedSpace,
        matrices: Sequence[Sequence[Sequence[object]]],
    ) -> MatPoly:
        """Build sum_a xi^a T_a over the flat generators of ``space``."""
        size = fiber.dimension
        entries = [[space.zero() for _ in range(size)] for _ in range(size)]
        for coord, matrix in zip(space.flat, matrices):
            xi = space.gen(coord)
            for i in range(size):
                for j in range(size):
                    value = to_fraction(matrix[i][j])
                    if value:
                        entries[i][j] = entries[i][j] + xi.scale(value)
        return cls(fiber, space, entries)

    def __repr__(self) -> str:
        return f"MatPoly({[[str(e) for e in row] for row in self.entries]})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatPoly):
            return NotImplemented
        return self.fiber == other.fiber and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.fiber, self.entries))

    @property
    def size(self) -> int:
        return len(self.entries)

    def entry(self, i: int, j: int) -> GradedPoly:
        return self.entries[i][j]

    def is_zero(self) -> bool:
        return all(not e for row in self.entries for e in row)

    def map(self, fn) -> MatPoly:
        return MatPoly(
            self.fiber, self.space, [[fn(e) for e in row] for row in self.entries]
        )

    def __add__(self, other: MatPoly) -> MatPoly:
        return MatPoly(
            self.fiber,
            self.space,
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ],
        )

    def __neg__(self) -> MatPoly:
        return self.map(lambda e: -e)

    def __sub__(self, other: MatPoly) -> MatPoly:
        return self + (-other)

    def __mul__(self, factor: int | Fraction) -> MatPoly:
        return self.map(lambda e: e.scale(factor))

    __rmul__ = __mul__

    def __matmul__(self, other: MatPoly) -> MatPoly:
        size = self.size
        entries = []
        for i in range(size):
            row = []
            for k in range(size):
                acc = self.space.zero()
                for j in range(size):
                    a, b = self.entries[i][j], other.entries[j][k]
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            entries.append(row)
        return MatPoly(self.fiber, self.space, entries)

    def trace(self) -> GradedPoly:
        """Supertrace over the fiber (the plain trace for an even fiber)."""
        acc = self.space.zero()
        for i in range(self.size):
            entry = self.entries[i][i]
            acc = acc - entry if self.fiber.parities[i] else acc + entry
        return acc

    def is_homogeneous(self) -> bool:
        """Entry degrees are d + |j| - |i| for one common d."""
        common: set[int] = set()
        for i, row in enumerate(self.entries):
            for j, entry in enumerate(row):
                if not entry:
                    continue
                if not entry.is_homogeneous():
                    return False
                common.add(entry.degree - self.fiber.degrees[j] + self.fiber.degrees[i])
        return len(common) <= 1

    def flat_degrees(self) -> set[int]:
        return {d for row in self.entries for e in row for d in e.flat_degrees()}


# =============================================================================
# Random data
# =============================================================================


def flat_monomials(
    space: GradedSpace, flat_degree: int, total_degree: int | None = None
) -> Iterator[Monomial]:
    """All monomials in the flat generators of a given flat degree."""
    odd = set(space.odd)
    for combo in itertools.combinations_with_replacement(space.flat, flat_degree):
        mono = [0] * space.dimension
        for index in combo:
            mono[index] += 1
        if any(mono[i] > 1 for i in odd):
            continue
        mono_t = tuple(mono)
        if total_degree is not None and space.monomial_degree(mono_t) != total_degree:
            continue
        yield mono_t


def random_poly(
    space: GradedSpace,
    rng: random.Random,
    flat_degrees: Iterable[int] = (1, 2, 3),
    density: float = 0.5,
    total_degree: int | None = None,
    max_terms: int | None = None,
) -> GradedPoly:
    """Random polynomial with small rational coefficients.

    With ``total_degree`` set the result is homogeneous of that degree; the
    result is nonzero whenever a suitable monomial exists.
    """
    candidates = [
        mono
        for d in flat_degrees
        for mono in flat_monomials(space, d, total_degree)
    ]
    terms = {m: small_rational(rng) for m in candidates if rng.random() < density}
    if max_terms is not None and len(terms) > max_terms:
        keep = rng.sample(sorted(terms), max_terms)
        terms = {m: terms[m] for m in keep}
    if not terms and candidates:
        terms[rng.choice(candidates)] = small_rational(rng)
    return GradedPoly(space, terms)
