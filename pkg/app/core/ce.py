"""Extended Chevalley-Eilenberg complex of formal Hamiltonian functions.

A chain is (f_1, ..., f_p) (x) [g_1 | ... | g_q]: Hamiltonians suspended by
n+1 and a cyclic word of matrix-valued polynomials suspended by 1. Chains are
expanded multilinearly into unit monomials and brought to a normal form
(Hamiltonians sorted with Koszul signs, bar word rotated to its minimal
rotation with the cyclic sign), so equality of sums is syntactic.
"""

from __future__ import annotations

import logging
import random
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

from app.core.exceptions import SpaceMismatchError
from app.core.graded import (
    GradedPoly,
    GradedSpace,
    MatPoly,
    Monomial,
    flat_monomials,
    poisson_bracket,
    random_poly,
    small_rational,
)

logger = logging.getLogger(__name__)

BarUnit = tuple[int, int, Monomial]
ChainKey = tuple[tuple[Monomial, ...], tuple[BarUnit, ...]]


def matpoly_degree(g: MatPoly) -> int:
    """Degree d with entry (i, j) of degree d + |j| - |i|."""
    degrees = set()
    for i, row in enumerate(g.entries):
        for j, entry in enumerate(row):
            for mono in entry.terms:
                degrees.add(
                    g.space.monomial_degree(mono)
                    - g.fiber.degrees[j]
                    + g.fiber.degrees[i]
                )
    if len(degrees) > 1:
        raise ValueError(f"matrix polynomial is not homogeneous: degrees {degrees}")
    return degrees.pop() if degrees else 0


def _split_matpoly(g: MatPoly) -> dict[int, MatPoly]:
    parts: dict[int, list[list[dict]]] = {}
    size = g.size
    rows = range(size)
    for i, row in enumerate(g.entries):
        for j, entry in enumerate(row):
            shift = g.fiber.degrees[i] - g.fiber.degrees[j]
            for mono, c in entry.terms.items():
                d = g.space.monomial_degree(mono) + shift
                grid = parts.setdefault(d, [[{} for _ in range(size)] for _ in rows])
                grid[i][j][mono] = c
    return {
        d: MatPoly(
            g.fiber,
            g.space,
            [[GradedPoly(g.space, cell) for cell in row] for row in grid],
        )
        for d, grid in parts.items()
    }


def _split_poly(f: GradedPoly) -> dict[int, GradedPoly]:
    parts: dict[int, dict] = {}
    for mono, c in f.terms.items():
        parts.setdefault(f.space.monomial_degree(mono), {})[mono] = c
    return {d: GradedPoly(f.space, t) for d, t in parts.items()}


# =============================================================================
# Chains
# =============================================================================


@dataclass(frozen=True)
class CEChain:
    """(f_1, ..., f_p) (x) [g_1 | ... | g_q] times a rational coefficient."""

    space: GradedSpace
    hamiltonians: tuple[GradedPoly, ...] = ()
    bar: tuple[MatPoly, ...] = ()
    coefficient: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "hamiltonians", tuple(self.hamiltonians))
        object.__setattr__(self, "bar", tuple(self.bar))
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))
        for f in self.hamiltonians:
            if f.space != self.space:
                raise SpaceMismatchError("Hamiltonian lives on another space")
        for g in self.bar:
            if g.space != self.space:
                raise SpaceMismatchError("bar entry lives on another space")

    @property
    def form_degree(self) -> int:
        return self.space.form_degree

    @property
    def fiber(self) -> GradedSpace | None:
        return self.bar[0].fiber if self.bar else None

    @property
    def p(self) -> int:
        return len(self.hamiltonians)

    @property
    def q(self) -> int:
        return len(self.bar)

    def scaled(self, factor: int | Fraction) -> CEChain:
        return replace(self, coefficient=self.coefficient * factor)

    def with_coefficient(self, value: int | Fraction) -> CEChain:
        return replace(self, coefficient=Fraction(value))

    def is_zero(self) -> bool:
        return (
            not self.coefficient
            or any(not f for f in self.hamiltonians)
            or any(g.is_zero() for g in self.bar)
        )

    def homogeneous_components(self) -> Iterator[CEChain]:
        """Split every entry by degree and expand multilinearly."""
        if self.is_zero():
            return
        f_parts = [sorted(_split_poly(f).items()) for f in self.hamiltonians]
        g_parts = [sorted(_split_matpoly(g).items()) for g in self.bar]
        for fs in _product(f_parts):
            for gs in _product(g_parts):
                yield replace(
                    self,
                    hamiltonians=tuple(f for _, f in fs),
                    bar=tuple(g for _, g in gs),
                )

    def suspended_hamiltonian_degrees(self) -> list[int]:
        n = self.form_degree
        return [f.degree + n + 1 for f in self.hamiltonians]

    def suspended_bar_degrees(self) -> list[int]:
        return [matpoly_degree(g) + 1 for g in self.bar]


def _product(parts: list[list]) -> Iterator[tuple]:
    if not parts:
        yield ()
        return
    head, *rest = parts
    for item in head:
        for tail in _product(rest):
            yield (item, *tail)


class CESum:
    """Formal linear combination of normalized unit chains."""

    def __init__(
        self,
        space: GradedSpace,
        fiber: GradedSpace | None = None,
        terms: dict[ChainKey, Fraction] | None = None,
    ) -> None:
        self.space = space
        self.fiber = fiber
        self.terms: dict[ChainKey, Fraction] = {
            k: v for k, v in (terms or {}).items() if v
        }

    @classmethod
    def from_chains(
        cls,
        space: GradedSpace,
        chains: Iterable[CEChain],
        fiber: GradedSpace | None = None,
    ) -> CESum:
        result = cls(space, fiber)
        for chain in chains:
            result.add_chain(chain)
        return result

    def add_chain(self, chain: CEChain) -> None:
        if chain.is_zero():
            return
        if chain.fiber is not None:
            self.fiber = self.fiber or chain.fiber
        f_units = [sorted(f.terms.items()) for f in chain.hamiltonians]
        g_units = [
            sorted(
                ((i, j, mono), c)
                for i, row in enumerate(g.entries)
                for j, entry in enumerate(row)
                for mono, c in entry.terms.items()
            )
            for g in chain.bar
        ]
        for fs in _product(f_units):
            for gs in _product(g_units):
                coeff = chain.coefficient
                for _, c in fs:
                    coeff *= c
                for _, c in gs:
                    coeff *= c
                normal = normalize_key(
                    self.space, self.fiber, [m for m, _ in fs], [u for u, _ in gs]
                )
                if normal is None:
                    continue
                sign, key = normal
                value = self.terms.get(key, Fraction(0)) + sign * coeff
                if value:
                    self.terms[key] = value
                else:
                    self.terms.pop(key, None)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: CESum) -> CESum:
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, Fraction(0)) + v
        return CESum(self.space, self.fiber or other.fiber, terms)

    def __neg__(self) -> CESum:
        return CESum(self.space, self.fiber, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: CESum) -> CESum:
        return self + (-other)

    def scale(self, factor: int | Fraction) -> CESum:
        return CESum(
            self.space, self.fiber, {k: v * factor for k, v in self.terms.items()}
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CESum):
            return NotImplemented
        return (self - other).is_zero()

    def chains(self) -> Iterator[CEChain]:
        """Unit chains carrying their coefficients."""
        for (f_monos, bar_units), coeff in sorted(self.terms.items()):
            hamiltonians = tuple(GradedPoly(self.space, {m: 1}) for m in f_monos)
            bar = tuple(_unit_matpoly(self.fiber, self.space, u) for u in bar_units)
            yield CEChain(self.space, hamiltonians, bar, coeff)


def _unit_matpoly(
    fiber: GradedSpace | None, space: GradedSpace, unit: BarUnit
) -> MatPoly:
    assert fiber is not None
    i, j, mono = unit
    size = fiber.dimension
    entries = [[space.zero() for _ in range(size)] for _ in range(size)]
    entries[i][j] = GradedPoly(space, {mono: 1})
    return MatPoly(fiber, space, entries)


def normalize_key(
    space: GradedSpace,
    fiber: GradedSpace | None,
    f_units: Sequence[Monomial],
    bar_units: Sequence[BarUnit],
) -> tuple[int, ChainKey] | None:
    """Sort Hamiltonians and rotate the bar word; None for the zero chain."""
    n = space.form_degree
    sign = 1
    items = list(f_units)
    parity = [(space.monomial_degree(m) + n + 1) % 2 for m in items]
    # insertion sort with Koszul signs of the suspended degrees
    for i in range(1, len(items)):
        k = i
        while k > 0 and items[k] < items[k - 1]:
            if parity[k] and parity[k - 1]:
                sign = -sign
            items[k], items[k - 1] = items[k - 1], items[k]
            parity[k], parity[k - 1] = parity[k - 1], parity[k]
            k -= 1
    for k in range(1, len(items)):
        if items[k] == items[k - 1] and parity[k]:
            return None

    word = list(bar_units)
    if word:
        assert fiber is not None
        bar_parity = [
            (space.monomial_degree(mono) - fiber.degrees[j] + fiber.degrees[i] + 1) % 2
            for i, j, mono in word
        ]
        best: tuple[BarUnit, ...] | None = None
        best_signs: set[int] = set()
        total = sum(bar_parity)
        for r in range(len(word)):
            before = sum(bar_parity[:r])
            rotation_sign = -1 if (before * (total - before)) % 2 else 1
            rotated = tuple(word[r:] + word[:r])
            if best is None or rotated < best:
                best, best_signs = rotated, {rotation_sign}
            elif rotated == best:
                best_signs.add(rotation_sign)
        if len(best_signs) > 1:
            return None
        sign *= best_signs.pop()
        word = list(best)
    return sign, (tuple(items), tuple(word))


# =============================================================================
# Boundary
# =============================================================================


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def action_on_matpoly(f: GradedPoly, g: MatPoly) -> MatPoly:
    """f o g applied entrywise."""
    return g.map(lambda entry: poisson_bracket(f, entry) if entry else entry)


def boundary_internal(chain: CEChain) -> list[CEChain]:
    """Bracket pairs of Hamiltonians (homogeneous chain)."""
    fs = chain.hamiltonians
    bars = chain.suspended_hamiltonian_degrees()
    out = []
    for i in range(len(fs)):
        for j in range(i + 1, len(fs)):
            s = bars[i] * sum(bars[:i]) + bars[j] * sum(bars[:j]) + bars[i] * bars[j]
            bracket = poisson_bracket(fs[i], fs[j])
            if not bracket:
                continue
            sign = _sign(s + fs[i].degree)
            rest = tuple(f for k, f in enumerate(fs) if k not in (i, j))
            out.append(
                replace(
                    chain,
                    hamiltonians=(bracket, *rest),
                    coefficient=chain.coefficient * sign,
                )
            )
    return out


def boundary_vertex(chain: CEChain) -> list[CEChain]:
    """Let each Hamiltonian act on each bar entry (homogeneous chain)."""
    fs, gs = chain.hamiltonians, chain.bar
    f_bar = chain.suspended_hamiltonian_degrees()
    g_bar = chain.suspended_bar_degrees()
    total_f = sum(f_bar)
    out = []
    for i in range(len(fs)):
        for j in range(len(gs)):
            acted = action_on_matpoly(fs[i], gs[j])
            if acted.is_zero():
                continue
            before = sum(g_bar[:j])
            t = f_bar[i] * (sum(f_bar[i + 1 :]) + before) + total_f + before
            sign = -_sign(t)
            rest = tuple(f for k, f in enumerate(fs) if k != i)
            bar = gs[:j] + (acted,) + gs[j + 1 :]
            out.append(
                replace(
                    chain,
                    hamiltonians=rest,
                    bar=bar,
                    coefficient=chain.coefficient * sign,
                )
            )
    return out


def boundary_bar(chain: CEChain) -> list[CEChain]:
    """Multiply cyclically adjacent bar entries (homogeneous chain)."""
    gs = chain.bar
    q = len(gs)
    if q < 2:
        return []
    total_f = sum(chain.suspended_hamiltonian_degrees())
    g_bar = chain.suspended_bar_degrees()
    out = []
    for j in range(q):
        before = sum(g_bar[:j])
        after = sum(g_bar[j:])
        u = total_f + g_bar[j] + before * after
        rotated = gs[j:] + gs[:j]
        product = rotated[0] @ rotated[1]
        if product.is_zero():
            continue
        out.append(
            replace(
                chain,
                bar=(product, *rotated[2:]),
                coefficient=chain.coefficient * -_sign(u),
            )
        )
    return out


def boundary_chains(chain: CEChain) -> list[CEChain]:
    """Unnormalized terms of the full boundary."""
    out: list[CEChain] = []
    for part in chain.homogeneous_components():
        out.extend(boundary_internal(part))
        out.extend(boundary_vertex(part))
        out.extend(boundary_bar(part))
    return out


def ce_boundary(chain: CEChain | CESum) -> CESum:
    """Full boundary of a chain or a normalized sum.

    Raises:
        SymplecticFormError: If the space carries no symplectic form.
    """
    chain.space.require_symplectic()
    sources = chain.chains() if isinstance(chain, CESum) else [chain]
    fiber = chain.fiber
    result = CESum(chain.space, fiber)
    for source in sources:
        for term in boundary_chains(source):
            result.add_chain(term)
    return result


def check_boundary_squared(chain: CEChain) -> CESum:
    """Residual of the boundary applied twice (zero when the complex closes)."""
    first = boundary_chains(chain)
    residual = CESum(chain.space, chain.fiber)
    for term in first:
        for second in boundary_chains(term):
            residual.add_chain(second)
    return residual


# =============================================================================
# Bar action
# =============================================================================


def g_action_on_bar(
    u: GradedPoly, bar: Sequence[MatPoly]
) -> list[tuple[int, tuple[MatPoly, ...]]]:
    """The anti-module action u o [g_1 | ... | g_q] as signed words."""
    n = u.space.form_degree
    a = u.degree
    out = []
    before = 0
    for j, g in enumerate(bar):
        w = (a + n) * before
        acted = action_on_matpoly(u, g)
        if not acted.is_zero():
            sign = -_sign(w + a * n + a + n)
            out.append((sign, tuple(bar[:j]) + (acted,) + tuple(bar[j + 1 :])))
        before += matpoly_degree(g) + 1
    return out


def _words_to_sum(
    space: GradedSpace, words: Iterable[tuple[int, tuple[MatPoly, ...]]]
) -> CESum:
    result = CESum(space)
    for sign, word in words:
        result.add_chain(CEChain(space, (), word, Fraction(sign)))
    return result


def check_action_composition(
    u: GradedPoly, v: GradedPoly, bar: Sequence[MatPoly]
) -> CESum:
    """Residual of u o v o - (-1)^((|u|+n)(|v|+n)) v o u o + [u, v] o on a bar word."""
    space = u.space
    n = space.form_degree

    def twice(
        first: GradedPoly, second: GradedPoly
    ) -> list[tuple[int, tuple[MatPoly, ...]]]:
        out = []
        for s1, word in g_action_on_bar(second, bar):
            for s2, word2 in g_action_on_bar(first, word):
                out.append((s1 * s2, word2))
        return out

    swap = _sign((u.degree + n) * (v.degree + n))
    bracket = poisson_bracket(u, v)
    words = twice(u, v)
    words += [(-swap * s, w) for s, w in twice(v, u)]
    if bracket:
        words += g_action_on_bar(bracket, bar)
    return _words_to_sum(space, words)


# =============================================================================
# Cochains
# =============================================================================


@dataclass(frozen=True)
class CECochain:
    """A cochain given extensionally by a multilinear evaluator.

    The evaluator sees chains with coefficient 1; linearity in the
    coefficient and in normalized sums is supplied here.
    """

    evaluator: Callable[[CEChain], Any]
    degree: int
    name: str = field(default="c", compare=False)

    def __call__(self, chain: CEChain | CESum) -> Any:
        if isinstance(chain, CESum):
            total: Any = Fraction(0)
            for unit in chain.chains():
                value = self(unit)
                if value:
                    total = total + value
            return total
        if chain.is_zero():
            return Fraction(0)
        value = self.evaluator(chain.with_coefficient(1))
        return value * chain.coefficient if value else Fraction(0)


def _module_action(f: GradedPoly, value: Any) -> Any:
    """f o value: the bracket on polynomial values, zero on rational ones.

    Rational-valued cochains take values in the trivial module.
    """
    if isinstance(value, GradedPoly):
        return poisson_bracket(f, value)
    return Fraction(0)


def ce_coboundary_eval(c: CECochain, chain: CEChain) -> Any:
    """(dc)(v) = c(boundary v) - sum_i sign_i v_i o c(v without v_i)."""
    total: Any = c(ce_boundary(chain))
    n = chain.form_degree
    for part in chain.homogeneous_components():
        fs = part.hamiltonians
        before = 0
        for i, f in enumerate(fs):
            fbar = f.degree + n + 1
            rest = replace(part, hamiltonians=fs[:i] + fs[i + 1 :])
            value = c(rest)
            acted = _module_action(f, value) if value else Fraction(0)
            if acted:
                exponent = fbar * before + f.degree * n + (f.degree + n) * c.degree
                term = acted if exponent % 2 == 0 else -acted
                total = total - term
            before += fbar
    return total


def coboundary(c: CECochain) -> CECochain:
    """The cochain dc."""
    return CECochain(
        lambda chain: ce_coboundary_eval(c, chain), c.degree + 1, name=f"d{c.name}"
    )


# =============================================================================
# Random data
# =============================================================================


def random_matpoly(
    fiber: GradedSpace,
    space: GradedSpace,
    rng: random.Random,
    total_degree: int | None = None,
    flat_degrees: Iterable[int] = (1, 2),
    density: float = 0.3,
) -> MatPoly:
    """Random homogeneous matrix polynomial over an even fiber."""
    size = fiber.dimension
    entries = [
        [
            random_poly(space, rng, flat_degrees, density, total_degree, max_terms=1)
            if rng.random() < 0.5
            else space.zero()
            for _ in range(size)
        ]
        for _ in range(size)
    ]
    if all(not e for row in entries for e in row):
        entries[rng.randrange(size)][rng.randrange(size)] = random_poly(
            space, rng, flat_degrees, density, total_degree, max_terms=1
        )
    return MatPoly(fiber, space, entries)


def random_chain(
    space: GradedSpace,
    rng: random.Random,
    p: int,
    q: int = 0,
    fiber: GradedSpace | None = None,
    flat_degrees: Iterable[int] = (1, 2, 3),
    max_terms: int = 2,
    bar_flat_degrees: Iterable[int] | None = None,
) -> CEChain:
    """Random chain with homogeneous sparse entries.

    Bar entries draw from ``bar_flat_degrees``, by default the two lowest of
    ``flat_degrees``.
    """
    flat_degrees = tuple(flat_degrees)
    if bar_flat_degrees is None:
        bar_flat = flat_degrees[:2]
    else:
        bar_flat = tuple(bar_flat_degrees)
    degrees = _available_degrees(space, flat_degrees)
    bar_degrees = _available_degrees(space, bar_flat)
    hamiltonians = []
    for _ in range(p):
        degree = rng.choice(degrees)
        hamiltonians.append(
            random_poly(space, rng, flat_degrees, 0.5, degree, max_terms=max_terms)
        )
    bar = []
    if q:
        assert fiber is not None
        for _ in range(q):
            bar.append(
                random_matpoly(fiber, space, rng, rng.choice(bar_degrees), bar_flat)
            )
    return CEChain(space, tuple(hamiltonians), tuple(bar), small_rational(rng))


def _available_degrees(space: GradedSpace, flat_degrees: Iterable[int]) -> list[int]:
    return sorted(
        {
            space.monomial_degree(m)
            for d in flat_degrees
            for m in flat_monomials(space, d)
        }
    )
