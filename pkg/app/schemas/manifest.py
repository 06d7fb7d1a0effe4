"""Pydantic schemas for input manifests.

A manifest is a JSON document whose ``kind`` selects one of the models below.
Rationals are written as integers or ``"num/den"`` strings and polynomial
entries as ``coeff * gen^k`` text over the generators of the base space.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Literal

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    TypeAdapter,
    ValidationError,
    WithJsonSchema,
    model_validator,
)

from app.core.exceptions import ManifestError
from app.core.graded import GradedPoly, format_fraction, to_fraction
from app.core.graphs import GraphChain, lookup_graph, parse_chain
from app.core.jets import ConnectionData, base_space, darboux_form
from app.core.weights import LieData, RWData


def _parse_rational(value: object) -> Fraction:
    try:
        return to_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ValueError(str(e)) from e


Rational = Annotated[
    Fraction,
    PlainValidator(_parse_rational),
    PlainSerializer(format_fraction, return_type=str),
    WithJsonSchema({"type": "string", "examples": ["3/2"]}),
]
Matrix = list[list[Rational]]
PolyEntry = str | int
PolyMatrix = list[list[PolyEntry]]


class ManifestBase(BaseModel):
    """Fields shared by every manifest."""

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    name: str | None = None
    description: str | None = None


# =============================================================================
# Lie algebra data
# =============================================================================


class LieManifest(ManifestBase):
    """Representation matrices T_a, optionally with f^c_ab and the trace form."""

    kind: Literal["lie"]
    matrices: list[Matrix] = Field(min_length=1)
    structure_constants: list[Matrix] | None = None
    killing: Matrix | None = None
    m: int = Field(default=4, ge=1)

    def to_data(self) -> LieData:
        if self.structure_constants is None:
            return LieData.from_matrices(self.matrices)
        return LieData(
            tuple(
                tuple(tuple(r) for r in layer) for layer in self.structure_constants
            ),
            tuple(tuple(tuple(r) for r in t) for t in self.matrices),
            tuple(tuple(r) for r in self.killing) if self.killing else (),
        )


# =============================================================================
# Rozansky-Witten data
# =============================================================================


class MomentJets(BaseModel):
    """Quadratic and cubic Taylor coefficients of one moment Hamiltonian."""

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    hessian: Matrix
    cubic: list[Matrix] = Field(default_factory=list)


class RWManifest(ManifestBase):
    """Holomorphic form with cubic curvature jets and optional bundle jets."""

    kind: Literal["rw"]
    omega: Matrix
    curvature: list[list[Matrix]]
    bundle_curvature: list[list[Matrix]] = Field(default_factory=list)
    truncation_order: int = 3
    moments: list[MomentJets] = Field(default_factory=list)
    m: int = Field(default=2, ge=1)

    def to_data(self) -> RWData:
        size = len(self.omega)
        zero = [[0] * size for _ in range(size)]
        return RWData(
            self.omega,
            self.curvature,
            self.bundle_curvature,
            self.truncation_order,
            [(jet.hessian, jet.cubic or [zero] * size) for jet in self.moments],
        )


# =============================================================================
# Connection jets
# =============================================================================


class JetsManifest(ManifestBase):
    """Connection data near x0 as polynomials in y{i} and yb{i}.

    ``omega`` set to ``"darboux"`` uses the standard form.
    """

    kind: Literal["jets"]
    dimension: int = Field(ge=1)
    anti_dimension: int = Field(default=0, ge=0)
    gamma: list[PolyMatrix]
    bundle: list[PolyMatrix] = Field(default_factory=list)
    fiber_degrees: list[int] = Field(default_factory=list)
    vielbein: PolyMatrix | None = None
    omega: Matrix | Literal["darboux"] | None = None
    moments: list[str] = Field(default_factory=list)
    order: int = Field(default=3, ge=1)
    base_order: int = Field(default=1, ge=0)
    m: int = Field(default=2, ge=1)

    @model_validator(mode="after")
    def check_shapes(self) -> "JetsManifest":
        n = self.dimension
        if len(self.gamma) != n:
            raise ValueError(f"gamma needs {n} matrices, got {len(self.gamma)}")
        if self.bundle and len(self.bundle) != n:
            raise ValueError(f"bundle needs {n} matrices, got {len(self.bundle)}")
        if self.bundle and not self.fiber_degrees:
            raise ValueError("bundle given without fiber_degrees")
        return self

    def to_connection(self) -> ConnectionData:
        space = base_space(self.dimension, self.anti_dimension)
        omega = self.omega
        if omega == "darboux":
            omega = darboux_form(self.dimension)
        return ConnectionData(
            space,
            self.gamma,
            bundle=self.bundle,
            fiber_degrees=tuple(self.fiber_degrees),
            vielbein=self.vielbein,
            omega=tuple(tuple(row) for row in omega) if omega else None,
        )

    def to_moments(self, cd: ConnectionData) -> list[GradedPoly]:
        """Moment polynomials on the base space of ``cd``."""
        try:
            return [GradedPoly.from_text(cd.space, text) for text in self.moments]
        except ValueError as e:
            raise ManifestError(f"moments: {e}") from e


# =============================================================================
# Graphs
# =============================================================================


class EnumerationRequest(BaseModel):
    """Shape of the graphs to enumerate."""

    n_internal: int = Field(ge=0)
    n_peripheral: int = Field(default=0, ge=0)
    internal_valence: int | tuple[int, int] | None = 3
    peripheral_valence: int | tuple[int, int] | None = 1
    n_edges: int | None = None


class GraphsManifest(ManifestBase):
    """Graphs (text or catalog names) and optional chains to pair."""

    kind: Literal["graphs"]
    graphs: list[str] = Field(default_factory=list)
    chain: str | None = None
    cochain: str | None = None
    enumeration: EnumerationRequest | None = None

    def parsed_graphs(self):
        return [lookup_graph(text) for text in self.graphs]

    def parsed_chain(self) -> GraphChain | None:
        return parse_chain(self.chain) if self.chain else None

    def parsed_cochain(self) -> GraphChain | None:
        return parse_chain(self.cochain) if self.cochain else None


Manifest = Annotated[
    LieManifest | RWManifest | JetsManifest | GraphsManifest,
    Field(discriminator="kind"),
]

_adapter: TypeAdapter[Manifest] = TypeAdapter(Manifest)


def format_validation_error(error: ValidationError) -> str:
    """One ``loc -> loc: msg`` line per error."""
    lines = []
    for item in error.errors():
        loc = " -> ".join(str(part) for part in item["loc"]) or "manifest"
        lines.append(f"{loc}: {item['msg']}")
    return "\n".join(lines)


def parse_manifest(data: object) -> Manifest:
    """Validate decoded JSON into a manifest model.

    Raises:
        ManifestError: If the data does not match any manifest kind.
    """
    try:
        return _adapter.validate_python(data)
    except ValidationError as e:
        raise ManifestError(format_validation_error(e)) from e


def load_manifest(path: str | Path) -> Manifest:
    """Read and validate a manifest file.

    Raises:
        ManifestError: If the file is unreadable, not JSON or invalid.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ManifestError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ManifestError(
            f"{path}: invalid JSON at line {e.lineno}: {e.msg}"
        ) from e
    return parse_manifest(data)
