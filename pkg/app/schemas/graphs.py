"""Pydantic schemas for graph complex requests."""

from pydantic import BaseModel, Field


class GraphRequest(BaseModel):
    """Schema for a single graph, as text or a catalog name."""

    graph: str = Field(min_length=1, examples=["Gamma1"])


class ChainRequest(BaseModel):
    """Schema for a chain of ``coeff * graph`` lines."""

    chain: str = Field(examples=["1/4 * Gamma5\n1/3 * Gamma6\n-1/2 * Gamma7"])


class ChainTerm(BaseModel):
    """One term of a graph chain."""

    label: str
    coefficient: str


class ChainResponse(BaseModel):
    """Schema for a graph chain response."""

    terms: list[ChainTerm]
    text: str


class AutResponse(BaseModel):
    """Schema for the automorphism count of a graph."""

    graph: str
    canonical: str
    aut_order: int
    is_zero: bool


class PairRequest(BaseModel):
    """Schema for pairing a cochain with a chain."""

    cochain: str
    chain: str


class PairResponse(BaseModel):
    """Schema for a pairing value."""

    value: str


class CatalogEntry(BaseModel):
    """A named graph of the catalog."""

    name: str
    graph: str
    aut_order: int
