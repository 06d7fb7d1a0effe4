"""Pydantic schemas."""

from app.schemas.graphs import (
    AutResponse,
    CatalogEntry,
    ChainRequest,
    ChainResponse,
    ChainTerm,
    GraphRequest,
    PairRequest,
    PairResponse,
)
from app.schemas.manifest import (
    GraphsManifest,
    JetsManifest,
    LieManifest,
    Manifest,
    RWManifest,
    load_manifest,
    parse_manifest,
)
from app.schemas.results import (
    CheckResultResponse,
    SuiteReportResponse,
    VerifyRequest,
    WeightRow,
    WeightsResponse,
)

__all__ = [
    "AutResponse",
    "CatalogEntry",
    "ChainRequest",
    "ChainResponse",
    "ChainTerm",
    "CheckResultResponse",
    "GraphRequest",
    "GraphsManifest",
    "JetsManifest",
    "LieManifest",
    "Manifest",
    "PairRequest",
    "PairResponse",
    "RWManifest",
    "SuiteReportResponse",
    "VerifyRequest",
    "WeightRow",
    "WeightsResponse",
    "load_manifest",
    "parse_manifest",
]
