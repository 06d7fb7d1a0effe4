"""Pydantic schemas for weight tables and verification reports."""

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.manifest import JetsManifest


class WeightRow(BaseModel):
    """One diagram with its weight, printed as ``num/den`` or polynomial text."""

    label: str
    value: str
    exact: bool = True


class WeightsResponse(BaseModel):
    """Schema for a weight table."""

    m: int
    weights: list[WeightRow]
    closed: bool
    closed_form: dict[str, str] | None = None


class VerifyRequest(BaseModel):
    """Schema for a verification run; every field falls back to the settings."""

    seed: int | None = None
    order: int | None = Field(default=None, ge=1)
    instances: int | None = Field(default=None, ge=1)
    manifest: JetsManifest | None = None


class CheckResultResponse(BaseModel):
    """Schema for one verified identity."""

    model_config = ConfigDict(from_attributes=True)

    name: str
    passed: bool
    residual: str = "0"


class SuiteReportResponse(BaseModel):
    """Schema for a suite report."""

    model_config = ConfigDict(from_attributes=True)

    suite: str
    seed: int
    order: int
    passed: bool
    checks: list[CheckResultResponse]
