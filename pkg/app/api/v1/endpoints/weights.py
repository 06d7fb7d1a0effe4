"""Weight system API endpoints."""

from fastapi import APIRouter

from app.api.deps import http_error
from app.core.exceptions import WorkbenchError
from app.core.graded import format_fraction
from app.core.weights import (
    WeightResult,
    is_closed,
    lie_closed_form,
    lie_weights,
    rw_weights,
    weight_table,
)
from app.schemas.manifest import LieManifest, RWManifest
from app.schemas.results import WeightRow, WeightsResponse

router = APIRouter()


def _rows(table: list[WeightResult]) -> list[WeightRow]:
    return [
        WeightRow(label=row.label, value=row.value_text(), exact=row.exact)
        for row in table
    ]


@router.post("/lie", response_model=WeightsResponse)
async def lie(manifest: LieManifest):
    """Lie-algebra weights at degree ``m`` with exact rational values.

    At m = 4 the Casimir prediction for Gamma4..Gamma7 is returned alongside.
    """
    try:
        data = manifest.to_data()
        weights = lie_weights(data, manifest.m)
        closed_form = None
        if manifest.m == 4:
            closed_form = {
                label: format_fraction(value)
                for label, value in lie_closed_form(data).items()
            }
    except WorkbenchError as e:
        raise http_error(e) from e
    return WeightsResponse(
        m=manifest.m,
        weights=_rows(weight_table(weights)),
        closed=is_closed(weights),
        closed_form=closed_form,
    )


@router.post("/rw", response_model=WeightsResponse)
async def rw(manifest: RWManifest):
    """Rozansky-Witten weights; values are antisymmetric tensors in the odd v."""
    try:
        weights = rw_weights(manifest.to_data(), manifest.m)
    except WorkbenchError as e:
        raise http_error(e) from e
    return WeightsResponse(
        m=manifest.m,
        weights=_rows(weight_table(weights, exact=False)),
        closed=is_closed(weights),
    )
