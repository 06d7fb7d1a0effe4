"""Verification suite API endpoints."""

from fastapi import APIRouter, HTTPException, status

from app.api.deps import http_error
from app.core.exceptions import WorkbenchError
from app.core.suites import SUITES, run_suite
from app.schemas.results import SuiteReportResponse, VerifyRequest

router = APIRouter()


@router.get("", response_model=list[str])
async def list_suites():
    """Names of the available suites."""
    return list(SUITES)


@router.post("/{suite}", response_model=SuiteReportResponse)
def verify(suite: str, request: VerifyRequest | None = None):
    """Run a suite and report every identity it checks.

    Suites are CPU bound, so this handler runs in the worker thread pool.
    """
    if suite not in SUITES:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Unknown suite {suite!r}",
        )
    request = request or VerifyRequest()
    try:
        connection = request.manifest.to_connection() if request.manifest else None
        report = run_suite(
            suite,
            seed=request.seed,
            order=request.order,
            instances=request.instances,
            connection=connection,
        )
    except WorkbenchError as e:
        raise http_error(e) from e
    return report
