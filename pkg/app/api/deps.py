"""API error translation."""

from fastapi import HTTPException, status

from app.core.exceptions import (
    INPUT_ERRORS,
    InsufficientOrderError,
    ResourceLimitError,
    WorkbenchError,
)


def http_error(error: WorkbenchError) -> HTTPException:
    """Map a domain error onto the status code the API reports for it."""
    if isinstance(error, ResourceLimitError):
        code = status.HTTP_413_REQUEST_ENTITY_TOO_LARGE
    elif isinstance(error, (*INPUT_ERRORS, InsufficientOrderError)):
        code = status.HTTP_422_UNPROCESSABLE_ENTITY
    else:
        code = status.HTTP_500_INTERNAL_SERVER_ERROR
    return HTTPException(status_code=code, detail=str(error))
