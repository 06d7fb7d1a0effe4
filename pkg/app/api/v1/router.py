"""API v1 router combining all endpoints."""

from fastapi import APIRouter

from app.api.v1.endpoints import graphs, verify, weights

api_router = APIRouter()

api_router.include_router(graphs.router, prefix="/graphs", tags=["graphs"])
api_router.include_router(weights.router, prefix="/weights", tags=["weights"])
api_router.include_router(verify.router, prefix="/verify", tags=["verify"])
