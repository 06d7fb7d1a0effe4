"""FastAPI application entry point."""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.api.v1.router import api_router
from app.config import get_settings
from app.core.graphs import NAMED_GRAPHS, GraphChain, graph_differential

settings = get_settings()
logging.basicConfig(
    level=settings.log_level,
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan handler."""
    logger.info("%s starting (N=%d)", settings.app_name, settings.jet_order)
    yield
    logger.info("%s stopped", settings.app_name)


app = FastAPI(
    title=settings.app_name,
    description="Graph complexes, weight systems and jet identities in exact "
    "rational arithmetic",
    version="0.1.0",
    lifespan=lifespan,
    docs_url="/docs",
    redoc_url="/redoc",
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins_list,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include API routes
app.include_router(api_router, prefix="/api/v1")


@app.get("/health")
async def health_check():
    """Health check endpoint with a golden graph differential."""
    health_status = {
        "status": "healthy",
        "service": settings.app_name,
        "checks": {
            "graph_complex": "unknown",
        },
    }

    expected = GraphChain.from_graph(NAMED_GRAPHS["Gamma3"], 6)
    try:
        ok = graph_differential(NAMED_GRAPHS["Gamma1"]) == expected
    except Exception as e:
        logger.exception("health check failed")
        ok = False
        health_status["checks"]["graph_complex"] = f"error: {type(e).__name__}"
    else:
        health_status["checks"]["graph_complex"] = "ok" if ok else "mismatch"
    if not ok:
        health_status["status"] = "unhealthy"
        return JSONResponse(status_code=503, content=health_status)

    return health_status


@app.get("/")
async def root():
    """Root endpoint."""
    return {
        "message": "Welcome to the Graded Weight Workbench API",
        "docs": "/docs",
        "health": "/health",
    }
