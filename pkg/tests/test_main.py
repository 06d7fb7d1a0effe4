"""Tests for main API endpoints."""

import pytest


@pytest.mark.asyncio
async def test_root(client):
    """Test root endpoint."""
    response = await client.get("/")
    assert response.status_code == 200
    data = response.json()
    assert "message" in data
    assert data["message"] == "Welcome to the Graded Weight Workbench API"


@pytest.mark.asyncio
async def test_health(client):
    """Test that the health check runs the golden graph differential."""
    response = await client.get("/health")
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "healthy"
    assert data["checks"]["graph_complex"] == "ok"


@pytest.mark.asyncio
async def test_docs_available(client):
    """Test that OpenAPI docs are available."""
    response = await client.get("/docs")
    assert response.status_code == 200


@pytest.mark.asyncio
async def test_openapi_lists_routes(client):
    """Test that the OpenAPI schema lists the workbench routes."""
    response = await client.get("/openapi.json")
    assert response.status_code == 200
    paths = response.json()["paths"]
    assert "/api/v1/graphs/differential" in paths
    assert "/api/v1/weights/lie" in paths
    assert "/api/v1/verify/{suite}" in paths
