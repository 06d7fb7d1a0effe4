"""Pytest fixtures for testing."""

import random

import pytest
from httpx import ASGITransport, AsyncClient

from app.config import get_settings
from app.main import app


@pytest.fixture
async def client():
    """Create a test client for the API."""
    async with AsyncClient(
        transport=ASGITransport(app=app),
        base_url="http://test",
    ) as ac:
        yield ac


@pytest.fixture
def rng():
    """Deterministic random source for generated instances."""
    return random.Random(20240601)


@pytest.fixture
def settings_env(monkeypatch):
    """Set environment overrides and rebuild the cached settings."""

    def apply(**values):
        for key, value in values.items():
            monkeypatch.setenv(key.upper(), str(value))
        get_settings.cache_clear()
        return get_settings()

    yield apply
    get_settings.cache_clear()
