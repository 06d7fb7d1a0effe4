"""Tests for application settings."""

import pytest

from app.core.exceptions import ResourceLimitError
from app.core.graphs import enumerate_graphs


class TestSettings:
    """Tests for environment-driven settings."""

    def test_cors_origins_list(self, settings_env):
        """Test that CORS origins split on commas."""
        settings = settings_env(cors_origins="http://a.test, http://b.test")
        assert settings.cors_origins_list == ["http://a.test", "http://b.test"]

    def test_jet_order_from_environment(self, settings_env):
        """Test that the default jet order reads from the environment."""
        assert settings_env(jet_order=5).jet_order == 5

    def test_vertex_limit_applies_to_enumeration(self, settings_env):
        """Test that the enumeration honors a lowered vertex limit."""
        settings_env(max_graph_vertices=3)
        with pytest.raises(ResourceLimitError):
            enumerate_graphs(2, 2)
