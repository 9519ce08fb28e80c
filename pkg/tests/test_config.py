"""Tests for environment settings"""

from unittest.mock import patch

import pytest

from fukayagen import config
from fukayagen.errors import InvalidInputError


class TestLoadSettings:
    """Test reading FUKAYAGEN_* variables"""

    def test_defaults(self, tmp_path):
        """Test an empty environment gives the defaults"""
        with patch.dict("os.environ", {}, clear=True):
            settings = config.load_settings(tmp_path / "missing.env")

        assert settings == config.Settings()
        assert settings.fixtures_dir == config.REPO_ROOT / "fixtures"

    def test_environment(self, tmp_path):
        """Test values are normalised from the environment"""
        env = {
            "FUKAYAGEN_FIELD": "F3",
            "FUKAYAGEN_SEED": "7",
            "FUKAYAGEN_LOG_LEVEL": "debug",
            "FUKAYAGEN_FIXTURES": str(tmp_path),
        }
        with patch.dict("os.environ", env, clear=True):
            settings = config.load_settings(tmp_path / "missing.env")

        assert settings.field == "f3"
        assert settings.seed == 7
        assert settings.log_level == "DEBUG"
        assert settings.fixtures_dir == tmp_path

    def test_env_file(self, tmp_path):
        """Test a .env file fills in unset variables"""
        env_file = tmp_path / ".env"
        env_file.write_text("FUKAYAGEN_FIELD=f2\nFUKAYAGEN_MAX_DISK_CORNERS=20\n")

        with patch.dict("os.environ", {}, clear=True):
            settings = config.load_settings(env_file)

        assert settings.field == "f2"
        assert settings.max_disk_corners == 20

    def test_environment_wins_over_file(self, tmp_path):
        """Test variables already set are not overridden"""
        env_file = tmp_path / ".env"
        env_file.write_text("FUKAYAGEN_FIELD=f2\n")

        with patch.dict("os.environ", {"FUKAYAGEN_FIELD": "f5"}, clear=True):
            assert config.load_settings(env_file).field == "f5"

    def test_bad_field(self, tmp_path):
        """Test an unknown field name is refused"""
        with patch.dict("os.environ", {"FUKAYAGEN_FIELD": "r"}, clear=True):
            with pytest.raises(InvalidInputError):
                config.load_settings(tmp_path / "missing.env")
