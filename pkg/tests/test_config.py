import json
import os
import pytest
from fractions import Fraction
from pathlib import Path
from unittest.mock import patch

from pydantic import ValidationError

from src.config.experiment import ExperimentConfig, config_hash, load_config
from src.config.settings import ProductionSettings, Settings, get_settings, settings

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


class TestExperimentConfig:
    """Tests for experiment documents"""

    def test_defaults(self):
        """Without a document every section takes its defaults"""
        config = load_config()
        assert config.field.q == 2
        assert config.psi.n == 1
        assert config.psi.s == Fraction(3)
        assert config.constants.preset == "desk"
        assert config.schedule.growth == Fraction(60)

    def test_construction_defaults_follow_settings(self):
        """Frontier width and fallback depth default to the environment settings"""
        with patch.object(settings, "FRONTIER_WIDTH", 3), patch.object(settings, "FALLBACK_DEPTH", 0):
            config = load_config()
        assert config.construction.width == 3
        assert config.construction.fallback_depth == 0
        assert load_config(str(CONFIG_DIR / "desk_n2_s2.json")).construction.width == 4

    def test_document_and_overrides(self):
        """Dotted overrides are applied after the document"""
        config = load_config(
            str(CONFIG_DIR / "desk_n1_s3.json"),
            preset="paper",
            overrides={"construction.seed": 5, "output_dir": "/tmp/runs", "construction.threads": None},
        )
        assert config.name == "desk-n1-s3"
        assert config.constants.preset == "paper"
        assert config.construction.seed == 5
        assert config.construction.threads == 1
        assert config.output_dir == "/tmp/runs"

    def test_rationals_serialize_as_text(self):
        config = load_config(str(CONFIG_DIR / "desk_n1_s3.json"))
        data = config.model_dump(mode="json")
        assert data["schedule"]["epsilon"] == "1/10"
        assert data["psi"]["s"] == "3/1"

    def test_growth_must_exceed_one(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"schedule": {"growth": "1"}})

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"schedule": {"K": 1, "epochs": 3}}))
        with pytest.raises(ValidationError):
            load_config(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(str(tmp_path / "missing.json"))

    def test_build_schedule(self):
        config = load_config(str(CONFIG_DIR / "desk_n1_s3.json"))
        schedule = config.build_schedule()
        assert [e.t for e in schedule.epochs] == [360, 21600]
        assert schedule.M == 2


class TestConfigHash:
    """Tests for the config hash stamped on every output"""

    def test_hash_ignores_threads_and_output_dir(self):
        base = load_config()
        other = load_config(overrides={"construction.threads": 4, "output_dir": "/tmp/elsewhere"})
        assert config_hash(base) == config_hash(other)
        assert len(config_hash(base)) == 16

    def test_hash_changes_with_seed(self):
        assert config_hash(load_config()) != config_hash(load_config(overrides={"construction.seed": 1}))


class TestSettings:
    """Tests for environment settings"""

    def test_development_defaults(self):
        with patch.dict(os.environ, {"NODE_ENV": "development"}):
            s = get_settings()
        assert type(s) is Settings
        assert s.is_development()
        assert s.DEFAULT_PRESET in ("paper", "desk")

    def test_production_keeps_a_log_file(self):
        with patch.dict(os.environ, {"NODE_ENV": "production"}):
            s = get_settings()
        assert isinstance(s, ProductionSettings)
        assert s.is_production()
        assert s.LOG_FILE == "app.log"

    def test_validate_required_fields(self):
        Settings(DEFAULT_PRESET="desk").validate_required_fields()
        with pytest.raises(ValueError):
            Settings(DEFAULT_PRESET="lab").validate_required_fields()
        with pytest.raises(ValueError):
            Settings(FRONTIER_WIDTH=0).validate_required_fields()
