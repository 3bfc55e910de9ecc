import os
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field
from dotenv import load_dotenv
from pathlib import Path
from typing import Optional

# Load .env file from project root (not from src/config/)
project_root = Path(__file__).resolve().parent.parent.parent
load_dotenv(dotenv_path=project_root / ".env")

PRESETS = ("paper", "desk")


class Settings(BaseSettings):
    """
    Centralized configuration management using Pydantic
    """

    # Model configuration for environment variable loading
    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    # Directories
    OUTPUT_DIR: str = "./runs"
    CONFIG_DIR: str = str(project_root / "configs")

    # Experiment defaults (overridden by config documents and CLI flags)
    DEFAULT_PRESET: str = "desk"
    DEFAULT_SEED: int = 0
    MAX_THREADS: int = Field(default=1, ge=1)

    # Enumeration limits
    ENUMERATION_BUDGET: int = 1 << 20  # unknowns times image coefficients in the brute-force minima oracle
    BEST_APPROX_BUDGET: int = 1 << 16  # monic denominators in best-approximation tables

    # Construction
    FRONTIER_WIDTH: int = 8
    FALLBACK_DEPTH: int = 1
    SHOW_PROGRESS: bool = False

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None
    NODE_ENV: str = "development"

    def is_development(self) -> bool:
        """Check if running in development mode"""
        return self.NODE_ENV.lower() == "development"

    def is_production(self) -> bool:
        """Check if running in production mode"""
        return self.NODE_ENV.lower() == "production"

    def validate_required_fields(self):
        """
        Validate settings that pydantic cannot check on its own
        """
        if self.DEFAULT_PRESET not in PRESETS:
            raise ValueError(
                f"DEFAULT_PRESET must be one of {', '.join(PRESETS)}, got '{self.DEFAULT_PRESET}'"
            )
        if self.FRONTIER_WIDTH < 1:
            raise ValueError("FRONTIER_WIDTH must be at least 1")
        if self.FALLBACK_DEPTH < 0:
            raise ValueError("FALLBACK_DEPTH must be >= 0")


class ProductionSettings(Settings):
    # Production runs always keep a log file next to the outputs
    LOG_FILE: Optional[str] = "app.log"

    # Model configuration for environment variable loading
    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )


def get_settings():
    """Factory function to return appropriate settings class"""
    environment = os.getenv("NODE_ENV", "development").lower()

    if environment == "production":
        return ProductionSettings()
    else:
        return Settings()


# Instantiate settings
settings = get_settings()
