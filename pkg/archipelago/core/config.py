"""
Calculus Configuration with Validation
"""

from functools import lru_cache
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Runtime settings for the calculus, the CLI and the HTTP service.

    All settings can be overridden via ARCHIPELAGO_* environment variables.
    """

    model_config = SettingsConfigDict(
        env_prefix="ARCHIPELAGO_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=False,
    )

    app_name: str = Field(
        default="Archipelago Calculus",
        description="Application name reported by the HTTP service"
    )

    debug: bool = Field(
        default=False,
        description="Expose API docs routes"
    )

    # Logging Settings
    log_level: str = Field(
        default="WARNING",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)"
    )

    log_format: Literal["json", "console"] = Field(
        default="json",
        description="Renderer used for log records on stderr"
    )

    # Resource Settings
    word_size_budget: int = Field(
        default=1_000_000,
        ge=1,
        description="Maximum number of letters in any computed projection"
    )

    projection_cache_size: int = Field(
        default=4096,
        ge=0,
        description="Number of memoized projections kept per process"
    )

    validation_limit: int = Field(
        default=1000,
        ge=1,
        description="Enumeration limit for sampled letter map validation"
    )

    pairing_search_limit: int = Field(
        default=100_000,
        ge=1,
        description="Target candidates scanned per lazy pairing query"
    )

    # Verdict Defaults
    default_max_depth: int = Field(default=8, ge=1, description="Default N")
    default_max_level: int = Field(default=6, ge=0, description="Default J")

    cross_check_depth: int = Field(
        default=8,
        ge=1,
        description="Depth of projection cross-checks for divisibility certificates"
    )

    divisible_max_level: int = Field(
        default=8,
        ge=2,
        description="Largest n_max accepted by the divisibility witness"
    )

    default_family: str = Field(
        default='{"prefix": [], "tail": ["Z"]}',
        description="FamilySpec JSON used when no family is supplied"
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is valid."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(
                f"Invalid log level: {v}. Must be one of {valid_levels}"
            )
        return v_upper


@lru_cache
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Returns:
        Settings instance
    """
    return Settings()
