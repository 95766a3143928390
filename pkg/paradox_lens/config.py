import logging

from functools import lru_cache
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Literal

__all__ = [
    "LogLevel",
    "LOG_LEVELS",
    "Config",
    "get_config",
]


LogLevel = Literal["debug", "info", "warning", "error", "critical"]

LOG_LEVELS: dict[LogLevel, int] = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
    "critical": logging.CRITICAL,
}


class Config(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="PARADOX_LENS_", frozen=True)

    # Upper bound on concurrently running workers (replica generation, artifact writes)
    threads: int = Field(default=4, ge=1)

    log_level: LogLevel = "info"

    default_seed: int = Field(default=20170101, ge=0)

    # 3K model: non-positive variances are clamped to epsilon * mu(1 - mu) / k
    variance_floor_epsilon: float = Field(default=1e-6, gt=0)

    # Display smoothing of exceedance profiles
    smoothing_min_samples: int = Field(default=30, ge=1)
    smoothing_bin_ratio: float = Field(default=1.5, gt=1)

    # Log-normal discretization
    lognormal_k_max: int = Field(default=10_000, ge=2)
    truncation_tolerance: float = Field(default=1e-6, gt=0)

    # 2K generator; repair_tolerance bounds the total-variation shift of the class-pair distribution from dropped edges
    repair_tolerance: float = Field(default=1e-3, ge=0)
    generation_max_retries: int = Field(default=100, ge=0)

    # Assortativity rewiring
    rewire_max_steps: int = Field(default=1_000_000, ge=0)
    rewire_tolerance: float = Field(default=0.005, ge=0)

    @field_validator("log_level", mode="before")
    @classmethod
    def _lower_log_level(cls, v):
        return v.lower() if isinstance(v, str) else v


@lru_cache()
def get_config() -> Config:
    return Config()
