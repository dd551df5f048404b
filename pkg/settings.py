from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Defaults for the CLI and the HTTP app; flags and request fields override them."""

    model_config = SettingsConfigDict(env_prefix="RAMP_", env_file=".env", extra="ignore")

    catalog: Path = Field(default=Path("catalog"), description="Catalog directory.")
    domains: Path = Field(default=Path("domains"), description="Description directory.")
    coarse_horizon: int = Field(default=40, ge=0)
    fine_horizon: int = Field(default=10, ge=0)
    grid_dt_s: float = Field(default=1.0, gt=0)
    results_root: Path = Field(
        default=Path("results"), description="HTTP runs write and reports read only below this."
    )
    log_level: str = "INFO"


@lru_cache
def get_settings() -> Settings:
    return Settings()
