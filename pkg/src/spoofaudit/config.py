from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import computed_field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SPOOFAUDIT_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Feature cache written by `extract` and read by `train-gmm` / `score`
    cache_dir: Path = Path(".spoofaudit-cache")

    # Logging only; never recorded in artifacts
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    @computed_field
    @property
    def resolved_cache_dir(self) -> Path:
        return self.cache_dir.expanduser().resolve()


@lru_cache
def get_settings() -> Settings:
    return Settings()
