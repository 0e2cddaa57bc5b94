# apps/schrotbc/settings.py
import os
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    log_level: str = Field("INFO")
    log_file: str = Field("")
    output_root: str = Field("runs")

    model_config = SettingsConfigDict(env_prefix="SCHROTBC_", env_file=".env", extra="ignore")

    def show(self):
        return f"threads={self.threads} log={self.log_level}:{self.log_file or '-'} out={self.output_root}"


@lru_cache
def get_settings() -> Settings:
    return Settings()
