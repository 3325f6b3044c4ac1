import os
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


BASE_DIR: str = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))


class Settings(BaseSettings):
    WORKERS: int = Field(default=1, ge=1)
    OUTPUT_DIR: str = os.path.join(BASE_DIR, "output")
    LOG_LEVEL: str = "INFO"
    SERIES_TOL: float = Field(default=1e-16, gt=0)
    RTOL: float = Field(default=1e-8, gt=0)
    ATOL: float = Field(default=1e-10, gt=0)

    model_config = SettingsConfigDict(
        env_prefix="KERRCAT_",
        env_file=os.path.join(BASE_DIR, ".env"),
        extra="ignore",
    )


settings = Settings()
