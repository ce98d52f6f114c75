from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field


class Settings(BaseSettings):
    """Global settings configuration using environment variables (prefix NCF_)"""

    model_config = SettingsConfigDict(env_prefix="NCF_", env_file=".env", case_sensitive=True, extra="ignore")

    TRIALS: int = Field(
        default=10_000, ge=2, description="Monte-Carlo trials per sweep point"
    )

    SEED: int = Field(
        default=20210101, ge=0, le=2**64 - 1, description="Root seed of all random streams"
    )

    WORKERS: int = Field(
        default=1, ge=1, description="Worker processes used to run trials"
    )

    OUTPUT_DIR: str = Field(
        default="output", description="Directory where CSV and plot scripts are written"
    )

    GF_EXP: int = Field(
        default=7, ge=2, le=8, description="Exponent k of the coding field GF(2^k)"
    )

    PAYLOAD_SYMBOLS: int = Field(
        default=8, ge=1, description="Payload length L in field symbols"
    )

    LOG_LEVEL: str = Field(
        default="INFO",
        description="Logging level for the command line",
        pattern="^(DEBUG|INFO|WARNING|ERROR)$",
    )


# Global settings instance
settings = Settings()
