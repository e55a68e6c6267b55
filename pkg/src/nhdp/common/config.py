"""Configuration settings for the nhdp command line and library."""

from pathlib import Path
from typing import Annotated, List, Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, NoDecode


class NhdpSettings(BaseSettings):
    """Process-level settings, read from NHDP_* environment variables or .env."""

    # Output
    output_dir: Path = Path("./nhdp-output")

    # Logging
    log_level: str = "INFO"

    # Parallelism: None lets the executor pick one worker per chain
    n_workers: Optional[int] = None

    # Kernels run in each sweep, in this order
    moves: Annotated[List[str], NoDecode] = [
        "RESTAURANTS",
        "TABLES",
        "DISHES",
        "SIGMA2",
        "ALPHAS",
    ]

    class Config:
        """Pydantic configuration."""

        env_prefix = "NHDP_"
        env_file = ".env"
        env_file_encoding = "utf-8"

    @field_validator("moves", mode="before")
    @classmethod
    def parse_moves(cls, v):
        if isinstance(v, str):
            return [item.strip().upper() for item in v.split(",") if item.strip()]
        return v

    @field_validator("log_level")
    @classmethod
    def upper_level(cls, v: str) -> str:
        return v.upper()
