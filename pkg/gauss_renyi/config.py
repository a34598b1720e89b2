from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Global defaults, overridable through GAUSS_RENYI_* environment variables.

    CLI flags take precedence; the effective values of a run end up in its manifest.
    """

    model_config = SettingsConfigDict(
        env_prefix="GAUSS_RENYI_", env_file=".env", case_sensitive=True, extra="ignore"
    )

    OUTPUT_DIR: str = Field(
        default="./output", description="Directory where output files will be written"
    )

    DEGREE: int = Field(
        default=32, ge=4, le=512, description="Polynomial degree of the collocation grid"
    )

    TAIL_N: int = Field(
        default=64, ge=2, description="Number of explicitly summed branches per map"
    )

    TAIL_ORDER: int = Field(
        default=4, ge=0, le=4, description="Taylor order of the pointwise series tail correction"
    )

    TAIL_TOL: float = Field(
        default=1e-10, gt=0, description="Target absolute error of a single operator application"
    )

    SEED: int = Field(
        default=7, ge=0, lt=2**64, description="Seed of the counter-based generator"
    )

    BURN_IN: int = Field(default=1000, ge=0, description="Discarded steps per chain")

    CHAINS: int = Field(
        default=1000, ge=1, description="Independent orbits advanced side by side"
    )

    THREADS: Optional[int] = Field(
        default=None, ge=1, description="Worker cap; None means all available cores"
    )

    LAGUERRE_NODES: int = Field(
        default=128, ge=8, le=512, description="Gauss-Laguerre nodes on the half-line"
    )

    POWER_MAX_ITER: int = Field(
        default=100_000, ge=1, description="Iteration budget of the power method"
    )

    POWER_TOL: float = Field(
        default=1e-13, gt=0, description="Sup-norm step size at which the power method stops"
    )


# Global settings instance
settings = Settings()
