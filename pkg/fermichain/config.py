from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from fermichain.constants import PATHS


class Settings(BaseSettings):
    """
    Configuration settings for the simulation library and CLI.

    Attributes:
        LOG_LEVEL (str): The logging level. Default is "INFO".
        LOG_TO_FILE (bool): Whether to also log to logs/fermichain.log.
        ZERO_MODE_TOLERANCE (float): Relative threshold below which a BdG
            eigenvalue is treated as zero.
        ZERO_MODE_RESIDUAL (float): Largest relative ||Hx|| accepted for a
            rebuilt zero-mode column.
        STEP_SAFETY (float): Upper bound on dt * ||2H||_2 for propagation.
        UNITARITY_DRIFT_LIMIT (float): Canonical-relation drift above which
            propagation aborts.
        DEFAULT_PROPAGATOR (str): "expm" or "rk4".
        WINDING_SAMPLES (int): Brillouin-zone samples for the winding index.
        FLOQUET_SAMPLES (int): Stored samples per period of Floquet modes.
        ED_MAX_SITES (int): Largest chain accepted by the ED oracle.
        ED_THERMAL_MAX_SITES (int): Largest chain for ED full traces.
        CSV_FLOAT_FORMAT (str): printf-style float format for CSV output.
        DEFAULT_SEED (int): Seed used when none is given.
    """

    # Logging
    LOG_LEVEL: str = Field("INFO", description="Logging level")
    LOG_TO_FILE: bool = Field(True, description="Write a rotating log file")

    # Numerical tolerances
    ZERO_MODE_TOLERANCE: float = Field(1e-10, gt=0)
    ZERO_MODE_RESIDUAL: float = Field(1e-8, gt=0)
    STEP_SAFETY: float = Field(0.05, gt=0)
    UNITARITY_DRIFT_LIMIT: float = Field(1e-6, gt=0)
    DEFAULT_PROPAGATOR: str = Field("expm", pattern="^(expm|rk4)$")

    # Sampling
    WINDING_SAMPLES: int = Field(4096, ge=16)
    FLOQUET_SAMPLES: int = Field(256, ge=2)

    # Exact diagonalization limits
    ED_MAX_SITES: int = 12
    ED_THERMAL_MAX_SITES: int = 10

    # Output
    CSV_FLOAT_FORMAT: str = "%.17g"
    DEFAULT_SEED: int = 0

    model_config = SettingsConfigDict(
        env_file=PATHS["root"] / ".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache
def get_settings():
    """
    Retrieves the settings object.

    Returns:
        Settings: The settings object.
    """
    return Settings()


# Create a global instance of the settings
settings = get_settings()
