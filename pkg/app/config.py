from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path


BASE_DIR = Path(__file__).resolve().parent
ENV_PATH = BASE_DIR.parent / ".env"

class Settings(BaseSettings):
    VERSION: str = "v1"

    # Run defaults (overridable per run from the CLI or the HTTP body)
    DEFAULT_POINTS: int = 20
    DEFAULT_SEED: int = 42
    DEFAULT_TOL: float = 1e-9
    DEFAULT_ORDER: int = 3

    # Finite-difference oracle
    ORACLE_TOL: float = 1e-5
    ORACLE_STEP: float = 1e-4

    # Classification thresholds
    SECTIONAL_PLANES: int = 50
    SECTIONAL_ATTEMPTS: int = 100
    CURVATURE_SPREAD_TOL: float = 1e-7
    COLLINEAR_RTOL: float = 1e-8
    DETERMINANT_EPS: float = 1e-12

    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(env_file=ENV_PATH, extra="ignore")

Config = Settings()
