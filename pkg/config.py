"""Configuration management for mixv - mixture equivalence and Ising reduction verifier."""
import os
from dotenv import load_dotenv
from pathlib import Path

TOOL_VERSION = "0.3.0"

# Determine .env file path
env_file_path = Path('.env')
env_file_absolute = env_file_path.resolve()

# Load environment variables from .env file (real environment wins)
load_dotenv(dotenv_path=env_file_absolute, override=False)


def _optional_int(name: str):
    """Read an optional integer environment variable (None when unset or blank)."""
    raw = os.getenv(name, '').strip()
    return int(raw) if raw else None


class Config:
    """Configuration class for the mixv verification toolkit."""

    # Logging Configuration
    LOG_LEVEL = os.getenv('MIXV_LOG_LEVEL', 'INFO').upper()  # DEBUG, INFO, WARNING, ERROR

    # Enumeration Configuration
    # Replaces every configuration-count guard when set. Footgun: a 2^30 run will happily start.
    MAX_ENUM = _optional_int('MIXV_MAX_ENUM')
    ENUM_CHUNK = int(os.getenv('MIXV_ENUM_CHUNK', '65536'))  # Configurations per block
    ENUM_WORKERS = int(os.getenv('MIXV_ENUM_WORKERS', '1'))  # Threads evaluating blocks

    # Generator Configuration
    POINT_MASS_LIMIT = int(os.getenv('MIXV_POINT_MASS_LIMIT', '1024'))  # Max |Σ|^n for point-mass rewrites
    DENOMINATOR_BOUND = int(os.getenv('MIXV_DENOMINATOR_BOUND', '12'))

    # Reduction Configuration
    GADGET_MAX_MAGNITUDE = float(os.getenv('MIXV_GADGET_MAX_MAGNITUDE', '700'))
    # Options: linear, geometric
    EPS_SPLIT = os.getenv('MIXV_EPS_SPLIT', 'geometric').lower()
    IDENTITY_TOL = float(os.getenv('MIXV_IDENTITY_TOL', '1e-9'))

    # Database Configuration
    DATABASE_PATH = os.getenv('MIXV_DATABASE_PATH', 'mixv_runs.db')
    RECORD_RUNS = os.getenv('MIXV_RECORD_RUNS', 'false').lower() == 'true'

    @classmethod
    def validate(cls):
        """Validate that configuration values are usable."""
        errors = []

        valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR']
        if cls.LOG_LEVEL not in valid_levels:
            errors.append(
                f"MIXV_LOG_LEVEL must be one of: {', '.join(valid_levels)}")

        if cls.MAX_ENUM is not None and cls.MAX_ENUM < 1:
            errors.append("MIXV_MAX_ENUM must be a positive integer")
        if cls.ENUM_CHUNK < 1:
            errors.append("MIXV_ENUM_CHUNK must be at least 1")
        if cls.ENUM_WORKERS < 1:
            errors.append("MIXV_ENUM_WORKERS must be at least 1")

        if cls.POINT_MASS_LIMIT < 1:
            errors.append("MIXV_POINT_MASS_LIMIT must be at least 1")
        if cls.DENOMINATOR_BOUND < 2:
            errors.append("MIXV_DENOMINATOR_BOUND must be at least 2")

        if not cls.GADGET_MAX_MAGNITUDE > 1:
            errors.append("MIXV_GADGET_MAX_MAGNITUDE must exceed 1")
        valid_splits = ['linear', 'geometric']
        if cls.EPS_SPLIT not in valid_splits:
            errors.append(
                f"MIXV_EPS_SPLIT must be one of: {', '.join(valid_splits)}")
        if not cls.IDENTITY_TOL > 0:
            errors.append("MIXV_IDENTITY_TOL must be positive")

        if errors:
            raise ValueError("Configuration errors:\n" +
                             "\n".join(f"  - {e}" for e in errors))

        return True

    @classmethod
    def reload(cls):
        """Reload configuration from environment variables and .env file."""
        load_dotenv(dotenv_path=env_file_absolute, override=False)

        cls.LOG_LEVEL = os.getenv('MIXV_LOG_LEVEL', 'INFO').upper()
        cls.MAX_ENUM = _optional_int('MIXV_MAX_ENUM')
        cls.ENUM_CHUNK = int(os.getenv('MIXV_ENUM_CHUNK', '65536'))
        cls.ENUM_WORKERS = int(os.getenv('MIXV_ENUM_WORKERS', '1'))
        cls.POINT_MASS_LIMIT = int(os.getenv('MIXV_POINT_MASS_LIMIT', '1024'))
        cls.DENOMINATOR_BOUND = int(os.getenv('MIXV_DENOMINATOR_BOUND', '12'))
        cls.GADGET_MAX_MAGNITUDE = float(os.getenv('MIXV_GADGET_MAX_MAGNITUDE', '700'))
        cls.EPS_SPLIT = os.getenv('MIXV_EPS_SPLIT', 'geometric').lower()
        cls.IDENTITY_TOL = float(os.getenv('MIXV_IDENTITY_TOL', '1e-9'))
        cls.DATABASE_PATH = os.getenv('MIXV_DATABASE_PATH', 'mixv_runs.db')
        cls.RECORD_RUNS = os.getenv('MIXV_RECORD_RUNS', 'false').lower() == 'true'

        return True
