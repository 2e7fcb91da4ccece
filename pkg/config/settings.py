"""
Process-level settings for the mixed-cat waveguide engine.
Loads settings from environment variables with sensible defaults.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ("true", "1", "yes")


class Settings:
    """Application settings loaded from environment variables."""

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    SHOW_PROGRESS: bool = _env_bool("SHOW_PROGRESS", "True")

    # Output Configuration
    OUTPUT_DIR: Path = Path(os.getenv("OUTPUT_DIR", "./output")).expanduser()

    # Scan fan-out: 'local' computes chunks in-process, 'celery' dispatches them
    SCAN_BACKEND: str = os.getenv("SCAN_BACKEND", "local").lower()
    SCAN_WORKERS: int = int(os.getenv("SCAN_WORKERS", "4"))
    SCAN_TASK_TIMEOUT: int = int(os.getenv("SCAN_TASK_TIMEOUT", "3600"))

    # Redis / Celery Configuration
    REDIS_URL: str = os.getenv("REDIS_URL", "redis://localhost:6379/0")
    CELERY_BROKER_URL: str = os.getenv("CELERY_BROKER_URL", REDIS_URL)
    CELERY_RESULT_BACKEND: str = os.getenv("CELERY_RESULT_BACKEND", REDIS_URL)

    # Presets shipped with the repository
    PRESETS_DIR: Path = Path(__file__).parent / "presets"

    @classmethod
    def ensure_directories(cls):
        """Ensure the default output directory exists."""
        cls.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    @classmethod
    def print_config(cls):
        """Print current process configuration."""
        print("=" * 60)
        print("Mixed-cat waveguide engine - Configuration")
        print("=" * 60)
        print(f"Output Directory: {cls.OUTPUT_DIR}")
        print(f"Presets: {cls.PRESETS_DIR}")
        print(f"Scan Backend: {cls.SCAN_BACKEND}")
        print(f"Scan Workers: {cls.SCAN_WORKERS}")
        if cls.SCAN_BACKEND == "celery":
            print(f"Celery Broker: {cls.CELERY_BROKER_URL}")
        print(f"Log Level: {cls.LOG_LEVEL}")
        print("=" * 60)


# Create singleton instance
settings = Settings()
