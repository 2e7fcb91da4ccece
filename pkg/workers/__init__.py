"""Workers package: Celery fan-out of z-scan chunks."""

from typing import Any

from .celery_app import app

__all__ = [
    "app",
    "compute_scan_chunk",
]


def __getattr__(name: str) -> Any:  # pragma: no cover - thin lazy importer
    if name == "compute_scan_chunk":
        from .tasks import compute_scan_chunk

        return compute_scan_chunk

    raise AttributeError(f"module 'workers' has no attribute {name!r}")
