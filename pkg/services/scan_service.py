"""
z-scans: sample distances, split them into ordered chunks, compute each
chunk locally or on Celery workers, and emit the scan CSV.
"""

import hashlib
import logging
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from config import settings
from config.run_config import dump_run_config, parse_run_config
from models import ObservableRecord, Regime, RunConfig, ScanBlock
from services.engine import Engine
from utils.csv_utils import write_csv

logger = logging.getLogger(__name__)

SCAN_COLUMNS = [
    ("z_um", "z"),
    ("sigma_x2", "sigma_x2"),
    ("sigma_p2", "sigma_p2"),
    ("sigma_xp", "sigma_xp"),
    ("r_c_um", "r_c"),
    ("nu", "nu"),
    ("up_h", "up_h"),
    ("up_sr", "up_sr"),
    ("purity", "purity"),
    ("entropy", "entropy"),
    ("mean_x_um", "mean_x"),
    ("mean_p", "mean_p"),
    ("up_bound", "up_bound"),
    ("sr_excess", "sr_excess"),
]

# Engines kept per process by engine_for
ENGINE_CACHE_SIZE = 4


def config_digest(config_text: str) -> str:
    return hashlib.sha256(config_text.encode("utf-8")).hexdigest()


@lru_cache(maxsize=ENGINE_CACHE_SIZE)
def engine_for(config_text: str) -> Engine:
    """Build the engine of a serialized run configuration, reusing recent ones."""
    engine = Engine.from_config(parse_run_config(config_text))
    logger.info(f"Engine cached for config {config_digest(config_text)[:12]}")
    return engine


def z_values(scan: ScanBlock) -> np.ndarray:
    """Distances of a scan block, linear or logarithmic."""
    if scan.n_z == 1:
        return np.array([scan.z_min])
    if scan.spacing == "log":
        return np.geomspace(scan.z_min, scan.z_max, scan.n_z)
    return np.linspace(scan.z_min, scan.z_max, scan.n_z)


def scan_regimes(scan: ScanBlock) -> List[Regime]:
    if scan.regime == "both":
        return [Regime.EXACT, Regime.PARAXIAL]
    return [Regime(scan.regime)]


def split_chunks(zs: np.ndarray, n_chunks: int) -> List[np.ndarray]:
    """Ordered, non-empty chunks of zs."""
    n_chunks = max(1, min(int(n_chunks), zs.size))
    return [chunk for chunk in np.array_split(zs, n_chunks) if chunk.size]


def compute_chunk(config_text: str, zs: Sequence[float], regime: str, engine: Optional[Engine] = None) -> List[dict]:
    """Records of one chunk as plain dicts; the unit of work of both backends."""
    engine = engine or engine_for(config_text)
    return [record.model_dump() for record in engine.records(list(zs), regime)]


def _run_local(config_text: str, chunks: List[np.ndarray], regime: str, engine: Optional[Engine] = None) -> List[dict]:
    rows: List[dict] = []
    for chunk in tqdm(chunks, desc=f"Scan ({regime})", unit="chunk", disable=not settings.SHOW_PROGRESS):
        rows.extend(compute_chunk(config_text, chunk.tolist(), regime, engine))
    return rows


def _run_celery(config_text: str, chunks: List[np.ndarray], regime: str) -> List[dict]:
    from celery import group

    from workers.tasks import compute_scan_chunk

    job = group(
        compute_scan_chunk.s(config_text, chunk.tolist(), regime, index)
        for index, chunk in enumerate(chunks)
    )
    logger.info(f"Dispatching {len(chunks)} scan chunks to {settings.CELERY_BROKER_URL}")
    results = job.apply_async().get(timeout=settings.SCAN_TASK_TIMEOUT)

    rows: List[dict] = []
    for payload in sorted(results, key=lambda item: item["chunk_index"]):
        rows.extend(payload["records"])
    return rows


def run_scan(
    config: RunConfig,
    regime: Union[Regime, str],
    backend: Optional[str] = None,
    workers: Optional[int] = None,
    engine: Optional[Engine] = None,
) -> List[ObservableRecord]:
    """
    Records for every distance of config.scan in one regime, ordered by z.

    Args:
        config: Resolved run configuration
        regime: exact or paraxial
        backend: 'local' or 'celery'; defaults to settings.SCAN_BACKEND
        workers: Chunk count; defaults to settings.SCAN_WORKERS
        engine: Prebuilt engine for the local backend
    """
    regime = Regime(regime).value
    backend = (backend or settings.SCAN_BACKEND).lower()
    workers = workers or settings.SCAN_WORKERS
    zs = z_values(config.scan)
    config_text = dump_run_config(config)
    chunks = split_chunks(zs, workers)
    logger.info(f"Scanning {zs.size} distances ({regime}) in {len(chunks)} chunks on '{backend}'")

    try:
        if backend == "celery":
            rows = _run_celery(config_text, chunks, regime)
        elif backend == "local":
            rows = _run_local(config_text, chunks, regime, engine)
        else:
            raise ValueError(f"Unknown scan backend: {backend}")
    except Exception as e:
        logger.error(f"✗ Scan failed: {e}")
        raise

    return [ObservableRecord(**row) for row in rows]


def write_scan_csv(path: Union[str, Path], records: Sequence[ObservableRecord], config: RunConfig) -> Path:
    header = [column for column, _ in SCAN_COLUMNS]
    rows = ([getattr(record, attr) for _, attr in SCAN_COLUMNS] for record in records)
    return write_csv(path, header, rows, config=config)


__all__ = [
    "SCAN_COLUMNS",
    "ENGINE_CACHE_SIZE",
    "config_digest",
    "engine_for",
    "z_values",
    "scan_regimes",
    "split_chunks",
    "compute_chunk",
    "run_scan",
    "write_scan_csv",
]
