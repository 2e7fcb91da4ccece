"""
Celery tasks computing z-scan chunks.
"""

import logging
from typing import List

from celery import Task

from services.scan_service import compute_chunk
from utils.errors import ConfigError, NumericalGuardError
from workers.celery_app import app

logger = logging.getLogger(__name__)


class ScanChunkTask(Task):
    """Base task class; configuration and numerical failures are not retried."""

    autoretry_for = (ConnectionError, TimeoutError)
    dont_autoretry_for = (ConfigError, NumericalGuardError)
    retry_kwargs = {'max_retries': 3, 'countdown': 10}
    retry_backoff = True


@app.task(base=ScanChunkTask, bind=True, name='compute_scan_chunk')
def compute_scan_chunk(self, config_text: str, z_values: List[float], regime: str, chunk_index: int):
    """
    Compute ObservableRecords for one ordered chunk of distances.

    Returns:
        {'chunk_index': int, 'records': [record dicts]}
    """
    logger.info(f"Chunk {chunk_index}: {len(z_values)} distances ({regime})")
    try:
        records = compute_chunk(config_text, z_values, regime)
    except Exception as e:
        logger.error(f"✗ Chunk {chunk_index} failed: {e}")
        raise
    logger.info(f"✓ Chunk {chunk_index} complete")
    return {'chunk_index': chunk_index, 'records': records}
