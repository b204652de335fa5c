"""
Chunked, process-parallel execution of trajectory batches.

Trajectory ids are split into fixed-size chunks that do not depend on the worker
count. Each chunk runs in lock-step on its own keyed streams and results are joined
in chunk order, so every reduction sees the same sequence for any number of workers.
"""

import logging
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import TypeVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from models.echo import EchoEnsemble
from models.params import ModelParams
from models.trajectory import EnsembleResult
from modules.echo import run_echo_ensemble
from modules.trajectory_engine import run_ensemble

logger = logging.getLogger(__name__)

WORKERS_ENV = "GPTRAJ_WORKERS"

T = TypeVar("T")


def default_workers() -> int:
    """Worker count from GPTRAJ_WORKERS, else 1."""
    value = os.getenv(WORKERS_ENV)
    if not value:
        return 1
    try:
        workers = int(value)
    except ValueError as e:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {value!r}") from e
    if workers < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1, got {workers}")
    return workers


def chunk_ids(n_traj: int, chunk_size: int) -> list[NDArray[np.int64]]:
    """Split ids 0..n_traj-1 into consecutive chunks of at most chunk_size."""
    if n_traj < 1 or chunk_size < 1:
        raise ValueError(f"need n_traj >= 1 and chunk_size >= 1, got {n_traj}, {chunk_size}")
    ids = np.arange(n_traj, dtype=np.int64)
    return [ids[start : start + chunk_size] for start in range(0, n_traj, chunk_size)]


def map_chunks(fn: Callable[[NDArray[np.int64]], T], chunks: Sequence[NDArray[np.int64]], workers: int) -> list[T]:
    """
    Apply fn to every chunk, in chunk order.

    Args:
        fn: Picklable callable (module-level function or functools.partial of one)
        chunks: Work units
        workers: Process count; 1 runs in the calling process

    Returns:
        Results in the order of chunks
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if workers == 1 or len(chunks) == 1:
        return [fn(chunk) for chunk in chunks]
    logger.info(f"dispatching {len(chunks)} chunks to {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def _ensemble_chunk(
    ids: NDArray[np.int64],
    p: ModelParams,
    duration: float,
    initial: NDArray[np.complex128],
    sample_steps: tuple[int, ...],
) -> EnsembleResult:
    return run_ensemble(p, duration, initial, ids, sample_steps=sample_steps)


def _echo_chunk(ids: NDArray[np.int64], p: ModelParams) -> EchoEnsemble:
    return run_echo_ensemble(p, ids)


def parallel_ensemble(
    p: ModelParams,
    duration: float,
    initial: ArrayLike,
    workers: int = 1,
    chunk_size: int = 500,
    sample_steps: Sequence[int] = (),
) -> EnsembleResult:
    """run_ensemble over p.n_traj keyed trajectories, chunked across processes."""
    fn = partial(
        _ensemble_chunk,
        p=p,
        duration=duration,
        initial=np.asarray(initial, dtype=np.complex128),
        sample_steps=tuple(sample_steps),
    )
    return EnsembleResult.concatenate(map_chunks(fn, chunk_ids(p.n_traj, chunk_size), workers))


def parallel_echo(p: ModelParams, workers: int = 1, chunk_size: int = 500) -> EchoEnsemble:
    """run_echo_ensemble over p.n_traj keyed trajectories, chunked across processes."""
    fn = partial(_echo_chunk, p=p)
    return EchoEnsemble.concatenate(map_chunks(fn, chunk_ids(p.n_traj, chunk_size), workers))
