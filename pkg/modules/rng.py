"""
Keyed random streams.

Every trajectory owns a counter-based generator derived from (seed, trajectory id),
so its draws never depend on which worker runs it or on the batch it shares.
"""

from collections.abc import Iterable

import numpy as np


def trajectory_rng(seed: int, trajectory_id: int) -> np.random.Generator:
    """
    Philox generator for one trajectory.

    Args:
        seed: Root seed of the run
        trajectory_id: Index of the trajectory (the spawn key)

    Returns:
        numpy Generator whose stream is a pure function of (seed, trajectory_id)
    """
    if seed < 0 or trajectory_id < 0:
        raise ValueError(f"seed and trajectory id must be non-negative, got {seed}, {trajectory_id}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(trajectory_id,))
    return np.random.Generator(np.random.Philox(sequence))


def batch_rngs(seed: int, trajectory_ids: Iterable[int]) -> list[np.random.Generator]:
    return [trajectory_rng(seed, int(trajectory_id)) for trajectory_id in trajectory_ids]


def draw_uniforms(generators: list[np.random.Generator], n: int) -> np.ndarray:
    """
    Next ``n`` uniforms of every stream, shape (len(generators), n).

    Consecutive calls continue each stream, so the values seen by a trajectory do not
    depend on how its steps are split into blocks.
    """
    if not generators:
        return np.empty((0, n))
    return np.stack([generator.random(n) for generator in generators])
