"""Counter-based uniforms keyed by (master seed, replication, task, draw).

Each task owns a fixed block of ``DRAWS_PER_TASK`` doubles taken from a Philox4x64
stream whose key is derived from (master_seed, replication).  A task's block sits at
counter ``4 * (task - 1)`` so it can be regenerated in isolation, and bulk generation
of a whole replication yields bit-identical values.  Draws lie in [0, 1).
"""

from __future__ import annotations

import numpy as np

DRAWS_PER_TASK = 16
_BLOCKS_PER_TASK = DRAWS_PER_TASK // 4  # Philox4x64 emits 4 words per counter step


def _key(master_seed: int, replication: int) -> np.ndarray:
    return np.random.SeedSequence([int(master_seed), int(replication)]).generate_state(2, np.uint64)


def task_uniforms(master_seed: int, replication: int, task: int) -> np.ndarray:
    if task < 1:
        raise ValueError("tasks are numbered from 1")
    bg = np.random.Philox(key=_key(master_seed, replication),
                          counter=[_BLOCKS_PER_TASK * (task - 1), 0, 0, 0])
    return np.random.Generator(bg).random(DRAWS_PER_TASK)


def replication_uniforms(master_seed: int, replication: int, horizon: int,
                         start: int = 1) -> np.ndarray:
    """Draw blocks for tasks start..start+horizon-1, shape (horizon, DRAWS_PER_TASK)."""
    if start < 1:
        raise ValueError("tasks are numbered from 1")
    bg = np.random.Philox(key=_key(master_seed, replication),
                          counter=[_BLOCKS_PER_TASK * (start - 1), 0, 0, 0])
    return np.random.Generator(bg).random(horizon * DRAWS_PER_TASK).reshape(horizon, DRAWS_PER_TASK)
