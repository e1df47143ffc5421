import math

import numpy as np
import pytest

from smolqd import kernels
from smolqd.crawler import CrawlerParams, CrawlerTask, rollout


@pytest.fixture(scope="session")
def warm_kernels():
    """Touch every dispatched kernel once so timed tests never pay JIT cost."""
    rng = np.random.default_rng(0)
    kernels.assign_batch(rng.random((4, 2)), rng.random((8, 2)))
    kernels.arm_eval_batch(rng.standard_normal((3, 8)), 1.0, math.pi / 2)
    kernels.iso_line_batch(
        rng.standard_normal((3, 8)),
        rng.standard_normal((3, 8)),
        0.005,
        0.05,
        rng.standard_normal((3, 8)),
        rng.standard_normal(3),
    )
    task = CrawlerTask(CrawlerParams(episode_steps=3))
    rollout(np.zeros(task.genome_len), 1.0, CrawlerParams(episode_steps=3))
    return True
