"""Task interface and the scaled planar arm.

A task maps (genome, alpha) to (fitness, descriptor).  Alpha is the
developmental actuator scale: it multiplies the arm's joint range (and the
crawler's muscle gain in :mod:`smolqd.crawler`), so the same genome lands in
different parts of behaviour space at different development stages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from smolqd import kernels


class Task:
    """Evaluation interface shared by all tasks."""

    name: str = "task"
    genome_len: int
    descriptor_dim: int
    deterministic: bool = True

    def evaluate(self, genome: np.ndarray, alpha: float) -> tuple[float, np.ndarray]:
        """Fitness and descriptor for one genome."""
        fits, descs = self.evaluate_batch(np.asarray(genome, dtype=np.float64)[None, :], alpha)
        return float(fits[0]), descs[0]

    def evaluate_batch(self, genomes: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
        """Fitness vector and descriptor matrix, rows aligned with ``genomes``."""
        raise NotImplementedError

    def _check_batch(self, genomes: np.ndarray) -> np.ndarray:
        g = np.ascontiguousarray(genomes, dtype=np.float64)
        if g.ndim != 2 or g.shape[1] != self.genome_len:
            raise ValueError(
                f"expected genomes of shape (m, {self.genome_len}), got {g.shape}"
            )
        return g


@dataclass(frozen=True)
class ScaledArmParams:
    n_joints: int = 8
    joint_limit: float = math.pi / 2

    def __post_init__(self):
        if self.n_joints < 2:
            raise ValueError(f"n_joints must be >= 2, got {self.n_joints}")
        if not (math.isfinite(self.joint_limit) and self.joint_limit > 0.0):
            raise ValueError(f"joint_limit must be finite and positive, got {self.joint_limit}")


def arm_joint_angles(genome: np.ndarray, alpha: float, params: ScaledArmParams) -> np.ndarray:
    """theta_i = alpha * joint_limit * tanh(g_i)."""
    g = np.asarray(genome, dtype=np.float64)
    return alpha * params.joint_limit * np.tanh(g)


def scaled_arm_evaluate(
    genome: np.ndarray, alpha: float, params: ScaledArmParams = ScaledArmParams()
) -> tuple[float, np.ndarray]:
    """Evaluate one arm genome at actuator scale ``alpha``.

    The arm has n equal links of length 1/n anchored at the origin; joint
    angles are relative and accumulate along the chain.  Fitness is the
    negative population variance of the joint angles (smooth postures win);
    the descriptor is the end-effector position mapped into [0, 1]^2.
    """
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise ValueError(f"alpha must be finite and positive, got {alpha}")
    g = np.ascontiguousarray(genome, dtype=np.float64)
    if g.ndim != 1 or g.shape[0] != params.n_joints:
        raise ValueError(f"expected genome of length {params.n_joints}, got shape {g.shape}")
    fits, descs = kernels.arm_eval_batch(g[None, :], alpha, params.joint_limit)
    return float(fits[0]), descs[0]


class ScaledArmTask(Task):
    name = "scaled_arm"
    descriptor_dim = 2

    def __init__(self, params: ScaledArmParams = ScaledArmParams()):
        self.params = params
        self.genome_len = params.n_joints

    def evaluate_batch(self, genomes: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
        if not (math.isfinite(alpha) and alpha > 0.0):
            raise ValueError(f"alpha must be finite and positive, got {alpha}")
        g = self._check_batch(genomes)
        return kernels.arm_eval_batch(g, alpha, self.params.joint_limit)


def make_task(name: str, **params) -> Task:
    """Task factory used by the runner and CLI."""
    if name == "scaled_arm":
        return ScaledArmTask(ScaledArmParams(**params))
    if name == "crawler":
        from smolqd.crawler import CrawlerParams, CrawlerTask

        hidden = params.pop("hidden_sizes", (16, 16))
        return CrawlerTask(CrawlerParams(**params), hidden_sizes=tuple(hidden))
    raise ValueError(f"unknown task {name!r}; expected 'scaled_arm' or 'crawler'")
