"""Iso+line (directional) variation.

child = a + sigma_iso * eps + sigma_line * lambda * (b - a)

with eps drawn i.i.d. standard normal per component and a single shared
standard-normal lambda per child.  Children are NOT clamped to the genome
domain; tasks must cope with arbitrary real genomes (both built-in tasks
squash through tanh).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from smolqd import kernels


@dataclass(frozen=True)
class VariationParams:
    sigma_iso: float = 0.005
    sigma_line: float = 0.05

    def __post_init__(self):
        for name in ("sigma_iso", "sigma_line"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def iso_line_batch(
    parents_a: np.ndarray,
    parents_b: np.ndarray,
    params: VariationParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vector of children from paired parent rows; draws from ``rng`` only.

    Draw order is fixed (all eps, then all lambda), so results are
    reproducible and independent of kernel backend batching.
    """
    a = np.ascontiguousarray(parents_a, dtype=np.float64)
    b = np.ascontiguousarray(parents_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"parent shapes differ: {a.shape} vs {b.shape}")
    eps = rng.standard_normal(a.shape)
    lam = rng.standard_normal(a.shape[0])
    return kernels.iso_line_batch(a, b, params.sigma_iso, params.sigma_line, eps, lam)


def iso_line(
    parent_a: np.ndarray,
    parent_b: np.ndarray,
    params: VariationParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Single child from two parents."""
    a = np.asarray(parent_a, dtype=np.float64)
    b = np.asarray(parent_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"parents must be equal-length vectors, got {a.shape} and {b.shape}")
    return iso_line_batch(a[None, :], b[None, :], params, rng)[0]
