"""Developmental actuator-strength schedules and the extinction ablation.

A run is split into ``total_phases`` equal phases; the schedule maps a phase
index to the actuator scale alpha used for every evaluation in that phase.
All non-constant schedules hold alpha = 1 exactly during the final
``final_fixed_phases`` phases so late search happens in the deployment
embodiment.  Over the ramp (the phases before that window):

* ``smol``          linear 1.5 -> 1.0   (oversized start, shrinks to adult)
* ``smol_reverse``  linear 0.5 -> 1.0   (undersized start, grows to adult)
* ``smol_human``    0.7 -> 1.4 by the peak phase, then back down to 1.0
* ``random``        a fresh uniform draw from [lo, hi] each phase
* ``constant``      its fixed alpha everywhere, final window included
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from smolqd.archive import Archive

KINDS = ("constant", "smol", "smol_reverse", "smol_human", "random")

SMOL_START_ALPHA = 1.5
SMOL_REVERSE_START_ALPHA = 0.5
HUMAN_START_ALPHA = 0.7
HUMAN_PEAK_ALPHA = 1.4
FINAL_ALPHA = 1.0


@dataclass(frozen=True)
class ScheduleConfig:
    kind: str = "constant"
    alpha: float = 1.0  # constant schedules only
    random_lo: float = 0.5  # random schedules only
    random_hi: float = 1.5
    total_phases: int = 100
    final_fixed_phases: int = 10
    extinction_sigma: float = 0.0
    human_peak_phase: int = 0  # 0 = auto (one third of the ramp)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; expected one of {KINDS}")
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError(f"alpha must be finite and positive, got {self.alpha}")
        if not (0.0 < self.random_lo <= self.random_hi):
            raise ValueError(
                f"random bounds must satisfy 0 < lo <= hi, got [{self.random_lo}, {self.random_hi}]"
            )
        if self.total_phases < 1:
            raise ValueError(f"total_phases must be >= 1, got {self.total_phases}")
        if not (0 <= self.final_fixed_phases < self.total_phases):
            raise ValueError(
                "final_fixed_phases must be in [0, total_phases), got "
                f"{self.final_fixed_phases} of {self.total_phases}"
            )
        if not (0.0 <= self.extinction_sigma <= 1.0):
            raise ValueError(f"extinction_sigma must be in [0, 1], got {self.extinction_sigma}")
        ramp = self.ramp_phases
        if self.human_peak_phase and not (0 < self.human_peak_phase < ramp):
            raise ValueError(
                f"human_peak_phase must lie strictly inside the ramp (0, {ramp}), "
                f"got {self.human_peak_phase}"
            )

    @property
    def ramp_phases(self) -> int:
        return self.total_phases - self.final_fixed_phases


def alpha_at(config: ScheduleConfig, phase: int, rng: np.random.Generator | None = None) -> float:
    """Actuator scale for ``phase``.

    ``random`` schedules consume exactly one draw from ``rng`` per call
    during the ramp (and none in the final fixed window), so callers that
    evaluate phases in order reproduce the same alpha sequence.
    """
    if not (0 <= phase < config.total_phases):
        raise ValueError(f"phase {phase} out of range [0, {config.total_phases})")
    if config.kind == "constant":
        return config.alpha
    ramp = config.ramp_phases
    if phase >= ramp:
        return FINAL_ALPHA
    frac = phase / ramp
    if config.kind == "smol":
        return SMOL_START_ALPHA + (FINAL_ALPHA - SMOL_START_ALPHA) * frac
    if config.kind == "smol_reverse":
        return SMOL_REVERSE_START_ALPHA + (FINAL_ALPHA - SMOL_REVERSE_START_ALPHA) * frac
    if config.kind == "smol_human":
        peak = config.human_peak_phase or ramp // 3
        if phase < peak:
            return HUMAN_START_ALPHA + (HUMAN_PEAK_ALPHA - HUMAN_START_ALPHA) * (phase / peak)
        return HUMAN_PEAK_ALPHA + (FINAL_ALPHA - HUMAN_PEAK_ALPHA) * ((phase - peak) / (ramp - peak))
    # random
    if rng is None:
        raise ValueError("random schedule requires an rng during the ramp")
    return float(rng.uniform(config.random_lo, config.random_hi))


def apply_extinction(archive: Archive, sigma: float, rng: np.random.Generator) -> Archive:
    """Empty each occupied cell independently with probability ``sigma``.

    Draws one uniform per occupied cell in ascending cell-index order (so
    the outcome is reproducible); sigma = 0 returns the archive unchanged
    without consuming any draws.
    """
    if not (0.0 <= sigma <= 1.0):
        raise ValueError(f"sigma must be in [0, 1], got {sigma}")
    if sigma == 0.0:
        return archive
    indices = archive.occupied()
    draws = rng.random(len(indices))
    kept = {i: archive.cells[i] for i, u in zip(indices, draws) if u >= sigma}
    return Archive(archive.centroids, kept)
