"""The full experiment loop: phases, alpha updates, extinction, transfer, logging.

One run = ``total_phases`` equal phases of ``generations_per_phase``
MAP-Elites generations.  At each phase boundary the schedule sets a new
actuator scale, the optional extinction ablation empties cells at random,
and the archive is reevaluated and transferred so every stored fitness and
descriptor reflects the current embodiment.

Determinism: a single SeedSequence fans out to the CVT construction and the
main loop generator; every random draw (init genomes, per-phase alpha,
extinction, parent choices, variation noise) comes from the main generator
in a fixed order, and batch results are applied in batch-index order — so a
run is bit-reproducible from its seed regardless of how evaluations are
batched or parallelized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from smolqd import kernels
from smolqd.archive import (
    Archive,
    Solution,
    archive_metrics,
    compute_cvt_centroids,
    insert_at,
    reevaluate_and_transfer,
    select_parents,
)
from smolqd.schedules import ScheduleConfig, alpha_at, apply_extinction
from smolqd.tasks import Task, make_task
from smolqd.variation import VariationParams, iso_line_batch

CVT_MIN_SAMPLES = 100_000


def cvt_samples_for(k: int) -> int:
    """Sample count for CVT construction: 50x oversampling, floor 100k."""
    return max(50 * k, CVT_MIN_SAMPLES)


@dataclass
class RunConfig:
    task: str = "scaled_arm"
    task_params: dict = field(default_factory=dict)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    k: int = 1024
    batch_size: int = 256
    generations_per_phase: int = 20
    init_sigma: float = 0.1
    variation: VariationParams = field(default_factory=VariationParams)
    seed: int = 0
    output_dir: str | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.generations_per_phase < 1:
            raise ValueError(
                f"generations_per_phase must be >= 1, got {self.generations_per_phase}"
            )
        if not (math.isfinite(self.init_sigma) and self.init_sigma > 0.0):
            raise ValueError(f"init_sigma must be finite and positive, got {self.init_sigma}")


@dataclass
class MetricsRecord:
    generation: int
    phase: int
    alpha: float
    coverage: float
    max_fitness: float | None
    evaluations: int  # candidate evaluations so far (reevaluations excluded)
    reevaluations: int  # phase-boundary reevaluations so far
    discards: int  # non-finite results dropped so far


@dataclass
class RunResult:
    archive: Archive
    records: list[MetricsRecord]
    task: Task


def evaluate_batch(genomes, task: Task, alpha: float) -> list[Solution]:
    """Evaluate genomes in order; result i always belongs to genome i.

    Failed evaluations surface as non-finite fitness in place (callers
    discard them at insertion time) — never as reordering or omission.
    """
    g = np.asarray(genomes, dtype=np.float64)
    if g.size == 0:
        return []
    fits, descs = task.evaluate_batch(g, alpha)
    return [
        Solution(np.array(g[i]), float(fits[i]), np.array(descs[i]))
        for i in range(g.shape[0])
    ]


def run_experiment(config: RunConfig) -> RunResult:
    """Execute one full run; see the module docstring for the loop contract."""
    task = make_task(config.task, **config.task_params)
    schedule = config.schedule
    root_ss = np.random.SeedSequence(config.seed)
    cvt_ss, main_ss = root_ss.spawn(2)
    centroids = compute_cvt_centroids(
        config.k, task.descriptor_dim, cvt_samples_for(config.k), cvt_ss
    )
    rng = np.random.default_rng(main_ss)
    archive = Archive(centroids)

    evaluations = 0
    reevaluations = 0
    discards = 0
    generation = 0
    records: list[MetricsRecord] = []

    def seed_batch(alpha: float) -> None:
        nonlocal evaluations, discards
        genomes = rng.standard_normal((config.batch_size, task.genome_len)) * config.init_sigma
        fits, descs = task.evaluate_batch(genomes, alpha)
        evaluations += config.batch_size
        discards += _insert_batch(archive, genomes, fits, descs)

    def log(phase: int, alpha: float) -> None:
        m = archive_metrics(archive)
        records.append(
            MetricsRecord(
                generation=generation,
                phase=phase,
                alpha=alpha,
                coverage=m.coverage,
                max_fitness=m.max_fitness,
                evaluations=evaluations,
                reevaluations=reevaluations,
                discards=discards,
            )
        )

    for phase in range(schedule.total_phases):
        alpha = alpha_at(schedule, phase, rng)
        if phase == 0:
            seed_batch(alpha)
            log(phase, alpha)  # generation 0 = the seeding batch
            generation += 1
        else:
            if schedule.extinction_sigma > 0.0:
                archive = apply_extinction(archive, schedule.extinction_sigma, rng)
            n_survivors = len(archive)
            archive, dropped = reevaluate_and_transfer(archive, task, alpha)
            reevaluations += n_survivors
            discards += dropped
            if not archive.cells:
                # an extinction wiped everything: restart from fresh random genomes
                seed_batch(alpha)

        for _ in range(config.generations_per_phase):
            pairs = select_parents(archive, config.batch_size, rng)
            parents_a = np.stack([a.genome for a, _ in pairs])
            parents_b = np.stack([b.genome for _, b in pairs])
            children = iso_line_batch(parents_a, parents_b, config.variation, rng)
            fits, descs = task.evaluate_batch(children, alpha)
            evaluations += config.batch_size
            discards += _insert_batch(archive, children, fits, descs)
            log(phase, alpha)
            generation += 1

    return RunResult(archive=archive, records=records, task=task)


def _insert_batch(archive: Archive, genomes, fits, descs) -> int:
    """Insert a batch in index order; returns how many were discarded as non-finite."""
    cells = kernels.assign_batch(np.ascontiguousarray(descs, dtype=np.float64), archive.centroids)
    dropped = 0
    for i in range(len(fits)):
        f = float(fits[i])
        if not (math.isfinite(f) and np.all(np.isfinite(descs[i]))):
            dropped += 1
            continue
        insert_at(archive, int(cells[i]), Solution(np.array(genomes[i]), f, np.array(descs[i])))
    return dropped


# ---------------------------------------------------------------------------
# metrics file format
# ---------------------------------------------------------------------------

METRICS_COLUMNS = (
    "generation",
    "phase",
    "alpha",
    "coverage",
    "max_fitness",
    "evaluations",
    "reevaluations",
    "discards",
)


def write_metrics_csv(records: list[MetricsRecord], path) -> None:
    lines = [",".join(METRICS_COLUMNS)]
    for r in records:
        lines.append(
            ",".join(
                [
                    str(r.generation),
                    str(r.phase),
                    repr(float(r.alpha)),
                    repr(float(r.coverage)),
                    "" if r.max_fitness is None else repr(float(r.max_fitness)),
                    str(r.evaluations),
                    str(r.reevaluations),
                    str(r.discards),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_metrics_csv(path) -> tuple[list[str], list[list[str]]]:
    """(column names, rows as strings); raises on a missing or empty file."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise ValueError(f"empty metrics file: {path}")
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]
