"""CVT MAP-Elites archive.

Behaviour space is [0, 1]^d partitioned by a centroidal Voronoi tessellation;
the archive keeps at most one elite per centroid cell.  Insertion is strictly
elitist (ties keep the incumbent), and at schedule phase boundaries the whole
archive is reevaluated at the new actuator strength and transferred into a
fresh archive, so stale fitness values and stale descriptors never survive a
change of embodiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from smolqd import kernels

CVT_TOLERANCE = 1e-4
CVT_MAX_ITERS = 200


@dataclass
class Solution:
    """A candidate: parameter vector, its fitness, and its behaviour descriptor."""

    genome: np.ndarray
    fitness: float
    descriptor: np.ndarray


class InsertOutcome(Enum):
    ADDED_TO_EMPTY_CELL = "added_to_empty_cell"
    REPLACED_INCUMBENT = "replaced_incumbent"
    REJECTED = "rejected"


@dataclass
class ArchiveMetrics:
    coverage: float
    max_fitness: float | None


class Archive:
    """One elite per CVT cell, keyed by centroid index."""

    def __init__(self, centroids: np.ndarray, cells: dict[int, Solution] | None = None):
        centroids = np.ascontiguousarray(centroids, dtype=np.float64)
        if centroids.ndim != 2 or centroids.shape[0] < 1:
            raise ValueError("centroids must be a non-empty (k, d) array")
        self.centroids = centroids
        self.cells: dict[int, Solution] = {} if cells is None else dict(cells)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def occupied(self) -> list[int]:
        """Occupied cell indices in ascending order."""
        return sorted(self.cells)

    def solutions(self) -> list[Solution]:
        """Solutions in ascending cell-index order."""
        return [self.cells[i] for i in self.occupied()]

    def __len__(self) -> int:
        return len(self.cells)


def compute_cvt_centroids(k: int, dim: int, n_samples: int, seed) -> np.ndarray:
    """Centroidal Voronoi tessellation of [0, 1]^dim via Lloyd's k-means.

    Draws ``n_samples`` uniform points, initializes centroids as a random
    subset of them, and iterates assign/update until the largest centroid
    displacement (max norm) drops below 1e-4 or 200 iterations pass.
    Deterministic for a fixed seed.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if n_samples < k:
        raise ValueError(f"n_samples ({n_samples}) must be >= k ({k})")
    rng = np.random.default_rng(seed)
    samples = rng.random((n_samples, dim))
    init_idx = rng.choice(n_samples, size=k, replace=False)
    centroids = samples[init_idx].copy()
    for _ in range(CVT_MAX_ITERS):
        _, nearest = cKDTree(centroids).query(samples)
        counts = np.bincount(nearest, minlength=k)
        sums = np.empty((k, dim))
        for j in range(dim):
            sums[:, j] = np.bincount(nearest, weights=samples[:, j], minlength=k)
        new = centroids.copy()  # empty clusters keep their previous centroid
        occ = counts > 0
        new[occ] = sums[occ] / counts[occ, None]
        move = float(np.max(np.abs(new - centroids)))
        centroids = new
        if move < CVT_TOLERANCE:
            break
    if np.unique(centroids, axis=0).shape[0] != k:
        raise RuntimeError("CVT construction produced duplicate centroids")
    return centroids


def assign_cell(descriptor: np.ndarray, centroids: np.ndarray) -> int:
    """Nearest-centroid cell index for one descriptor (clamped to [0, 1]^d).

    Distance is squared Euclidean; ties go to the lowest centroid index.
    """
    desc = np.asarray(descriptor, dtype=np.float64).reshape(1, -1)
    if desc.shape[1] != centroids.shape[1]:
        raise ValueError(
            f"descriptor has dimension {desc.shape[1]}, centroids have {centroids.shape[1]}"
        )
    return int(kernels.assign_batch(np.ascontiguousarray(desc), centroids)[0])


def insert_at(archive: Archive, cell: int, candidate: Solution) -> InsertOutcome:
    """Elitist insertion into a known cell (the batch fast path).

    A candidate replaces the incumbent only on strict fitness improvement;
    equal fitness keeps the incumbent.
    """
    if not 0 <= cell < archive.k:
        raise ValueError(f"cell index {cell} out of range for k={archive.k}")
    incumbent = archive.cells.get(cell)
    if incumbent is None:
        archive.cells[cell] = candidate
        return InsertOutcome.ADDED_TO_EMPTY_CELL
    if candidate.fitness > incumbent.fitness:
        archive.cells[cell] = candidate
        return InsertOutcome.REPLACED_INCUMBENT
    return InsertOutcome.REJECTED


def try_insert(archive: Archive, candidate: Solution) -> InsertOutcome:
    """Assign the candidate's cell and insert elitistly."""
    cell = assign_cell(candidate.descriptor, archive.centroids)
    return insert_at(archive, cell, candidate)


def reevaluate_and_transfer(archive: Archive, task, alpha_new: float) -> tuple[Archive, int]:
    """Reevaluate every elite at ``alpha_new`` and rebuild the archive.

    Every occupied solution's genome is reevaluated (fitness AND descriptor),
    then inserted into a fresh archive over the same centroids, in ascending
    source-cell order.  Solutions whose descriptors collide in the new
    embodiment compete; the better fitness wins.  Non-finite reevaluations
    are discarded.  Returns (new_archive, n_discarded).
    """
    if not (alpha_new > 0.0):
        raise ValueError(f"alpha_new must be positive, got {alpha_new}")
    new_archive = Archive(archive.centroids)
    indices = archive.occupied()
    if not indices:
        return new_archive, 0
    genomes = np.stack([archive.cells[i].genome for i in indices])
    fits, descs = task.evaluate_batch(genomes, alpha_new)
    cells = kernels.assign_batch(np.ascontiguousarray(descs), archive.centroids)
    discarded = 0
    for row, src in enumerate(indices):
        f = float(fits[row])
        if not math.isfinite(f) or not np.all(np.isfinite(descs[row])):
            discarded += 1
            continue
        sol = Solution(archive.cells[src].genome, f, np.array(descs[row]))
        insert_at(new_archive, int(cells[row]), sol)
    return new_archive, discarded


def archive_metrics(archive: Archive) -> ArchiveMetrics:
    """Coverage (occupied/k) and best fitness (None when empty)."""
    if not archive.cells:
        return ArchiveMetrics(coverage=0.0, max_fitness=None)
    best = max(s.fitness for s in archive.cells.values())
    return ArchiveMetrics(coverage=len(archive.cells) / archive.k, max_fitness=best)


def select_parents(
    archive: Archive, n_pairs: int, rng: np.random.Generator
) -> list[tuple[Solution, Solution]]:
    """Uniform random parent pairs from the occupied cells (with replacement).

    Both parents may be the same elite; with a single occupied cell every
    pair is (e, e).  Raises on an empty archive.
    """
    if not archive.cells:
        raise ValueError("cannot select parents from an empty archive")
    occupied = archive.occupied()
    idx = rng.integers(0, len(occupied), size=(n_pairs, 2))
    return [
        (archive.cells[occupied[i]], archive.cells[occupied[j]])
        for i, j in idx
    ]


# ---------------------------------------------------------------------------
# delimited exports (stable layout, full-precision floats)
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def export_archive_csv(archive: Archive, path) -> None:
    """One row per occupied cell: cell_index, fitness, descriptor, genome."""
    indices = archive.occupied()
    dim = archive.dim
    glen = archive.cells[indices[0]].genome.shape[0] if indices else 0
    header = (
        ["cell_index", "fitness"]
        + [f"desc_{j}" for j in range(dim)]
        + [f"genome_{j}" for j in range(glen)]
    )
    lines = [",".join(header)]
    for i in indices:
        sol = archive.cells[i]
        row = [str(i), _fmt(sol.fitness)]
        row += [_fmt(v) for v in sol.descriptor]
        row += [_fmt(v) for v in sol.genome]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def export_centroids_csv(centroids: np.ndarray, path) -> None:
    """One row per centroid: cell_index then coordinates."""
    dim = centroids.shape[1]
    header = ["cell_index"] + [f"coord_{j}" for j in range(dim)]
    lines = [",".join(header)]
    for i, row in enumerate(centroids):
        lines.append(",".join([str(i)] + [_fmt(v) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")
