"""Cross-seed statistics: median/IQR series and the one-sided Mann-Whitney U test.

The exact test enumerates the null distribution of U with the standard
counting recurrence whenever the samples are tie-free and n*m <= 400 (a
handful of seeds per method always qualifies); otherwise it falls back to
the normal approximation with tie correction and continuity correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

EXACT_LIMIT = 400  # exact enumeration while n*m <= this and no ties


@dataclass(frozen=True)
class MannWhitneyResult:
    u_statistic: float
    p_value: float


def _u_null_distribution(n: int, m: int) -> np.ndarray:
    """Counts of orderings with U_b = u, u = 0..n*m, under H0.

    Recurrence over the largest remaining element: if it comes from b it
    beats all i currently-placed a elements, so
    c(i, j, u) = c(i-1, j, u) + c(i, j-1, u-i).
    """
    size = n * m + 1
    rows = [np.zeros(size, dtype=np.int64) for _ in range(m + 1)]
    for j in range(m + 1):
        rows[j][0] = 1  # i = 0: no a elements, U_b is always 0
    for i in range(1, n + 1):
        first = np.zeros(size, dtype=np.int64)
        first[0] = 1  # j = 0: no b elements
        new_rows = [first]
        for j in range(1, m + 1):
            arr = rows[j].copy()
            arr[i:] += new_rows[j - 1][: size - i]
            new_rows.append(arr)
        rows = new_rows
    return rows[m]


def _exact_p(n: int, m: int, u_b: float) -> float:
    counts = _u_null_distribution(n, m)
    u = int(round(u_b))
    total = math.comb(n + m, n)
    return float(counts[u:].sum() / total)


def _normal_p(n: int, m: int, u_b: float, combined: np.ndarray) -> float:
    big_n = n + m
    mu = n * m / 2.0
    _, tie_counts = np.unique(combined, return_counts=True)
    tie_term = float(np.sum(tie_counts.astype(np.float64) ** 3 - tie_counts))
    var = (n * m / 12.0) * ((big_n + 1) - tie_term / (big_n * (big_n - 1)))
    if var <= 0.0:
        # all values identical: U is degenerate at its mean
        return 1.0 if u_b <= mu else 0.0
    z = (u_b - mu - 0.5) / math.sqrt(var)  # continuity-corrected
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney_one_sided(
    sample_a,
    sample_b,
    alternative: str = "b_greater",
    method: str = "auto",
) -> MannWhitneyResult:
    """One-sided Mann-Whitney U test of H1: sample_b stochastically greater.

    U_b counts (a, b) pairs where b wins (ties half); the p-value is
    P(U >= u_observed) under H0.  ``method`` is "auto" (exact when tie-free
    and n*m <= 400, else normal), "exact", or "normal".
    """
    if alternative != "b_greater":
        raise ValueError(f"unsupported alternative {alternative!r}; only 'b_greater'")
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("samples must be finite")
    n, m = a.size, b.size
    combined = np.concatenate([a, b])
    ranks = rankdata(combined)  # midranks for ties
    r_b = float(ranks[n:].sum())
    u_b = r_b - m * (m + 1) / 2.0

    tie_free = np.unique(combined).size == combined.size
    if method == "exact" and not tie_free:
        raise ValueError("exact method requires tie-free samples")
    use_exact = method == "exact" or (method == "auto" and tie_free and n * m <= EXACT_LIMIT)
    if use_exact:
        p = _exact_p(n, m, u_b)
    else:
        p = _normal_p(n, m, u_b, combined)
    return MannWhitneyResult(u_statistic=u_b, p_value=min(max(p, 0.0), 1.0))


# ---------------------------------------------------------------------------
# per-generation aggregation across seeds
# ---------------------------------------------------------------------------


@dataclass
class SeedSeries:
    """Aligned per-seed metric series: metrics[name] has shape (n_seeds, n_generations)."""

    generations: np.ndarray
    metrics: dict[str, np.ndarray]

    def __post_init__(self):
        self.generations = np.asarray(self.generations)
        g = self.generations.shape[0]
        if g == 0:
            raise ValueError("generations must be non-empty")
        for name, arr in self.metrics.items():
            arr = np.asarray(arr, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != g:
                raise ValueError(
                    f"metric {name!r} must have shape (n_seeds, {g}), got {arr.shape}"
                )
            if arr.shape[0] < 1:
                raise ValueError(f"metric {name!r} needs at least one seed")
            self.metrics[name] = arr


def median_iqr(series: SeedSeries, metric: str) -> dict[str, np.ndarray]:
    """Per-generation median and quartiles (linear-interpolation convention)."""
    if metric not in series.metrics:
        raise ValueError(
            f"unknown metric {metric!r}; available: {sorted(series.metrics)}"
        )
    values = series.metrics[metric]
    return {
        "median": np.median(values, axis=0),
        "q25": np.percentile(values, 25, axis=0),
        "q75": np.percentile(values, 75, axis=0),
    }


# ---------------------------------------------------------------------------
# final-score comparison table
# ---------------------------------------------------------------------------


@dataclass
class ComparisonTable:
    """Medians plus pairwise one-sided p-values, oriented 'column better than row'."""

    methods: list[str]
    medians: dict[str, float]
    p_values: dict[tuple[str, str], float]  # (row, column) -> p

    def rows(self) -> list[list[str]]:
        out = [["method", "median"] + self.methods]
        for row in self.methods:
            cells = [row, repr(self.medians[row])]
            for col in self.methods:
                cells.append("-" if col == row else repr(self.p_values[(row, col)]))
            out.append(cells)
        return out

    def to_csv_text(self) -> str:
        return "\n".join(",".join(r) for r in self.rows()) + "\n"

    def format(self) -> str:
        rows = self.rows()
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        return "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(r, widths)) for r in rows
        )


def compare_final(scores_by_method: dict[str, np.ndarray], direction: str = "greater") -> ComparisonTable:
    """Pairwise one-sided U tests between methods' final scores.

    p_values[(row, col)] is the p-value for 'col better than row', where
    better means greater when direction='greater' and smaller when
    direction='less'.  Diagonal entries are omitted (rendered as '-').
    """
    if direction not in ("greater", "less"):
        raise ValueError(f"direction must be 'greater' or 'less', got {direction!r}")
    if len(scores_by_method) < 2:
        raise ValueError("need at least 2 methods to compare")
    scores = {}
    for name, vals in scores_by_method.items():
        arr = np.asarray(vals, dtype=np.float64)
        if arr.size < 2:
            raise ValueError(f"method {name!r} needs >= 2 seeds, got {arr.size}")
        scores[name] = arr
    methods = list(scores)
    medians = {name: float(np.median(scores[name])) for name in methods}
    p_values: dict[tuple[str, str], float] = {}
    for row in methods:
        for col in methods:
            if row == col:
                continue
            if direction == "greater":
                res = mann_whitney_one_sided(scores[row], scores[col])
            else:
                res = mann_whitney_one_sided(scores[col], scores[row])
            p_values[(row, col)] = res.p_value
    return ComparisonTable(methods=methods, medians=medians, p_values=p_values)
