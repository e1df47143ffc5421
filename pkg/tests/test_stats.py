"""Mann-Whitney U test, per-seed aggregation, comparison tables."""

import itertools
import math

import numpy as np
import pytest

from smolqd.stats import (
    ComparisonTable,
    MannWhitneyResult,
    SeedSeries,
    compare_final,
    mann_whitney_one_sided,
    median_iqr,
)


def enumerate_p_value(a, b):
    """Exact P(U_b >= u_obs) by enumerating every split of the pooled sample."""
    pooled = np.concatenate([a, b])
    n, m = len(a), len(b)
    order = np.sort(pooled)

    def u_of(b_values):
        u = 0.0
        for bv in b_values:
            for av in a_values:
                if bv > av:
                    u += 1.0
                elif bv == av:
                    u += 0.5
        return u

    a_values = list(a)
    u_obs = u_of(list(b))
    count = 0
    total = 0
    for b_idx in itertools.combinations(range(n + m), m):
        b_vals = [order[i] for i in b_idx]
        a_values = [order[i] for i in range(n + m) if i not in set(b_idx)]
        if u_of(b_vals) >= u_obs - 1e-12:
            count += 1
        total += 1
    a_values = list(a)
    return count / total


class TestMannWhitney:
    def test_disjoint_three_vs_three(self):
        res = mann_whitney_one_sided([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
        assert res.u_statistic == 9.0
        assert res.p_value == pytest.approx(1.0 / 20.0, abs=1e-15)

    def test_single_elements(self):
        res = mann_whitney_one_sided([1.0], [2.0])
        assert res.u_statistic == 1.0
        assert res.p_value == pytest.approx(0.5, abs=1e-15)

    def test_identical_samples_not_significant(self):
        res = mann_whitney_one_sided([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert res.p_value >= 0.5

    def test_u_a_plus_u_b_is_nm(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n, m = rng.integers(2, 12, size=2)
            a = rng.standard_normal(n)
            b = rng.standard_normal(m)
            u_b = mann_whitney_one_sided(a, b).u_statistic
            u_a = mann_whitney_one_sided(b, a).u_statistic
            assert u_a + u_b == pytest.approx(n * m, abs=1e-12)

    def test_exact_matches_enumeration_small_samples(self):
        rng = np.random.default_rng(1)
        for n in range(1, 6):
            for m in range(1, 6):
                a = rng.standard_normal(n)
                b = rng.standard_normal(m)
                res = mann_whitney_one_sided(a, b, method="exact")
                assert res.p_value == pytest.approx(enumerate_p_value(a, b), abs=1e-12)

    def test_disjoint_seven_vs_seven(self):
        a = np.arange(7, dtype=np.float64)
        b = np.arange(7, dtype=np.float64) + 100.0
        res = mann_whitney_one_sided(a, b)
        assert res.u_statistic == 49.0
        assert res.p_value == pytest.approx(1.0 / math.comb(14, 7), rel=1e-12)

    def test_disjoint_eight_vs_eight(self):
        a = np.arange(8, dtype=np.float64)
        b = np.arange(8, dtype=np.float64) + 100.0
        res = mann_whitney_one_sided(a, b)
        assert res.p_value == pytest.approx(1.0 / math.comb(16, 8), rel=1e-12)
        assert res.p_value == pytest.approx(1.0 / 12870.0, rel=1e-12)

    def test_normal_approximation_close_to_exact(self):
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(30):
            a = rng.standard_normal(20)
            b = rng.standard_normal(20) + 0.3
            exact = mann_whitney_one_sided(a, b, method="exact").p_value
            normal = mann_whitney_one_sided(a, b, method="normal").p_value
            worst = max(worst, abs(exact - normal))
        assert worst < 0.003

    def test_auto_uses_normal_for_large_or_tied(self):
        # ties force the normal path even for small samples
        res = mann_whitney_one_sided([1.0, 2.0, 2.0], [2.0, 3.0, 4.0])
        assert 0.0 <= res.p_value <= 1.0
        # large samples take the normal path under auto without error
        rng = np.random.default_rng(3)
        res = mann_whitney_one_sided(rng.standard_normal(30), rng.standard_normal(30))
        assert 0.0 <= res.p_value <= 1.0

    def test_exact_method_rejects_ties(self):
        with pytest.raises(ValueError):
            mann_whitney_one_sided([1.0, 2.0], [2.0, 3.0], method="exact")

    def test_all_values_identical_degenerate(self):
        res = mann_whitney_one_sided([5.0, 5.0, 5.0], [5.0, 5.0, 5.0])
        assert res.p_value == 1.0

    def test_ties_counted_half(self):
        res = mann_whitney_one_sided([1.0, 2.0], [2.0, 3.0])
        # pairs: (1,2)win (1,3)win (2,2)half (2,3)win = 3.5
        assert res.u_statistic == 3.5

    @pytest.mark.parametrize(
        "kw",
        [
            {"alternative": "two_sided"},
            {"method": "bogus"},
        ],
    )
    def test_bad_options_raise(self, kw):
        with pytest.raises(ValueError):
            mann_whitney_one_sided([1.0], [2.0], **kw)

    def test_empty_or_nonfinite_raise(self):
        with pytest.raises(ValueError):
            mann_whitney_one_sided([], [1.0])
        with pytest.raises(ValueError):
            mann_whitney_one_sided([1.0], [float("nan")])

    def test_result_type(self):
        res = mann_whitney_one_sided([1.0], [2.0])
        assert isinstance(res, MannWhitneyResult)


class TestSeedSeries:
    def make(self):
        gens = np.arange(5)
        cov = np.array([[0.1, 0.2, 0.3, 0.4, 0.5], [0.2, 0.3, 0.4, 0.5, 0.6], [0.0, 0.1, 0.2, 0.3, 0.9]])
        return SeedSeries(generations=gens, metrics={"coverage": cov})

    def test_median_iqr_shapes_and_convention(self):
        out = median_iqr(self.make(), "coverage")
        np.testing.assert_allclose(out["median"], [0.1, 0.2, 0.3, 0.4, 0.6])
        # linear interpolation between order statistics
        np.testing.assert_allclose(out["q25"], [0.05, 0.15, 0.25, 0.35, 0.55])
        np.testing.assert_allclose(out["q75"], [0.15, 0.25, 0.35, 0.45, 0.75])

    def test_quartiles_interpolate_on_even_counts(self):
        series = SeedSeries(
            generations=np.arange(1),
            metrics={"m": np.array([[1.0], [2.0], [3.0], [4.0]])},
        )
        out = median_iqr(series, "m")
        assert out["median"][0] == 2.5
        assert out["q25"][0] == 1.75
        assert out["q75"][0] == 3.25

    def test_unknown_metric_raises(self):
        with pytest.raises(ValueError, match="unknown metric"):
            median_iqr(self.make(), "fitness")

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            SeedSeries(generations=np.arange(3), metrics={"m": np.zeros((2, 4))})
        with pytest.raises(ValueError):
            SeedSeries(generations=np.array([]), metrics={})


class TestCompareFinal:
    def test_orientation_column_better_than_row(self):
        low = np.array([1.0, 2.0, 3.0])
        high = np.array([4.0, 5.0, 6.0])
        table = compare_final({"low": low, "high": high})
        assert table.p_values[("low", "high")] == pytest.approx(1.0 / 20.0, abs=1e-15)
        assert table.p_values[("high", "low")] == pytest.approx(1.0, abs=1e-15)
        assert table.medians == {"low": 2.0, "high": 5.0}

    def test_direction_less_flips_orientation(self):
        low = np.array([1.0, 2.0, 3.0])
        high = np.array([4.0, 5.0, 6.0])
        table = compare_final({"low": low, "high": high}, direction="less")
        assert table.p_values[("high", "low")] == pytest.approx(1.0 / 20.0, abs=1e-15)

    def test_rows_have_dash_diagonal(self):
        table = compare_final({"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])})
        rows = table.rows()
        assert rows[0] == ["method", "median", "a", "b"]
        assert rows[1][2] == "-"
        assert rows[2][3] == "-"

    def test_csv_text_parses(self):
        table = compare_final({"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])})
        lines = table.to_csv_text().strip().split("\n")
        assert len(lines) == 3
        assert lines[0] == "method,median,a,b"

    def test_three_methods_all_pairs(self):
        rng = np.random.default_rng(4)
        table = compare_final(
            {name: rng.standard_normal(5) for name in ("x", "y", "z")}
        )
        assert len(table.p_values) == 6

    def test_validation(self):
        with pytest.raises(ValueError):
            compare_final({"only": np.array([1.0, 2.0])})
        with pytest.raises(ValueError):
            compare_final({"a": np.array([1.0]), "b": np.array([2.0, 3.0])})
        with pytest.raises(ValueError):
            compare_final({"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])}, direction="up")

    def test_format_is_aligned(self):
        table = compare_final({"aa": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])})
        text = table.format()
        lines = text.split("\n")
        assert len({len(ln) for ln in lines}) == 1  # fixed-width rows
