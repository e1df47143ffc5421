"""Config file parsing/round-tripping and the command-line entry points.

The CVT sample count is patched down here: these tests exercise plumbing
(files, overrides, exit codes), not centroid quality, and the real sample
rule is pinned in test_runner.
"""

import math

import numpy as np
import pytest

import smolqd.runner
from smolqd.cli import main
from smolqd.config import (
    SCHEMA,
    apply_overrides,
    format_run_meta,
    load_config_file,
    parse_config_text,
    resolve_config,
)
from smolqd.runner import read_metrics_csv
from smolqd.schedules import ScheduleConfig
from smolqd.variation import VariationParams

TINY = [
    "k=8",
    "batch_size=8",
    "generations_per_phase=2",
    "total_phases=2",
    "final_fixed_phases=1",
    "n_joints=4",
]


@pytest.fixture(autouse=True)
def fast_cvt(monkeypatch):
    monkeypatch.setattr(smolqd.runner, "cvt_samples_for", lambda k: max(20 * k, 2000))


def tiny_args(*extra):
    out = []
    for item in TINY:
        out += ["--set", item]
    return out + list(extra)


class TestParseConfigText:
    def test_comments_blanks_and_whitespace(self):
        raw = parse_config_text("# a comment\n\n  k = 16 \n\ttask=crawler\n")
        assert raw == {"k": "16", "task": "crawler"}

    def test_last_duplicate_wins(self):
        assert parse_config_text("k = 1\nk = 2\n") == {"k": "2"}

    def test_missing_equals_reports_line_number(self):
        with pytest.raises(ValueError, match="line 3"):
            parse_config_text("k = 1\n\nnot a pair\n")

    def test_value_may_contain_equals(self):
        assert parse_config_text("output_dir = a=b")["output_dir"] == "a=b"


class TestResolveConfig:
    def test_defaults(self):
        resolved = resolve_config({})
        rc = resolved.run_config
        assert rc.task == "scaled_arm"
        assert (rc.k, rc.batch_size, rc.generations_per_phase) == (1024, 256, 20)
        assert rc.init_sigma == 0.1
        assert rc.seed == 0
        assert rc.output_dir is None
        assert rc.schedule == ScheduleConfig()
        assert rc.variation == VariationParams()
        assert rc.task_params == {"n_joints": 8, "joint_limit": math.pi / 2}
        assert set(resolved.flat) == set(SCHEMA)

    def test_crawler_task_params(self):
        rc = resolve_config({"task": "crawler", "hidden_sizes": "8,4"}).run_config
        assert rc.task_params["hidden_sizes"] == (8, 4)
        assert rc.task_params["n_masses"] == 4
        assert "n_joints" not in rc.task_params

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config key: sigma"):
            resolve_config({"sigma": "1"})
        with pytest.raises(ValueError, match="unknown config keys: bar, foo"):
            resolve_config({"foo": "1", "bar": "2"})

    def test_bad_value_names_the_key(self):
        with pytest.raises(ValueError, match="'k'"):
            resolve_config({"k": "abc"})

    def test_unknown_task_and_schedule(self):
        with pytest.raises(ValueError, match="unknown task"):
            resolve_config({"task": "walker"})
        with pytest.raises(ValueError, match="unknown schedule"):
            resolve_config({"schedule": "linear"})

    def test_empty_hidden_sizes(self):
        flat = resolve_config({"task": "crawler", "hidden_sizes": ""}).flat
        assert flat["hidden_sizes"] == ()

    def test_run_meta_round_trip(self):
        raw = {
            "task": "crawler",
            "schedule": "smol_human",
            "seed": "3",
            "k": "64",
            "joint_limit": "0.7853981633974483",
            "hidden_sizes": "8,4",
            "dt": "0.005",
        }
        flat = resolve_config(raw).flat
        replayed = resolve_config(parse_config_text(format_run_meta(flat))).flat
        assert replayed == flat

    def test_load_config_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("k = 32\nschedule = smol\n")
        assert load_config_file(path) == {"k": "32", "schedule": "smol"}


class TestApplyOverrides:
    def test_applies_and_strips(self):
        out = apply_overrides({"k": "1"}, ["k = 2", "seed=5"])
        assert out == {"k": "2", "seed": "5"}

    def test_original_untouched(self):
        base = {"k": "1"}
        apply_overrides(base, ["k=2"])
        assert base == {"k": "1"}

    def test_bad_format(self):
        with pytest.raises(ValueError, match="KEY=VALUE"):
            apply_overrides({}, ["just-a-word"])


class TestCmdRun:
    def test_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "one"
        assert main(["run", *tiny_args("--out", str(out))]) == 0
        for name in ("metrics.csv", "archive.csv", "centroids.csv", "run_meta"):
            assert (out / name).exists()
        header, rows = read_metrics_csv(out / "metrics.csv")
        assert len(rows) == 1 + 2 * 2  # seed log + phases * generations
        assert "run complete:" in capsys.readouterr().out

    def test_run_meta_replays_byte_identical(self, tmp_path):
        first = tmp_path / "a"
        main(["run", *tiny_args("--out", str(first))])
        second = tmp_path / "b"
        assert main(["run", "--config", str(first / "run_meta"), "--out", str(second)]) == 0
        assert (second / "metrics.csv").read_bytes() == (first / "metrics.csv").read_bytes()
        assert (second / "archive.csv").read_bytes() == (first / "archive.csv").read_bytes()

    def test_seed_flag_overrides_config(self, tmp_path):
        out = tmp_path / "s"
        main(["run", *tiny_args("--set", "seed=1", "--seed", "9", "--out", str(out))])
        assert "seed = 9" in (out / "run_meta").read_text()

    def test_default_dir_under_output_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SMOLQD_OUTPUT_ROOT", str(tmp_path / "root"))
        assert main(["run", *tiny_args("--set", "schedule=smol", "--seed", "2")]) == 0
        assert (tmp_path / "root" / "scaled_arm_smol_seed2" / "metrics.csv").exists()

    def test_bad_key_exits_one(self, tmp_path, capsys):
        code = main(["run", "--set", "bogus=1", "--out", str(tmp_path / "x")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


def fake_run_dir(tmp_path, name, coverage):
    d = tmp_path / name
    d.mkdir()
    (d / "metrics.csv").write_text(
        "generation,phase,alpha,coverage,max_fitness,evaluations,reevaluations,discards\n"
        f"0,0,1.0,{coverage},-0.5,16,0,0\n"
    )
    return str(d)


class TestCmdCompare:
    def test_compares_and_writes_table(self, tmp_path, capsys):
        dirs = [
            fake_run_dir(tmp_path, "a0", 0.1),
            fake_run_dir(tmp_path, "a1", 0.2),
            fake_run_dir(tmp_path, "b0", 0.8),
            fake_run_dir(tmp_path, "b1", 0.9),
        ]
        out = tmp_path / "cmp.csv"
        code = main(["compare", *dirs, "--labels", "base,base,new,new", "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert text.startswith("method,median,base,new")
        assert "final 'coverage'" in capsys.readouterr().out

    def test_label_count_mismatch(self, tmp_path, capsys):
        dirs = [fake_run_dir(tmp_path, "a", 0.1), fake_run_dir(tmp_path, "b", 0.2)]
        assert main(["compare", *dirs, "--labels", "x", "--out", str(tmp_path / "c.csv")]) == 1
        assert "labels" in capsys.readouterr().err

    def test_single_run_per_label(self, tmp_path, capsys):
        dirs = [fake_run_dir(tmp_path, "a", 0.1), fake_run_dir(tmp_path, "b", 0.2)]
        assert main(["compare", *dirs, "--labels", "x,y", "--out", str(tmp_path / "c.csv")]) == 1
        assert "need >= 2" in capsys.readouterr().err

    def test_unknown_metric_lists_columns(self, tmp_path, capsys):
        dirs = [
            fake_run_dir(tmp_path, "a0", 0.1),
            fake_run_dir(tmp_path, "a1", 0.2),
            fake_run_dir(tmp_path, "b0", 0.8),
            fake_run_dir(tmp_path, "b1", 0.9),
        ]
        code = main(
            ["compare", *dirs, "--labels", "x,x,y,y", "--metric", "speed", "--out", str(tmp_path / "c.csv")]
        )
        assert code == 1
        err = capsys.readouterr().err
        assert "unknown metric" in err and "coverage" in err

    def test_missing_metrics_file(self, tmp_path, capsys):
        d1 = tmp_path / "empty1"
        d1.mkdir()
        assert main(["compare", str(d1), str(d1), "--labels", "x,x", "--out", str(tmp_path / "c.csv")]) == 1
        assert "missing metrics file" in capsys.readouterr().err


class TestCmdSweep:
    def test_sweep_layout_and_comparison(self, tmp_path, capsys):
        root = tmp_path / "sweep"
        code = main(
            [
                "sweep",
                *tiny_args(),
                "--schedules",
                "smol,constant",
                "--seeds",
                "0,1",
                "--out",
                str(root),
            ]
        )
        assert code == 0
        for schedule in ("smol", "constant"):
            for seed in (0, 1):
                assert (root / schedule / f"seed{seed}" / "metrics.csv").exists()
        assert (root / "comparison.csv").exists()
        table = (root / "comparison.csv").read_text()
        assert table.startswith("method,median,")

        # rerunning refuses to clobber finished runs...
        assert main(
            ["sweep", *tiny_args(), "--schedules", "smol,constant", "--seeds", "0,1", "--out", str(root)]
        ) == 1
        assert "use --force" in capsys.readouterr().err
        # ...unless forced
        assert main(
            [
                "sweep",
                *tiny_args(),
                "--schedules",
                "smol,constant",
                "--seeds",
                "0,1",
                "--out",
                str(root),
                "--force",
            ]
        ) == 0

    def test_bad_seed_list(self, tmp_path, capsys):
        code = main(["sweep", "--schedules", "smol", "--seeds", "0,x", "--out", str(tmp_path / "r")])
        assert code == 1
        assert "comma-separated list of integers" in capsys.readouterr().err


class TestCmdExportCentroids:
    def test_writes_k_rows(self, tmp_path):
        out = tmp_path / "nested" / "cvt.csv"
        code = main(
            ["export-centroids", "--k", "16", "--dim", "2", "--samples", "2000", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "cell_index,coord_0,coord_1"
        assert len(lines) == 17

    def test_deterministic_for_seed(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            main(["export-centroids", "--k", "8", "--samples", "2000", "--seed", "4", "--out", str(path)])
        assert a.read_bytes() == b.read_bytes()
