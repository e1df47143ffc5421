"""Command-line interface: run, compare, sweep, export-centroids.

Output locations default under the directory named by the
``SMOLQD_OUTPUT_ROOT`` environment variable (fallback: ``runs/``).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from smolqd import config as cfg
from smolqd.archive import compute_cvt_centroids, export_archive_csv, export_centroids_csv
from smolqd.runner import cvt_samples_for, read_metrics_csv, run_experiment, write_metrics_csv
from smolqd.stats import compare_final

OUTPUT_ROOT_ENV = "SMOLQD_OUTPUT_ROOT"


def _output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def _load_raw(config_path: str | None, overrides: list[str], seed: int | None) -> dict[str, str]:
    raw = cfg.load_config_file(config_path) if config_path else {}
    raw = cfg.apply_overrides(raw, overrides)
    if seed is not None:
        raw["seed"] = str(seed)
    return raw


def _execute_run(raw: dict[str, str], out_override: str | None) -> Path:
    resolved = cfg.resolve_config(raw)
    rc = resolved.run_config
    if out_override:
        out_dir = Path(out_override)
    elif rc.output_dir:
        out_dir = Path(rc.output_dir)
    else:
        out_dir = _output_root() / f"{rc.task}_{rc.schedule.kind}_seed{rc.seed}"
    resolved.flat["output_dir"] = str(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    result = run_experiment(rc)

    write_metrics_csv(result.records, out_dir / "metrics.csv")
    export_archive_csv(result.archive, out_dir / "archive.csv")
    export_centroids_csv(result.archive.centroids, out_dir / "centroids.csv")
    (out_dir / "run_meta").write_text(cfg.format_run_meta(resolved.flat))

    final = result.records[-1]
    print(
        f"run complete: {out_dir}  coverage={final.coverage:.4f}"
        f" max_fitness={'' if final.max_fitness is None else f'{final.max_fitness:.6g}'}"
        f" evaluations={final.evaluations}"
    )
    return out_dir


def _final_metric(run_dir: Path, metric: str) -> float:
    metrics_path = run_dir / "metrics.csv"
    if not metrics_path.exists():
        raise ValueError(f"missing metrics file: {metrics_path}")
    header, rows = read_metrics_csv(metrics_path)
    if metric not in header:
        raise ValueError(f"unknown metric {metric!r}; valid metric columns: {', '.join(header)}")
    if not rows:
        raise ValueError(f"no data rows in {metrics_path}")
    value = rows[-1][header.index(metric)]
    if value == "":
        raise ValueError(f"metric {metric!r} is empty in the final row of {metrics_path}")
    return float(value)


def _compare_dirs(
    run_dirs: list[Path], labels: list[str], metric: str, direction: str, out_path: Path
) -> None:
    if len(labels) != len(run_dirs):
        raise ValueError(f"got {len(run_dirs)} run dirs but {len(labels)} labels")
    groups: dict[str, list[float]] = {}
    for label, run_dir in zip(labels, run_dirs):
        groups.setdefault(label, []).append(_final_metric(run_dir, metric))
    for label, values in groups.items():
        if len(values) < 2:
            raise ValueError(f"label {label!r} has {len(values)} run(s); need >= 2 per label")
    table = compare_final({k: np.array(v) for k, v in groups.items()}, direction=direction)
    print(f"final {metric!r} (p-values: column method better than row method)")
    print(table.format())
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(table.to_csv_text())
    print(f"wrote {out_path}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    raw = _load_raw(args.config, args.set, args.seed)
    _execute_run(raw, args.out)
    return 0


def cmd_compare(args) -> int:
    labels = [s.strip() for s in args.labels.split(",") if s.strip()]
    _compare_dirs(
        [Path(d) for d in args.run_dirs],
        labels,
        args.metric,
        args.direction,
        Path(args.out),
    )
    return 0


def cmd_sweep(args) -> int:
    schedules = [s.strip() for s in args.schedules.split(",") if s.strip()]
    if not schedules:
        raise ValueError("sweep needs at least one schedule")
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    except ValueError:
        raise ValueError(f"seeds must be a comma-separated list of integers, got {args.seeds!r}")
    if not seeds:
        raise ValueError("sweep needs at least one seed")
    base = _load_raw(args.config, args.set, None)
    root = Path(args.out) if args.out else _output_root()

    run_dirs: list[Path] = []
    labels: list[str] = []
    for schedule in schedules:
        for seed in seeds:
            sub = root / schedule / f"seed{seed}"
            if sub.exists() and any(sub.iterdir()) and not args.force:
                raise ValueError(f"output directory {sub} already has contents; use --force to overwrite")
            raw = dict(base)
            raw["schedule"] = schedule
            raw["seed"] = str(seed)
            _execute_run(raw, str(sub))
            run_dirs.append(sub)
            labels.append(schedule)

    _compare_dirs(run_dirs, labels, args.metric, args.direction, root / "comparison.csv")
    return 0


def cmd_export_centroids(args) -> int:
    n_samples = args.samples if args.samples is not None else cvt_samples_for(args.k)
    centroids = compute_cvt_centroids(args.k, args.dim, n_samples, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_centroids_csv(centroids, out)
    print(f"wrote {args.k} centroids to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smolqd",
        description="CVT MAP-Elites with developmentally scheduled actuator strength",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment run")
    p_run.add_argument("--config", help="flat key = value config file")
    p_run.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key"
    )
    p_run.add_argument("--seed", type=int, help="override the seed")
    p_run.add_argument("--out", help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="compare final metrics across run directories")
    p_cmp.add_argument("run_dirs", nargs="+", help="run output directories")
    p_cmp.add_argument("--labels", required=True, help="comma list of method labels, one per dir")
    p_cmp.add_argument("--metric", default="coverage", help="metrics.csv column to compare")
    p_cmp.add_argument(
        "--direction",
        choices=("greater", "less"),
        default="greater",
        help="whether larger metric values are better",
    )
    p_cmp.add_argument("--out", default="comparison.csv", help="output table path")
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="run schedules x seeds, then compare")
    p_sweep.add_argument("--config", help="base config file")
    p_sweep.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p_sweep.add_argument("--schedules", required=True, help="comma list of schedule kinds")
    p_sweep.add_argument("--seeds", required=True, help="comma list of integer seeds")
    p_sweep.add_argument("--metric", default="coverage")
    p_sweep.add_argument("--direction", choices=("greater", "less"), default="greater")
    p_sweep.add_argument("--out", help="root output directory (default: output root)")
    p_sweep.add_argument("--force", action="store_true", help="overwrite existing run directories")
    p_sweep.set_defaults(func=cmd_sweep)

    p_exp = sub.add_parser("export-centroids", help="compute and export CVT centroids")
    p_exp.add_argument("--k", type=int, default=1024)
    p_exp.add_argument("--dim", type=int, default=2)
    p_exp.add_argument("--samples", type=int, help="sample count (default: 50*k, floor 100000)")
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--out", required=True)
    p_exp.set_defaults(func=cmd_export_centroids)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
