"""Flat key-value run configuration.

The config file is plain ``key = value`` text (``#`` comments and blank
lines ignored); every RunConfig, ScheduleConfig, VariationParams and task
parameter is one key, so command-line overrides are plain ``key=value``
pairs and the emitted ``run_meta`` file is itself a valid config — replaying
a run is ``smolqd run --config <run_dir>/run_meta``.

Unknown keys are rejected; missing keys take the documented defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from smolqd.runner import RunConfig
from smolqd.schedules import KINDS, ScheduleConfig
from smolqd.variation import VariationParams

_TASKS = ("scaled_arm", "crawler")


@dataclass(frozen=True)
class FieldSpec:
    kind: str  # "int" | "float" | "str" | "int_list"
    default: object
    help: str


# schema order is also run_meta emission order
SCHEMA: dict[str, FieldSpec] = {
    # run
    "task": FieldSpec("str", "scaled_arm", "task name: scaled_arm or crawler"),
    "seed": FieldSpec("int", 0, "rng seed; the whole run is reproducible from it"),
    "output_dir": FieldSpec("str", "", "output directory (empty = derive from task/schedule/seed)"),
    "k": FieldSpec("int", 1024, "number of CVT cells"),
    "batch_size": FieldSpec("int", 256, "candidates per generation"),
    "generations_per_phase": FieldSpec("int", 20, "generations in each schedule phase"),
    "init_sigma": FieldSpec("float", 0.1, "std of the initial genome distribution"),
    # schedule
    "schedule": FieldSpec("str", "constant", f"schedule kind: one of {', '.join(KINDS)}"),
    "alpha": FieldSpec("float", 1.0, "fixed actuator scale (constant schedule only)"),
    "random_lo": FieldSpec("float", 0.5, "lower alpha bound (random schedule)"),
    "random_hi": FieldSpec("float", 1.5, "upper alpha bound (random schedule)"),
    "total_phases": FieldSpec("int", 100, "number of equal phases in the run"),
    "final_fixed_phases": FieldSpec("int", 10, "trailing phases pinned at alpha = 1"),
    "extinction_sigma": FieldSpec("float", 0.0, "per-cell extinction probability at boundaries"),
    "human_peak_phase": FieldSpec("int", 0, "smol_human peak phase (0 = one third of the ramp)"),
    # variation
    "sigma_iso": FieldSpec("float", 0.005, "isotropic noise std of iso+line"),
    "sigma_line": FieldSpec("float", 0.05, "directional noise std of iso+line"),
    # scaled_arm
    "n_joints": FieldSpec("int", 8, "arm joint count"),
    "joint_limit": FieldSpec("float", math.pi / 2, "arm joint angle limit (radians)"),
    # crawler
    "n_masses": FieldSpec("int", 4, "chain length of the crawler"),
    "mass": FieldSpec("float", 1.0, "mass per body, kg"),
    "rest_length": FieldSpec("float", 0.5, "link rest length, m"),
    "k_s": FieldSpec("float", 200.0, "link spring stiffness, N/m"),
    "c_s": FieldSpec("float", 2.0, "link damping, N*s/m"),
    "gear": FieldSpec("float", 30.0, "actuator force scale, N"),
    "gravity": FieldSpec("float", 9.81, "gravity, m/s^2"),
    "k_g": FieldSpec("float", 5000.0, "ground contact stiffness, N/m"),
    "c_g": FieldSpec("float", 50.0, "ground contact damping, N*s/m"),
    "mu": FieldSpec("float", 0.8, "friction coefficient"),
    "dt": FieldSpec("float", 0.01, "integration timestep, s"),
    "episode_steps": FieldSpec("int", 500, "steps per crawler episode"),
    "hidden_sizes": FieldSpec("int_list", (16, 16), "controller hidden layer sizes"),
}

_ARM_KEYS = ("n_joints", "joint_limit")
_CRAWLER_KEYS = (
    "n_masses",
    "mass",
    "rest_length",
    "k_s",
    "c_s",
    "gear",
    "gravity",
    "k_g",
    "c_g",
    "mu",
    "dt",
    "episode_steps",
    "hidden_sizes",
)


def _parse_value(key: str, raw: str):
    spec = SCHEMA[key]
    text = raw.strip()
    try:
        if spec.kind == "int":
            return int(text)
        if spec.kind == "float":
            return float(text)
        if spec.kind == "int_list":
            if not text:
                return ()
            return tuple(int(part.strip()) for part in text.split(","))
        return text
    except ValueError as err:
        raise ValueError(f"invalid value for config key {key!r}: {raw!r} ({err})") from None


def _format_value(key: str, value) -> str:
    spec = SCHEMA[key]
    if spec.kind == "float":
        return repr(float(value))
    if spec.kind == "int_list":
        return ",".join(str(int(v)) for v in value)
    return str(value)


def parse_config_text(text: str) -> dict[str, str]:
    """Raw key -> string mapping; later duplicates win."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    return raw


def load_config_file(path) -> dict[str, str]:
    return parse_config_text(Path(path).read_text())


def apply_overrides(raw: dict[str, str], overrides: list[str]) -> dict[str, str]:
    out = dict(raw)
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override must be KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


@dataclass
class ResolvedConfig:
    run_config: RunConfig
    flat: dict[str, object]  # every schema key, typed, in schema order


def resolve_config(raw: dict[str, str]) -> ResolvedConfig:
    """Validate raw strings against the schema and build the RunConfig."""
    unknown = [k for k in raw if k not in SCHEMA]
    if unknown:
        raise ValueError(f"unknown config key{'s' if len(unknown) > 1 else ''}: {', '.join(sorted(unknown))}")
    flat = {
        key: (_parse_value(key, raw[key]) if key in raw else spec.default)
        for key, spec in SCHEMA.items()
    }
    if flat["task"] not in _TASKS:
        raise ValueError(f"task: unknown task {flat['task']!r}; expected one of {_TASKS}")
    if flat["schedule"] not in KINDS:
        raise ValueError(
            f"schedule: unknown schedule {flat['schedule']!r}; expected one of {KINDS}"
        )
    schedule = ScheduleConfig(
        kind=flat["schedule"],
        alpha=flat["alpha"],
        random_lo=flat["random_lo"],
        random_hi=flat["random_hi"],
        total_phases=flat["total_phases"],
        final_fixed_phases=flat["final_fixed_phases"],
        extinction_sigma=flat["extinction_sigma"],
        human_peak_phase=flat["human_peak_phase"],
    )
    variation = VariationParams(sigma_iso=flat["sigma_iso"], sigma_line=flat["sigma_line"])
    if flat["task"] == "scaled_arm":
        task_params = {key: flat[key] for key in _ARM_KEYS}
    else:
        task_params = {key: flat[key] for key in _CRAWLER_KEYS}
    run_config = RunConfig(
        task=flat["task"],
        task_params=task_params,
        schedule=schedule,
        k=flat["k"],
        batch_size=flat["batch_size"],
        generations_per_phase=flat["generations_per_phase"],
        init_sigma=flat["init_sigma"],
        variation=variation,
        seed=flat["seed"],
        output_dir=flat["output_dir"] or None,
    )
    return ResolvedConfig(run_config=run_config, flat=flat)


def format_run_meta(flat: dict[str, object]) -> str:
    """The resolved config as config-file text (subsequently replayable)."""
    lines = [f"{key} = {_format_value(key, flat[key])}" for key in SCHEMA]
    return "\n".join(lines) + "\n"
