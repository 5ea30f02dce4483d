"""Run configuration: defaults, key=value files, environment and flag overrides."""
from __future__ import annotations

import os
from dataclasses import dataclass

from .excitation import Goal
from .grid import Grid, build_grid
from .nuclei import ModelParams, ProfileConstraints, profile_from_string, uniform_profile
from .optimize import SearchSchedule
from .scf import ScfParams
from .tddft import TddftParams

__all__ = ["ConfigError", "RunConfig", "parse_config", "ENV_PREFIX", "DEFAULTS"]

ENV_PREFIX = "DOPEWIRE_"


class ConfigError(Exception):
    """Unknown key, malformed value, or an invariant violation."""


def _positions_default() -> str:
    return ",".join(str(-9.5 + k) for k in range(20))


# key -> (default as text, type tag)
DEFAULTS: dict[str, tuple[str, str]] = {
    "grid.x_min": ("-10.0", "float"),
    "grid.x_max": ("10.0", "float"),
    "grid.dx": ("0.01", "float"),
    "model.positions": (_positions_default(), "floats"),
    "model.sigma2": ("0.0005", "float"),
    "model.d": ("0.01", "float"),
    "model.n_occ": ("60", "int"),
    "scf.mixing": ("0.3", "float"),
    "scf.tol": ("1e-8", "float"),
    "scf.max_iter": ("500", "int"),
    "scf.extra_states": ("4", "int"),
    "scf.history": ("5", "int"),
    "schedule.p1": ("0.3333333333333333", "float"),
    "schedule.n1": ("10", "int"),
    "schedule.steps": ("4", "int"),
    "schedule.seed": ("0", "int"),
    "tddft.dt": ("0.002", "float"),
    "tddft.t_final": ("10.0", "float"),
    "tddft.sample_every": ("50", "int"),
    "run.goal": ("", "str"),
    "run.target": ("", "str"),
    "run.profile": ("", "str"),
    "run.out": ("out", "str"),
}


def _convert(key: str, text: str):
    kind = DEFAULTS[key][1]
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
        if kind == "floats":
            return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key}: {text!r} ({exc})") from None
    return text


@dataclass(frozen=True)
class RunConfig:
    """Fully validated configuration for one command invocation."""

    x_min: float
    x_max: float
    dx: float
    model: ModelParams
    scf: ScfParams
    schedule: SearchSchedule
    tddft: TddftParams
    goal: Goal | None
    profile_text: str
    out: str
    snapshot: tuple[tuple[str, str], ...]

    def build_grid(self) -> Grid:
        try:
            return build_grid(self.x_min, self.x_max, self.dx)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def constraints(self) -> ProfileConstraints:
        try:
            return ProfileConstraints(
                n_atoms=len(self.model.positions), total=2 * self.model.n_occ
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def resolved_profile(self) -> tuple[int, ...]:
        """The requested doping profile, or the homogeneous chain by default."""
        constraints = self.constraints()
        try:
            if self.profile_text:
                return profile_from_string(self.profile_text, constraints)
            return uniform_profile(constraints)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _env_overrides(env) -> dict[str, str]:
    values = {}
    for key in DEFAULTS:
        name = ENV_PREFIX + key.replace(".", "_").upper()
        if name in env:
            values[key] = env[name]
    return values


def parse_config(
    path: str | None = None,
    overrides: dict[str, str] | None = None,
    env=None,
) -> RunConfig:
    """Merge defaults < config file < environment < command-line overrides."""
    text = {key: default for key, (default, _) in DEFAULTS.items()}
    layers = []
    if path is not None:
        layers.append(_read_config_file(path))
    layers.append(_env_overrides(os.environ if env is None else env))
    if overrides:
        layers.append(dict(overrides))
    for layer in layers:
        for key, value in layer.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            text[key] = value

    typed = {key: _convert(key, value) for key, value in text.items()}
    try:
        model = ModelParams(
            positions=typed["model.positions"],
            sigma2=typed["model.sigma2"],
            d=typed["model.d"],
            n_occ=typed["model.n_occ"],
        )
        scf = ScfParams(
            mixing=typed["scf.mixing"],
            tol=typed["scf.tol"],
            max_iter=typed["scf.max_iter"],
            extra_states=typed["scf.extra_states"],
            history=typed["scf.history"],
        )
        schedule = SearchSchedule(
            p1=typed["schedule.p1"],
            n1=typed["schedule.n1"],
            steps=typed["schedule.steps"],
            rng_seed=typed["schedule.seed"],
        )
        tddft = TddftParams(
            dt=typed["tddft.dt"],
            t_final=typed["tddft.t_final"],
            sample_every=typed["tddft.sample_every"],
        )
        goal = None
        if typed["run.goal"]:
            target = float(typed["run.target"]) if typed["run.target"] else None
            goal = Goal(kind=typed["run.goal"], target=target)
        elif typed["run.target"]:
            raise ValueError("run.target given without run.goal")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    return RunConfig(
        x_min=typed["grid.x_min"],
        x_max=typed["grid.x_max"],
        dx=typed["grid.dx"],
        model=model,
        scf=scf,
        schedule=schedule,
        tddft=tddft,
        goal=goal,
        profile_text=typed["run.profile"],
        out=typed["run.out"],
        snapshot=tuple(sorted(text.items())),
    )
