"""Command-line front end: ground-state | evaluate | optimize | evolve."""
from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .excitation import (
    GOAL_KINDS,
    bandgap,
    center_of_mass,
    charge_transfer,
    homo_lumo,
    lifetime,
    overlap,
)
from .grid import coulomb_kernel
from .nuclei import external_potential, nuclear_density, profile_to_string
from .optimize import candidate_score, search
from .runio import fmt, write_csv, write_manifest, write_text
from .scf import scf_ground_state
from .tddft import evolve, excited_initial_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SCF = 3
EXIT_PROPAGATION = 4


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_scf(config: RunConfig, grid, kernel, profile, out: Path):
    state = scf_ground_state(profile, config.model, config.scf, grid, kernel)
    if not state.converged:
        write_text(
            out / "scf_failure.txt",
            [
                f"profile = {profile_to_string(profile)}",
                f"iterations = {state.iterations}",
                f"residual = {fmt(state.residual)}",
            ],
        )
        print(
            f"error: SCF did not converge after {state.iterations} iterations "
            f"(residual {state.residual:.3e})",
            file=sys.stderr,
        )
        return None
    return state


def cmd_ground_state(config: RunConfig) -> int:
    started = _now()
    grid = config.build_grid()
    kernel = coulomb_kernel(grid, config.model.d)
    profile = config.resolved_profile()
    out = _out_dir(config)
    state = _run_scf(config, grid, kernel, profile, out)
    if state is None:
        return EXIT_SCF
    pair = homo_lumo(state)
    mu = nuclear_density(profile, config.model, grid)
    v_ext = external_potential(mu, kernel)
    files = [
        write_csv(
            out / "eigenvalues.csv",
            ["index", "eigenvalue_au"],
            ((i + 1, e) for i, e in enumerate(state.eigenvalues)),
        ),
        write_csv(
            out / "density.csv",
            ["x_au", "rho_au", "mu_au", "v_ext_au"],
            zip(grid.nodes, state.density, mu, v_ext),
        ),
        write_csv(
            out / "orbitals.csv",
            ["x_au", "phi_homo", "phi_lumo", "rho_homo", "rho_lumo"],
            zip(grid.nodes, pair.homo, pair.lumo, pair.homo**2, pair.lumo**2),
        ),
    ]
    write_manifest(
        out, "ground-state", config.snapshot, config.schedule.rng_seed,
        started, _now(), files, __version__,
    )
    print(
        f"profile {profile_to_string(profile)}: gap = {bandgap(pair):.6f} a.u. "
        f"({state.iterations} SCF iterations); outputs in {out}"
    )
    return EXIT_OK


def cmd_evaluate(config: RunConfig) -> int:
    started = _now()
    grid = config.build_grid()
    kernel = coulomb_kernel(grid, config.model.d)
    profile = config.resolved_profile()
    out = _out_dir(config)
    state = _run_scf(config, grid, kernel, profile, out)
    if state is None:
        return EXIT_SCF
    pair = homo_lumo(state)
    lines = [
        f"profile = {profile_to_string(profile)}",
        f"charge_transfer = {fmt(charge_transfer(pair))}",
        f"overlap = {fmt(overlap(pair))}",
        f"lifetime = {fmt(lifetime(state, pair, kernel))}",
        f"bandgap = {fmt(bandgap(pair))}",
        f"eps_homo = {fmt(pair.eps_h)}",
        f"eps_lumo = {fmt(pair.eps_l)}",
        f"com_homo = {fmt(center_of_mass(grid, pair.homo))}",
        f"com_lumo = {fmt(center_of_mass(grid, pair.lumo))}",
    ]
    files = [write_text(out / "functionals.txt", lines)]
    write_manifest(
        out, "evaluate", config.snapshot, config.schedule.rng_seed,
        started, _now(), files, __version__,
    )
    print("\n".join(lines))
    return EXIT_OK


def cmd_optimize(config: RunConfig) -> int:
    started = _now()
    if config.goal is None:
        raise ConfigError("optimize requires a goal (--goal)")
    grid = config.build_grid()
    constraints = config.constraints()
    out = _out_dir(config)
    try:
        result = search(
            config.goal, config.schedule, config.model, grid, constraints, config.scf
        )
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCF

    best_record = next(rec for rec in result.log if rec.profile == result.best)
    lines = [
        f"profile = {profile_to_string(result.best)}",
        f"goal = {config.goal.kind}",
    ]
    if config.goal.target is not None:
        lines.append(f"target = {fmt(config.goal.target)}")
    lines += [
        f"score = {fmt(result.best_score)}",
        f"charge_transfer = {fmt(best_record.charge_transfer)}",
        f"overlap = {fmt(best_record.overlap)}",
        f"lifetime = {fmt(best_record.lifetime)}",
        f"bandgap = {fmt(best_record.bandgap)}",
    ]
    by_profile = {}
    for rec in result.log:
        by_profile.setdefault(rec.profile, rec)
    files = [
        write_text(out / "result.txt", lines),
        write_csv(
            out / "trajectory.csv",
            ["step", "profile", "score"],
            (
                (step, profile_to_string(prof), candidate_score(config.goal, by_profile[prof]))
                for step, prof in enumerate(result.trajectory)
            ),
        ),
        write_csv(
            out / "scan.csv",
            ["profile", "charge_transfer", "overlap", "lifetime", "bandgap",
             "step", "accepted", "converged"],
            (
                (profile_to_string(r.profile), r.charge_transfer, r.overlap,
                 r.lifetime, r.bandgap, r.step, r.accepted, r.converged)
                for r in result.log
            ),
        ),
    ]
    write_manifest(
        out, "optimize", config.snapshot, config.schedule.rng_seed,
        started, _now(), files, __version__,
    )
    print(
        f"best profile {profile_to_string(result.best)} "
        f"(score {result.best_score:.6g}, bandgap {best_record.bandgap:.4f} a.u.); "
        f"{len(result.log)} evaluations logged; outputs in {out}"
    )
    return EXIT_OK


def cmd_evolve(config: RunConfig) -> int:
    started = _now()
    grid = config.build_grid()
    kernel = coulomb_kernel(grid, config.model.d)
    profile = config.resolved_profile()
    out = _out_dir(config)
    state = _run_scf(config, grid, kernel, profile, out)
    if state is None:
        return EXIT_SCF
    pair = homo_lumo(state)
    mu = nuclear_density(profile, config.model, grid)
    v_ext = external_potential(mu, kernel)
    try:
        trace = evolve(
            excited_initial_state(state, pair), config.tddft, kernel, v_ext,
            rho_ground=state.density,
        )
    except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
        print(f"error: propagation failed: {exc}", file=sys.stderr)
        return EXIT_PROPAGATION

    files = [
        write_csv(
            out / "trace.csv",
            ["t_au", "com_lumo_au", "com_hole_au", "norm_drift", "mass"],
            zip(trace.times, trace.com_lumo, trace.com_hole, trace.norm_drift, trace.mass),
        ),
        write_csv(
            out / "density_movie.csv",
            ["t_au", "x_au", "delta_rho_au"],
            (
                (t, x, v)
                for t, snap in zip(trace.times, trace.density_minus_ground)
                for x, v in zip(grid.nodes, snap)
            ),
        ),
    ]
    write_manifest(
        out, "evolve", config.snapshot, config.schedule.rng_seed,
        started, _now(), files, __version__,
    )
    print(
        f"propagated to t = {trace.times[-1]:.3f} a.u. "
        f"(max norm drift {trace.norm_drift.max():.2e}); outputs in {out}"
    )
    return EXIT_OK


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="key=value config file")
    parser.add_argument("--profile", metavar="STR", help="doping profile, one digit per site")
    parser.add_argument("--seed", type=int, metavar="U64", help="search seed")
    parser.add_argument("--goal", choices=GOAL_KINDS, help="optimization goal")
    parser.add_argument("--target", type=float, metavar="FLOAT",
                        help="target bandgap (bandgap-target only)")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--dx", type=float, metavar="FLOAT", help="grid spacing")
    parser.add_argument("--set", dest="assignments", action="append", default=[],
                        metavar="KEY=VALUE", help="override any config key")


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    values: dict[str, str] = {}
    for attr, key in [
        ("profile", "run.profile"),
        ("seed", "schedule.seed"),
        ("goal", "run.goal"),
        ("target", "run.target"),
        ("out", "run.out"),
        ("dx", "grid.dx"),
    ]:
        value = getattr(args, attr)
        if value is not None:
            values[key] = str(value)
    for item in args.assignments:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        values[key.strip()] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dopewire",
        description="1D Kohn-Sham chain model: ground states, excitation goals, "
        "doping-profile optimization, and real-time propagation.",
    )
    parser.add_argument("--version", action="version", version=f"dopewire {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in [
        ("ground-state", cmd_ground_state, "solve the ground state and dump spectra"),
        ("evaluate", cmd_evaluate, "evaluate all excitation functionals for one profile"),
        ("optimize", cmd_optimize, "stochastic search for an optimal doping profile"),
        ("evolve", cmd_evolve, "propagate the excited state in real time"),
    ]:
        sp = sub.add_parser(name, help=text)
        _add_common_flags(sp)
        sp.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config, _overrides(args))
        return args.func(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
