"""Annealed stochastic search over doping profiles, plus an exhaustive oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .excitation import Goal, bandgap, charge_transfer, homo_lumo, lifetime, overlap
from .grid import CoulombKernel, Grid, coulomb_kernel
from .nuclei import DEFAULT_CONSTRAINTS, ModelParams, ProfileConstraints, uniform_profile
from .scf import ScfParams, scf_ground_state

__all__ = [
    "SearchSchedule",
    "CandidateRecord",
    "SearchResult",
    "candidate_score",
    "propose_increment",
    "search",
    "exhaustive_search",
]

_RETRY_CAP = 100_000


@dataclass(frozen=True)
class SearchSchedule:
    """Annealing schedule: flip probability halves, sample count doubles per step."""

    p1: float = 1.0 / 3.0
    n1: int = 10
    steps: int = 4
    rng_seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.p1 <= 0.5):
            raise ValueError(f"p1 must be in (0, 1/2], got {self.p1}")
        if self.n1 < 1:
            raise ValueError(f"n1 must be >= 1, got {self.n1}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    def flip_probability(self, step: int) -> float:
        return self.p1 * 2.0 ** (1 - step)

    def n_proposals(self, step: int) -> int:
        return self.n1 * 2 ** (step - 1)


@dataclass
class CandidateRecord:
    """One evaluated configuration: all four functionals, for the scatter data."""

    profile: tuple[int, ...]
    charge_transfer: float
    overlap: float
    lifetime: float
    bandgap: float
    step: int
    accepted: bool
    converged: bool = True


@dataclass
class SearchResult:
    best: tuple[int, ...]
    best_score: float
    log: list[CandidateRecord]
    trajectory: tuple[tuple[int, ...], ...]


def candidate_score(goal: Goal, record: CandidateRecord) -> float:
    """Minimization score of a logged candidate; non-converged records score inf."""
    if not record.converged:
        return math.inf
    if goal.kind == "charge-transfer":
        return -record.charge_transfer
    if goal.kind == "overlap":
        return record.overlap
    if goal.kind == "lifetime":
        return record.lifetime
    if goal.kind == "bandgap-max":
        return -record.bandgap
    return (record.bandgap - goal.target) ** 2


def propose_increment(
    rng: np.random.Generator,
    p: float,
    current: tuple[int, ...],
    constraints: ProfileConstraints = DEFAULT_CONSTRAINTS,
) -> np.ndarray | None:
    """Draw a charge-conserving increment in {-1,0,1}^n keeping current+h in bounds.

    Each entry is +1 or -1 with probability p, else 0; draws are rejected until
    the increment is nonzero, sums to zero, and respects the bounds. Returns
    None if the retry cap is exhausted.
    """
    if not (0.0 < p <= 0.5):
        raise ValueError(f"flip probability must be in (0, 1/2], got {p}")
    z = np.asarray(current)
    for _ in range(_RETRY_CAP):
        u = rng.random(z.size)
        h = np.where(u < p, 1, 0) + np.where((u >= p) & (u < 2 * p), -1, 0)
        if not h.any() or h.sum() != 0:
            continue
        moved = z + h
        if moved.min() >= constraints.z_min and moved.max() <= constraints.z_max:
            return h
    return None


def _within_bounds(profile: np.ndarray, constraints: ProfileConstraints) -> bool:
    return profile.min() >= constraints.z_min and profile.max() <= constraints.z_max


class _Evaluator:
    """Runs SCF + all four functionals per profile, memoized by profile."""

    def __init__(self, params, scf, grid, kernel):
        self.params = params
        self.scf = scf
        self.grid = grid
        self.kernel = kernel
        self.cache: dict[tuple[int, ...], CandidateRecord] = {}

    def __call__(self, profile: tuple[int, ...], step: int) -> CandidateRecord:
        cached = self.cache.get(profile)
        if cached is None:
            state = scf_ground_state(profile, self.params, self.scf, self.grid, self.kernel)
            if state.converged:
                pair = homo_lumo(state)
                cached = CandidateRecord(
                    profile=profile,
                    charge_transfer=charge_transfer(pair),
                    overlap=overlap(pair),
                    lifetime=lifetime(state, pair, self.kernel),
                    bandgap=bandgap(pair),
                    step=step,
                    accepted=False,
                )
            else:
                cached = CandidateRecord(
                    profile=profile,
                    charge_transfer=math.nan,
                    overlap=math.nan,
                    lifetime=math.nan,
                    bandgap=math.nan,
                    step=step,
                    accepted=False,
                    converged=False,
                )
            self.cache[profile] = cached
        return CandidateRecord(
            profile=profile,
            charge_transfer=cached.charge_transfer,
            overlap=cached.overlap,
            lifetime=cached.lifetime,
            bandgap=cached.bandgap,
            step=step,
            accepted=False,
            converged=cached.converged,
        )


def search(
    goal: Goal,
    schedule: SearchSchedule,
    params: ModelParams,
    grid: Grid,
    constraints: ProfileConstraints = DEFAULT_CONSTRAINTS,
    scf: ScfParams | None = None,
) -> SearchResult:
    """Annealed random descent from the homogeneous chain.

    Step i draws n1*2^(i-1) increments with per-sign flip probability
    p1*2^(1-i), scores the current profile shifted by +h and (if in bounds)
    -h, and moves to the best candidate only if it improves, so the score
    trajectory is non-increasing. Every evaluated configuration is logged with
    all four functionals.
    """
    scf = scf or ScfParams()
    kernel = coulomb_kernel(grid, params.d)
    evaluate = _Evaluator(params, scf, grid, kernel)
    rng = np.random.Generator(np.random.Philox(schedule.rng_seed))

    current = uniform_profile(constraints)
    record = evaluate(current, 0)
    record.accepted = True
    log = [record]
    current_score = candidate_score(goal, record)
    if not math.isfinite(current_score):
        raise RuntimeError("SCF failed on the initial homogeneous profile")
    trajectory = [current]

    for step in range(1, schedule.steps + 1):
        p = schedule.flip_probability(step)
        base = np.asarray(current)
        step_records: list[CandidateRecord] = []
        for _ in range(schedule.n_proposals(step)):
            h = propose_increment(rng, p, current, constraints)
            if h is None:
                continue
            candidates = [base + h]
            if _within_bounds(base - h, constraints):
                candidates.append(base - h)
            for cand in candidates:
                step_records.append(evaluate(tuple(int(z) for z in cand), step))
        log.extend(step_records)

        best_idx, best_score = None, current_score
        for idx, rec in enumerate(step_records):
            s = candidate_score(goal, rec)
            if s < best_score:
                best_idx, best_score = idx, s
        if best_idx is not None:
            chosen = step_records[best_idx]
            chosen.accepted = True
            current = chosen.profile
            current_score = best_score
        trajectory.append(current)

    return SearchResult(
        best=current,
        best_score=current_score,
        log=log,
        trajectory=tuple(trajectory),
    )


def _count_profiles(constraints: ProfileConstraints) -> int:
    counts = {0: 1}
    for _ in range(constraints.n_atoms):
        nxt: dict[int, int] = {}
        for total, ways in counts.items():
            for z in range(constraints.z_min, constraints.z_max + 1):
                if total + z <= constraints.total:
                    nxt[total + z] = nxt.get(total + z, 0) + ways
        counts = nxt
    return counts.get(constraints.total, 0)


def _enumerate_profiles(constraints: ProfileConstraints):
    def rec(remaining_atoms: int, remaining_total: int, prefix: tuple[int, ...]):
        if remaining_atoms == 0:
            if remaining_total == 0:
                yield prefix
            return
        for z in range(constraints.z_min, constraints.z_max + 1):
            rest = remaining_total - z
            if (remaining_atoms - 1) * constraints.z_min <= rest <= (
                remaining_atoms - 1
            ) * constraints.z_max:
                yield from rec(remaining_atoms - 1, rest, prefix + (z,))

    yield from rec(constraints.n_atoms, constraints.total, ())


def exhaustive_search(
    goal: Goal,
    constraints: ProfileConstraints,
    params: ModelParams,
    grid: Grid,
    scf: ScfParams | None = None,
) -> tuple[tuple[int, ...], float]:
    """Exact optimum by full enumeration; only viable for tiny instances."""
    count = _count_profiles(constraints)
    if count > 100_000:
        raise ValueError(f"search space has {count} profiles, refusing more than 100000")
    if count == 0:
        raise ValueError("no feasible profile under the given constraints")
    scf = scf or ScfParams()
    kernel = coulomb_kernel(grid, params.d)
    evaluate = _Evaluator(params, scf, grid, kernel)
    best, best_score = None, math.inf
    for profile in _enumerate_profiles(constraints):
        rec = evaluate(profile, 0)
        s = candidate_score(goal, rec)
        if s < best_score:
            best, best_score = profile, s
    if best is None:
        raise RuntimeError("every enumerated profile failed to converge")
    return best, best_score
