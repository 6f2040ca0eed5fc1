"""Seeded Monte Carlo simulation of the non-projective summand walk.

Trajectory ``t`` of a run seeded with ``seed`` draws its variates from a
Philox counter-based stream keyed by ``seed`` with the counter starting at
``t << 128``.  Its results therefore depend only on ``(seed, t)``, whatever
the batching. Every draw is a 53-bit integer ``k`` (the top bits of a raw
64-bit output). It is compared against exact rational cumulative
probabilities.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .chain_analysis import (
    TransitionMatrix,
    WeightFunction,
    build_transition,
    cut_points,
    format_fraction,
    lazy as lazy_chain,
    stationary,
)
from .multiplicity_graph import check_nontrivial

__all__ = [
    "SimulationConfig",
    "EmpiricalResult",
    "point_mass",
    "uniform_initial",
    "trajectory_stream",
    "step",
    "run",
    "tv_distance",
    "target_distribution",
    "trace_to_csv",
]

_BITS = 53
# Padding cut point; above every 53-bit draw.
_PAD = 1 << 62
# Below this many trajectories per block the scalar kernel is faster.
_SCALAR_BELOW = 16
_BLOCK_CELLS = 1 << 22


def point_mass(p: int, state: int) -> tuple[Fraction, ...]:
    if not 1 <= state <= p - 1:
        raise ValueError(f"start state {state} outside [1, {p - 1}]")
    return tuple(Fraction(int(i == state)) for i in range(1, p))


def uniform_initial(p: int, states: Sequence[int] | None = None) -> tuple[Fraction, ...]:
    states = list(range(1, p)) if states is None else list(states)
    share = Fraction(1, len(states))
    return tuple(share if i in states else Fraction(0) for i in range(1, p))


@dataclass(frozen=True)
class SimulationConfig:
    p: int
    n: int
    weights: WeightFunction
    initial: tuple[Fraction, ...]
    steps: int
    trajectories: int = 1
    seed: int = 0
    lazy: bool = False

    def __post_init__(self) -> None:
        check_nontrivial(self.p, self.n)
        initial = tuple(Fraction(x) for x in self.initial)
        if len(initial) != self.p - 1:
            raise ValueError(f"initial distribution needs {self.p - 1} entries")
        if any(x < 0 for x in initial) or sum(initial) != 1:
            raise ValueError("initial distribution must be non-negative and sum to 1")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.trajectories < 1:
            raise ValueError(f"trajectories must be >= 1, got {self.trajectories}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "initial", initial)

    @property
    def start_support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.initial, start=1) if x)

    def transition(self) -> TransitionMatrix:
        q = build_transition(self.p, self.n, self.weights)
        return lazy_chain(q) if self.lazy else q


@dataclass(frozen=True, eq=False)
class EmpiricalResult:
    config: SimulationConfig
    counts: tuple[int, ...]
    target: tuple[Fraction, ...]
    occupancy: tuple[int, ...] | None = None
    trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def steps(self) -> int:
        return self.config.steps

    @property
    def trajectories(self) -> int:
        return self.config.trajectories

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def empirical(self) -> tuple[float, ...]:
        return tuple(c / self.trajectories for c in self.counts)

    @property
    def tv_to_target(self) -> float:
        return float(tv_distance([Fraction(c, self.trajectories) for c in self.counts], self.target))

    def to_dict(self) -> dict:
        cfg = self.config
        out = {
            "p": cfg.p,
            "n": cfg.n,
            "weighting": cfg.weights.name,
            "lazy": cfg.lazy,
            "initial": [format_fraction(x) for x in cfg.initial],
            "steps": cfg.steps,
            "trajectories": cfg.trajectories,
            "seed": cfg.seed,
            "counts": list(self.counts),
            "empirical": list(self.empirical),
            "target": [format_fraction(x) for x in self.target],
            "tv_to_target": self.tv_to_target,
        }
        if self.occupancy is not None:
            out["occupancy"] = list(self.occupancy)
        return out


def trajectory_stream(seed: int, trajectory: int) -> np.random.Philox:
    return np.random.Philox(key=seed, counter=trajectory << 128)


def _draw(rng) -> int:
    bit_generator = getattr(rng, "bit_generator", rng)
    return int(bit_generator.random_raw()) >> (64 - _BITS)


def step(state: int, q: TransitionMatrix, rng) -> int:
    """Sample the successor of ``state`` under ``q`` using one 53-bit draw from ``rng``."""
    if not 1 <= state <= q.p - 1:
        raise ValueError(f"state {state} outside [1, {q.p - 1}]")
    states, cuts = q.thresholds[state - 1]
    return states[bisect_left(cuts, _draw(rng))]


def tv_distance(a: Sequence, b: Sequence) -> float | Fraction:
    """Total variation distance ``sum |a_i - b_i| / 2``."""
    if len(a) != len(b):
        raise ValueError(f"distributions have different lengths {len(a)} and {len(b)}")
    return sum(abs(x - y) for x, y in zip(a, b)) / 2


def target_distribution(config: SimulationConfig) -> tuple[Fraction, ...]:
    """Stationary distribution the walk started from ``config.initial`` converges to.

    For odd ``n`` the start must lie in one parity class; the target is that
    component's stationary distribution.
    """
    dists = stationary(config.p, config.n, config.weights)
    if len(dists) == 1:
        return dists[0].probs
    parities = {i % 2 for i in config.start_support}
    if len(parities) > 1:
        raise ValueError(
            "for odd n the initial distribution must be supported on a single "
            "parity class; analyse the odd and even components separately"
        )
    wanted = "odd" if parities == {1} else "even"
    return next(d.probs for d in dists if d.component == wanted)


def _padded_table(q: TransitionMatrix) -> tuple[np.ndarray, np.ndarray]:
    width = max(len(s) for s, _ in q.thresholds)
    states = np.zeros((q.p - 1, width), dtype=np.int64)
    cuts = np.full((q.p - 1, width), _PAD, dtype=np.int64)
    for k, (s, c) in enumerate(q.thresholds):
        states[k, : len(s)] = s
        cuts[k, : len(c)] = c
    return states, cuts


def _simulate_block(draws, q, init, table, occupancy, trace):
    """Advance a block of trajectories; ``draws[t, 0]`` picks the start state."""
    init_states, init_cuts = init
    size, width = draws.shape
    if size < _SCALAR_BELOW:
        finals = []
        for t in range(size):
            row = draws[t].tolist()
            state = init_states[bisect_left(init_cuts, row[0])]
            path = [state]
            for k in row[1:]:
                states, cuts = q.thresholds[state - 1]
                state = states[bisect_left(cuts, k)]
                path.append(state)
            if occupancy is not None:
                np.add.at(occupancy, np.array(path) - 1, 1)
            if trace is not None:
                trace.append(path)
            finals.append(state)
        return np.array(finals, dtype=np.int64)

    states_tab, cuts_tab = table
    init_states_arr = np.array(init_states, dtype=np.int64)
    init_cuts_arr = np.array(init_cuts, dtype=np.int64)
    # First cut point >= k, matching bisect_left.
    current = init_states_arr[np.searchsorted(init_cuts_arr, draws[:, 0], side="left")]
    path = [current] if trace is not None else None
    if occupancy is not None:
        np.add.at(occupancy, current - 1, 1)
    for s in range(1, width):
        k = draws[:, s]
        rows = current - 1
        idx = (cuts_tab[rows] < k[:, None]).sum(axis=1)
        current = states_tab[rows, idx]
        if occupancy is not None:
            np.add.at(occupancy, current - 1, 1)
        if path is not None:
            path.append(current)
    if trace is not None:
        trace.extend(np.stack(path, axis=1).tolist())
    return current


def run(config: SimulationConfig, *, occupancy: bool = False, record_trace: bool = False) -> EmpiricalResult:
    """Simulate ``config.trajectories`` independent walks of ``config.steps`` steps.

    Terminal-state counts are always returned. ``occupancy=True`` also counts
    visits over all steps, including step 0, summed over trajectories.
    ``record_trace=True`` keeps every path.
    """
    target = target_distribution(config)
    q = config.transition()
    init = cut_points(config.initial)
    table = _padded_table(q)
    width = config.steps + 1
    block = max(1, min(config.trajectories, _BLOCK_CELLS // width))
    counts = np.zeros(config.p - 1, dtype=np.int64)
    visits = np.zeros(config.p - 1, dtype=np.int64) if occupancy else None
    trace: list | None = [] if record_trace else None
    for start in range(0, config.trajectories, block):
        stop = min(start + block, config.trajectories)
        raw = np.empty((stop - start, width), dtype=np.uint64)
        for t in range(start, stop):
            raw[t - start] = trajectory_stream(config.seed, t).random_raw(width)
        draws = (raw >> np.uint64(64 - _BITS)).astype(np.int64)
        finals = _simulate_block(draws, q, init, table, visits, trace)
        np.add.at(counts, finals - 1, 1)
    return EmpiricalResult(
        config=config,
        counts=tuple(int(c) for c in counts),
        target=target,
        occupancy=None if visits is None else tuple(int(v) for v in visits),
        trace=None if trace is None else np.array(trace, dtype=np.int64),
    )


def trace_to_csv(result: EmpiricalResult) -> str:
    """CSV with columns ``trajectory,step,state`` (trajectories numbered from 0)."""
    if result.trace is None:
        raise ValueError("run the simulation with record_trace=True to get a trace")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trajectory", "step", "state"])
    for t, path in enumerate(result.trace):
        for s, state in enumerate(path):
            writer.writerow([t, s, int(state)])
    return buf.getvalue()
