"""Monte-Carlo play engine for strategy validation.

The protagonist follows a strategy map deterministically (lowest-index
member of her move set); the adversary draws from his support, either
uniformly or with per-episode random positive weights, approximating "any
full-support policy".  Episodes are seeded and reproducible: episode ``i``
of a batch uses seed ``base_seed + i`` (counted across starts), and the two
kernel backends consume the shared PRNG identically, so a failing batch
episode can be replayed by seed to recover its trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .dasw import PermissiveTable, StrategyMap, permissive, support_actions
from .errors import SimulationConfigError
from .game import P1
from .hypergame import Hypergame

UNIFORM = "uniform"
RANDOM_WEIGHTS = "random-weights"

REACHED_F = "REACHED_F"
STEP_CAP = "STEP_CAP"
DEAD_END = "DEAD_END"
_OUTCOMES = {1: REACHED_F, 2: STEP_CAP, 3: DEAD_END}


@dataclass(frozen=True)
class P2Policy:
    """Adversary policy family: support is always his effective move set."""

    kind: str = UNIFORM

    def __post_init__(self):
        if self.kind not in (UNIFORM, RANDOM_WEIGHTS):
            raise ValueError(f"unknown policy kind {self.kind!r}")

    @property
    def code(self) -> int:
        return 0 if self.kind == UNIFORM else 1


@dataclass(frozen=True)
class Episode:
    seed: int
    start: int
    vertices: tuple[int, ...]
    actions: tuple[int, ...]
    outcome: str
    steps: int


@dataclass(frozen=True)
class StartStats:
    start: int
    episodes: int
    reached: int
    reach_rate: float
    mean_steps: float
    max_steps: int


@dataclass(frozen=True)
class BatchStats:
    policy: str
    episodes_per_start: int
    cap: int
    base_seed: int
    per_start: tuple[StartStats, ...]
    counterexample: Optional[Episode]

    @property
    def all_reached(self) -> bool:
        return all(s.reached == s.episodes for s in self.per_start)


def default_cap(h: Hypergame) -> int:
    # almost-sure reachability has unbounded worst-case hitting time; this
    # bounds runtime while cap hits from region starts stay loud failures
    return 10 * h.n_vertices


class _SimTables:
    """Flat arrays binding a hypergame, a strategy and the adversary support."""

    def __init__(self, h: Hypergame, strat: StrategyMap, perm: PermissiveTable):
        self.h = h
        n = h.n_vertices
        base = h.solver_arrays
        self.owner = base.owner
        self.final_mask = base.final_mask
        p1_next = np.full(n, -1, dtype=np.int32)
        p1_act = np.full(n, -1, dtype=np.int32)
        supp_rows: list[tuple[tuple[int, int], ...]] = []
        for v in range(n):
            if h.owner(v) == P1:
                moves = strat.p1.get(v)
                aid = None
                if moves:
                    aid = min(moves)
                else:
                    row = h.successors(v)
                    if row:
                        aid = row[0][0]
                if aid is not None:
                    p1_next[v] = h.delta(v, aid)
                    p1_act[v] = aid
                supp_rows.append(())
            else:
                acts = support_actions(h, perm, v)
                supp_rows.append(tuple((a, h.delta(v, a)) for a in acts))
        deg = np.array([len(r) for r in supp_rows], dtype=np.int32)
        supp_ptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(deg, out=supp_ptr[1:])
        m = int(deg.sum())
        supp_act = np.empty(m, dtype=np.int32)
        supp_dst = np.empty(m, dtype=np.int32)
        k = 0
        for row in supp_rows:
            for a, w in row:
                supp_act[k] = a
                supp_dst[k] = w
                k += 1
        self.p1_next = p1_next
        self.p1_act = p1_act
        self.supp_ptr = supp_ptr
        self.supp_act = supp_act
        self.supp_dst = supp_dst


def _check_start(h: Hypergame, strat: StrategyMap, start: int, strict: bool) -> None:
    if not 0 <= start < h.n_vertices:
        raise SimulationConfigError(f"unknown start vertex {start}")
    if (
        strict
        and h.owner(start) == P1
        and start not in h.hfinal
        and not strat.p1.get(start)
    ):
        raise SimulationConfigError(
            f"start vertex {start} is a protagonist vertex outside the strategy domain"
        )


def run_episode(
    h: Hypergame,
    strat: StrategyMap,
    policy: P2Policy,
    start: int,
    seed: int,
    cap: Optional[int] = None,
    *,
    perm: Optional[PermissiveTable] = None,
    strict_start: bool = True,
) -> Episode:
    """Play one seeded episode and keep its full trace."""
    if cap is None:
        cap = default_cap(h)
    if cap < 1:
        raise SimulationConfigError("cap must be at least 1")
    _check_start(h, strat, start, strict_start)
    if perm is None:
        perm = permissive(h)
    tables = _SimTables(h, strat, perm)
    vertices, actions, outcome, steps = _kernels.pure.episode_trace(
        tables.owner,
        tables.final_mask,
        tables.p1_next,
        tables.p1_act,
        tables.supp_ptr,
        tables.supp_act,
        tables.supp_dst,
        policy.code,
        start,
        cap,
        seed,
    )
    return Episode(
        seed=seed,
        start=start,
        vertices=tuple(int(v) for v in vertices),
        actions=tuple(int(a) for a in actions),
        outcome=_OUTCOMES[outcome],
        steps=steps,
    )


def run_batch(
    h: Hypergame,
    strat: StrategyMap,
    policy: P2Policy,
    starts: Sequence[int],
    episodes: int,
    cap: Optional[int] = None,
    base_seed: int = 0,
    *,
    perm: Optional[PermissiveTable] = None,
) -> BatchStats:
    """Seeded batches from each start; aggregates are order-independent.

    The first episode that fails to reach the goal (in start-major, then
    episode order) is replayed with its seed to produce a counterexample
    trace.
    """
    if episodes < 1:
        raise SimulationConfigError("episodes must be at least 1")
    if cap is None:
        cap = default_cap(h)
    if perm is None:
        perm = permissive(h)
    tables = _SimTables(h, strat, perm)
    per_start = []
    counterexample = None
    for idx, start in enumerate(starts):
        _check_start(h, strat, int(start), strict=False)
        seed0 = base_seed + idx * episodes
        reached, steps_total, steps_max, first_fail = _kernels.impl.episode_batch(
            tables.owner,
            tables.final_mask,
            tables.p1_next,
            tables.supp_ptr,
            tables.supp_dst,
            policy.code,
            int(start),
            episodes,
            cap,
            seed0,
        )
        per_start.append(
            StartStats(
                start=int(start),
                episodes=episodes,
                reached=int(reached),
                reach_rate=reached / episodes,
                mean_steps=steps_total / episodes,
                max_steps=int(steps_max),
            )
        )
        if first_fail >= 0 and counterexample is None:
            counterexample = run_episode(
                h,
                strat,
                policy,
                int(start),
                seed0 + int(first_fail),
                cap,
                perm=perm,
                strict_start=False,
            )
    return BatchStats(
        policy=policy.kind,
        episodes_per_start=episodes,
        cap=cap,
        base_seed=base_seed,
        per_start=tuple(per_start),
        counterexample=counterexample,
    )
