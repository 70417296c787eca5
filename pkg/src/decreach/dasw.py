"""Deceptive almost-sure winning synthesis on belief-augmented arenas.

The solver alternates two fixed-point subroutines over the hypergame: one
computes where the adversary *believes* he can confine the play given his
current misperception (his moves quantified over the perceptually
permissive actions), the other the largest set dodging that confinement
from which the protagonist can stay put and re-enter the known-winning
levels with probability one.  Starting from the classical winning region
lifted to all reachable beliefs, the alternation grows a chain of level
sets whose limit is the deceptive almost-sure winning region; the
protagonist's strategy follows a positive-probability progress measure
down the chain.

The probability-one-progress requirement in the protagonist pass is load
bearing: demanding only "can stay outside the adversary's perceived trap"
admits protagonist-only cycles that circulate forever without winning,
inflating the region on sparse arenas (tests/test_dasw.py pins a concrete
instance).

Goal vertices are treated as absorbing throughout: the objective is already
achieved there, so edges leaving a goal vertex never disqualify it (and the
simulator stops on arrival).  An independent qualitative-reachability oracle
(:func:`mdp_oracle`) recomputes the region from first principles and is used
to cross-check every solve.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from . import _kernels
from .asw import WinRegions, asw, asw_strategy
from .errors import DecreachError
from .game import P1, P2
from .hypergame import Hypergame

SAFE2_FULL = "full"
SAFE2_PERCEIVED = "perceived"


@dataclass(frozen=True)
class PermissiveTable:
    """Adversary moves whose successor he believes lies in his own region.

    ``m`` maps every reachable adversary vertex to the set of action ids
    passing that filter (possibly empty); ``win2_cache`` holds the
    adversary's winning region of the restricted game solved once per
    distinct reachable belief.
    """

    m: Mapping[int, frozenset[int]]
    win2_cache: Mapping[int, frozenset[int]]


def permissive(h: Hypergame) -> PermissiveTable:
    """Solve one restricted game per reachable belief and filter each
    adversary vertex's moves through the matching opponent region.

    The adversary's moves keep the perception index fixed, so the region
    consulted at a vertex is the one for its own belief.  The result is
    cached on the hypergame (both are immutable).
    """
    cached = getattr(h, "_permissive_cache", None)
    if cached is not None:
        return cached
    win2: dict[int, frozenset[int]] = {}
    for i, belief in enumerate(h.ptable):
        win2[i] = asw(h.base.restrict(belief)).win2
    table: dict[int, frozenset[int]] = {}
    for v in h.vertices:
        if h.owner(v) != P2:
            continue
        s, i = h.vertex(v)
        blocked = win2[i]
        table[v] = frozenset(a for a, t in h.base._succ(s) if t in blocked)
    result = PermissiveTable(table, win2)
    h._permissive_cache = result
    return result


def support_actions(h: Hypergame, perm: PermissiveTable, v: int) -> tuple[int, ...]:
    """The adversary's effective move set at ``v``.

    Normally exactly the permissive actions.  When that filter is empty the
    adversary believes every move loses, yet he still has to move, so the
    support widens to every defined move; such vertices only occur inside
    the classical winning region, where the widening is harmless.
    """
    acts = perm.m[v]
    if acts:
        return tuple(sorted(acts))
    s = h.state_of(v)
    return tuple(a for a, _ in h.base._succ(s))


_SafeArrays = namedtuple(
    "_SafeArrays", "owner final_mask succ_ptr succ_dst pred_ptr pred_src"
)


def _safe_arrays(h: Hypergame, perm: PermissiveTable, perceived_p1: bool) -> _SafeArrays:
    """Per-vertex edge rows the safety fixed points quantify over.

    Protagonist rows hold all defined moves (or, for the perceived variant,
    only the moves the adversary believes the protagonist has); adversary
    rows hold the permissive moves only.
    """
    rows: list[tuple[int, ...]] = []
    for v in h.vertices:
        if h.owner(v) == P1:
            if perceived_p1:
                belief = h.perception(v)
                rows.append(tuple(w for a, w in h.successors(v) if a in belief))
            else:
                rows.append(tuple(w for _, w in h.successors(v)))
        else:
            macts = perm.m[v]
            rows.append(tuple(w for a, w in h.successors(v) if a in macts))
    n = h.n_vertices
    base = h.solver_arrays
    deg = np.array([len(r) for r in rows], dtype=np.int32)
    m = int(deg.sum())
    succ_ptr = np.zeros(n + 1, dtype=np.int32)
    np.cumsum(deg, out=succ_ptr[1:])
    succ_dst = np.empty(m, dtype=np.int32)
    k = 0
    for r in rows:
        for w in r:
            succ_dst[k] = w
            k += 1
    pred_counts = np.zeros(n, dtype=np.int32)
    for r in rows:
        for w in r:
            pred_counts[w] += 1
    pred_ptr = np.zeros(n + 1, dtype=np.int32)
    np.cumsum(pred_counts, out=pred_ptr[1:])
    pred_src = np.empty(m, dtype=np.int32)
    fill = pred_ptr[:-1].copy()
    for v, r in enumerate(rows):
        for w in r:
            pred_src[fill[w]] = v
            fill[w] += 1
    return _SafeArrays(
        base.owner, base.final_mask, succ_ptr, succ_dst, pred_ptr, pred_src
    )


def _member_mask(members: Iterable[int], n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=np.uint8)
    for v in members:
        mask[v] = 1
    return mask


def _run_safe(arrays: _SafeArrays, members: Iterable[int], n: int,
              p1_exists: bool, keep_finals: bool):
    mask, rounds, iterations = _kernels.impl.safe_fixpoint(
        arrays.owner,
        _member_mask(members, n),
        arrays.final_mask,
        arrays.succ_ptr,
        arrays.succ_dst,
        arrays.pred_ptr,
        arrays.pred_src,
        int(p1_exists),
        int(keep_finals),
    )
    result = frozenset(int(v) for v in np.nonzero(mask)[0])
    round_map = {int(v): int(rounds[v]) for v in np.nonzero(rounds)[0]}
    return result, round_map, int(iterations)


def _run_safe_reach(arrays: _SafeArrays, members: Iterable[int],
                    targets: Iterable[int], n: int):
    mask, iterations = _kernels.impl.safe_reach_fixpoint(
        arrays.owner,
        _member_mask(members, n),
        _member_mask(targets, n),
        arrays.succ_ptr,
        arrays.succ_dst,
        arrays.pred_ptr,
        arrays.pred_src,
    )
    return frozenset(int(v) for v in np.nonzero(mask)[0]), int(iterations)


def safe(
    h: Hypergame,
    perm: PermissiveTable,
    who: int,
    u: Iterable[int],
    *,
    target: Optional[Iterable[int]] = None,
    safe2_p1_quantifier: str = SAFE2_FULL,
) -> frozenset[int]:
    """Greatest subset of ``u`` the given player can keep the play inside.

    For the protagonist (``who == P1``) her vertices need one move staying
    inside and goal vertices are absorbing; passing ``target`` strengthens
    the condition to "stay inside and reach the target with probability
    one", which is what the region solver composes (bare safety admits
    protagonist cycles that never progress).  For the adversary
    (``who == P2``) protagonist vertices are quantified universally (over
    the full alphabet, or over the perceived one with
    ``safe2_p1_quantifier='perceived'``).  Adversary vertices always need
    all their permissive moves to stay.
    """
    if who not in (P1, P2):
        raise ValueError("who must be P1 or P2")
    if target is not None and who != P1:
        raise ValueError("a reach target only applies to the protagonist")
    perceived = who == P2 and safe2_p1_quantifier == SAFE2_PERCEIVED
    arrays = _safe_arrays(h, perm, perceived_p1=perceived)
    if target is not None:
        result, _ = _run_safe_reach(arrays, u, target, h.n_vertices)
        return result
    result, _, _ = _run_safe(
        arrays, u, h.n_vertices, p1_exists=(who == P1), keep_finals=(who == P1)
    )
    return result


@dataclass(frozen=True)
class DaswResult:
    """The increasing chain of level sets and the fixed point it reaches.

    ``levels[k]`` is the k-th outer iterate (distinct sets only; the region
    is the last).  ``rank`` maps region vertices to the first level
    containing them; vertices outside the region have rank infinity and no
    entry.  ``safe2_trace`` records the adversary-confinement set of each
    outer iteration, ``safe2_rounds`` the per-vertex removal pass inside
    each of those fixed points (the progress witnesses), and the two
    ``*_iterations`` tuples the inner pass counts, where convergence is
    only detectable from the second pass on.
    """

    levels: tuple[frozenset[int], ...]
    region: frozenset[int]
    rank: Mapping[int, int]
    safe2_trace: tuple[frozenset[int], ...]
    safe2_rounds: tuple[Mapping[int, int], ...]
    safe1_iterations: tuple[int, ...]
    safe2_iterations: tuple[int, ...]
    outer_iterations: int
    safe2_p1_quantifier: str


def dasw(
    h: Hypergame,
    *,
    safe2_p1_quantifier: str = SAFE2_FULL,
    perm: Optional[PermissiveTable] = None,
    base_regions: Optional[WinRegions] = None,
) -> DaswResult:
    """Alternating fixed point producing the deceptive winning region.

    Level 0 lifts the classical winning region to every reachable belief;
    each outer iteration first computes where the adversary believes he can
    confine the play away from the current levels, then the largest set
    avoiding that confinement from which the protagonist almost-surely
    re-enters the levels, until the chain stabilises.
    """
    if safe2_p1_quantifier not in (SAFE2_FULL, SAFE2_PERCEIVED):
        raise ValueError(f"unknown safe2_p1_quantifier {safe2_p1_quantifier!r}")
    if perm is None:
        perm = permissive(h)
    if base_regions is None:
        base_regions = asw(h.base)
    n = h.n_vertices
    arrays_p1 = _safe_arrays(h, perm, perceived_p1=False)
    if safe2_p1_quantifier == SAFE2_PERCEIVED:
        arrays_p2 = _safe_arrays(h, perm, perceived_p1=True)
    else:
        arrays_p2 = arrays_p1

    everyone = frozenset(range(n))
    z = frozenset(v for v in range(n) if h.state_of(v) in base_regions.win1)
    levels = [z]
    trap_trace: list[frozenset[int]] = []
    trap_rounds: list[Mapping[int, int]] = []
    s1_iters: list[int] = []
    s2_iters: list[int] = []
    outer = 0
    while True:
        outer += 1
        trap, rounds, it2 = _run_safe(
            arrays_p2, everyone - z, n, p1_exists=False, keep_finals=False
        )
        # the protagonist pass demands staying AND probability-one progress
        # to the current levels: bare safety would admit protagonist-only
        # cycles that circulate outside the levels forever
        z_next, it1 = _run_safe_reach(arrays_p1, everyone - trap, z, n)
        trap_trace.append(trap)
        trap_rounds.append(rounds)
        s2_iters.append(it2)
        s1_iters.append(it1)
        if z_next == z:
            break
        if not z <= z_next:
            raise DecreachError(
                "level chain is not monotone; this is a solver bug"
            )
        z = z_next
        levels.append(z)

    rank = {}
    for k, level in enumerate(levels):
        for v in level:
            if v not in rank:
                rank[v] = k
    return DaswResult(
        levels=tuple(levels),
        region=levels[-1],
        rank=rank,
        safe2_trace=tuple(trap_trace),
        safe2_rounds=tuple(trap_rounds),
        safe1_iterations=tuple(s1_iters),
        safe2_iterations=tuple(s2_iters),
        outer_iterations=outer,
        safe2_p1_quantifier=safe2_p1_quantifier,
    )


@dataclass(frozen=True)
class StrategyMap:
    """Protagonist move sets over the region plus the progress certificate.

    ``p1`` maps every protagonist region vertex outside the goal set to a
    nonempty tuple of action ids.  Inside level 0 this is the lifted
    classical strategy (a singleton); outside, all moves that strictly
    decrease ``progress``, the positive-probability distance to level 0
    (protagonist steps decrease it deterministically, adversary supports
    contain a decreasing move).  ``p2_policy_kind`` names the family of
    adversary policies the guarantee quantifies over.
    """

    p1: Mapping[int, tuple[int, ...]]
    progress: Mapping[int, int]
    p2_policy_kind: str = "randomized-full-support-over-permissive"


def extract_strategy(
    h: Hypergame,
    result: DaswResult,
    perm: Optional[PermissiveTable] = None,
    base_regions: Optional[WinRegions] = None,
) -> StrategyMap:
    if perm is None:
        perm = permissive(h)
    if base_regions is None:
        base_regions = asw(h.base)
    region = result.region
    z0 = result.levels[0]

    # distance to level 0 through region edges the play can actually take:
    # any protagonist move, any adversary support move
    progress: dict[int, int] = {v: 0 for v in z0}
    rev: dict[int, list[int]] = {v: [] for v in region}
    for v in sorted(region):
        if h.owner(v) == P1:
            edges = [w for _, w in h.successors(v)]
        else:
            edges = [h.delta(v, a) for a in support_actions(h, perm, v)]
        for w in edges:
            if w in region:
                rev[w].append(v)
    frontier = sorted(z0)
    dist = 0
    while frontier:
        dist += 1
        nxt = []
        for w in frontier:
            for u in rev[w]:
                if u not in progress:
                    progress[u] = dist
                    nxt.append(u)
        frontier = sorted(nxt)
    missing = region - progress.keys()
    if missing:
        raise DecreachError(
            "region vertices with no positive-probability route to level 0: "
            f"{sorted(missing)[:8]}"
        )

    lifted = asw_strategy(h.base, base_regions)
    p1_map: dict[int, tuple[int, ...]] = {}
    for v in sorted(region):
        if h.owner(v) != P1 or v in h.hfinal:
            continue
        if v in z0:
            p1_map[v] = (lifted[h.state_of(v)],)
            continue
        mine = progress[v]
        moves = tuple(
            a
            for a, w in h.successors(v)
            if w in region and progress[w] < mine
        )
        if not moves:
            raise DecreachError(
                f"no progress-decreasing move at region vertex {v}; solver bug"
            )
        p1_map[v] = moves
    return StrategyMap(p1=p1_map, progress=progress)


def mdp_oracle(h: Hypergame, perm: PermissiveTable) -> frozenset[int]:
    """Almost-sure reachability set of the one-and-a-half-player abstraction.

    Protagonist vertices keep all their moves; every adversary vertex is a
    stochastic node over its support (so a vertex with no moves at all is a
    losing sink); targets are the goal vertices, absorbing.  Computed by the
    textbook qualitative fixed point, alternating a positive-probability
    backward reachability pass with the removal of vertices that escaped it,
    entirely independent of the level-set solver above.
    """
    n = h.n_vertices
    p1_vertex = [h.owner(v) == P1 for v in range(n)]
    succ: list[tuple[int, ...]] = []
    for v in range(n):
        if p1_vertex[v]:
            succ.append(tuple(w for _, w in h.successors(v)))
        else:
            succ.append(tuple(h.delta(v, a) for a in support_actions(h, perm, v)))
    rev: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        for w in succ[v]:
            rev[w].append(v)

    alive = [True] * n
    n_alive = n
    while True:
        # stochastic nodes must stay inside the candidate set with certainty
        supp_ok = [True] * n
        for v in range(n):
            if alive[v] and not p1_vertex[v]:
                for w in succ[v]:
                    if not alive[w]:
                        supp_ok[v] = False
                        break
        reach = [False] * n
        stack = [v for v in sorted(h.hfinal) if alive[v]]
        for v in stack:
            reach[v] = True
        while stack:
            w = stack.pop()
            for u in rev[w]:
                if reach[u] or not alive[u]:
                    continue
                if p1_vertex[u] or supp_ok[u]:
                    reach[u] = True
                    stack.append(u)
        n_reach = sum(reach)
        if n_reach == n_alive:
            return frozenset(v for v in range(n) if alive[v])
        alive = reach
        n_alive = n_reach


# -- result verification -------------------------------------------------


def check_monotone_chain(result: DaswResult) -> list[str]:
    problems = []
    for k in range(len(result.levels) - 1):
        if not result.levels[k] <= result.levels[k + 1]:
            problems.append(f"level {k} is not contained in level {k + 1}")
    return problems


def check_projection_superset(
    h: Hypergame, result: DaswResult, base_regions: WinRegions
) -> list[str]:
    """Projected region must cover the classical region, over the states the
    reachable product actually contains."""
    reachable_states = h.project(h.vertices)
    expected = base_regions.win1 & reachable_states
    got = h.project(result.region)
    missing = expected - got
    if missing:
        return [f"projection misses classically winning states {sorted(missing)}"]
    return []


def check_closure(h: Hypergame, perm: PermissiveTable, result: DaswResult) -> list[str]:
    """Every level confines the play: adversary permissive moves stay inside,
    the protagonist keeps a move inside.  Goal vertices are exempt (the play
    ends there)."""
    problems = []
    for k, level in enumerate(result.levels):
        for v in sorted(level - h.hfinal):
            if h.owner(v) == P1:
                if not any(w in level for _, w in h.successors(v)):
                    problems.append(f"level {k}: protagonist vertex {v} cannot stay")
            else:
                for a in sorted(perm.m[v]):
                    if h.delta(v, a) not in level:
                        problems.append(
                            f"level {k}: adversary move {a} at {v} escapes"
                        )
    return problems


def check_progress(h: Hypergame, perm: PermissiveTable, result: DaswResult) -> list[str]:
    """Every vertex added at level k+1 makes one-step progress.

    Progress is witnessed by the removal order of the adversary-confinement
    fixed point: a vertex dropped in pass j has a move (protagonist: any
    defined, adversary: permissive) into level k or into a vertex dropped in
    an earlier pass, grounding a well-founded descent into level k.
    """
    problems = []
    for k in range(len(result.levels) - 1):
        zk = result.levels[k]
        added = result.levels[k + 1] - zk
        rounds = result.safe2_rounds[k]
        by_round: dict[int, list[int]] = {}
        for v, r in rounds.items():
            by_round.setdefault(r, []).append(v)
        allowed = set(zk)
        grown = 0
        for v in sorted(added, key=lambda v: (rounds.get(v, 0), v)):
            r = rounds.get(v, 0)
            if r <= 0:
                problems.append(
                    f"level {k + 1}: vertex {v} joined without leaving the trap"
                )
                continue
            while grown < r - 1:
                grown += 1
                allowed.update(by_round.get(grown, ()))
            if h.owner(v) == P1:
                moves = [w for _, w in h.successors(v)]
            else:
                moves = [h.delta(v, a) for a in sorted(perm.m[v])]
            if not any(w in allowed for w in moves):
                problems.append(
                    f"level {k + 1}: vertex {v} has no move toward level {k}"
                )
    return problems


def verify_result(
    h: Hypergame,
    perm: PermissiveTable,
    result: DaswResult,
    base_regions: Optional[WinRegions] = None,
) -> list[str]:
    """All structural invariants of a solve; empty list means clean."""
    if base_regions is None:
        base_regions = asw(h.base)
    problems = check_monotone_chain(result)
    problems += check_projection_superset(h, result, base_regions)
    problems += check_closure(h, perm, result)
    problems += check_progress(h, perm, result)
    return problems
