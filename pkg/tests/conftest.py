"""Shared fixtures and independent reference implementations.

The literal solvers here transcribe the whole-set fixed-point definitions
directly (sets, synchronous passes) and the brute-force oracles enumerate
memoryless strategies outright.  They exist to differentially test the
worklist kernels and must stay independent of the package's solver code.
"""

from __future__ import annotations

import itertools
import random

import pytest

from decreach import InferenceMechanism, build
from decreach.asw import WinRegions
from decreach.dasw import PermissiveTable
from decreach.game import Action, GameGraph, P1, P2
from decreach.hypergame import Hypergame

CORPUS_SEED = 20250801


# -- the running example -------------------------------------------------


def make_fig1() -> GameGraph:
    """Four-state arena: circles s1, s3 are P1's; squares s0 (final), s2 are
    P2's; play starts at s2."""
    actions = [
        Action(0, P1, "a1"),
        Action(1, P1, "a2"),
        Action(2, P2, "b1"),
        Action(3, P2, "b2"),
    ]
    transitions = [
        (1, 0, 0),
        (1, 1, 2),
        (2, 2, 1),
        (2, 3, 3),
        (3, 0, 2),
        (3, 1, 2),
    ]
    return GameGraph(
        owners=[P2, P1, P2, P1],
        final=[0],
        actions=actions,
        transitions=transitions,
        initial=2,
        state_labels=["s0", "s1", "s2", "s3"],
    )


A2_ONLY = frozenset({"a2"})
A1_FULL = frozenset({"a1", "a2"})


@pytest.fixture
def fig1() -> GameGraph:
    return make_fig1()


@pytest.fixture
def fig2(fig1) -> GameGraph:
    return fig1.restrict([1])


@pytest.fixture
def fig3(fig1) -> Hypergame:
    return build(fig1, [1], InferenceMechanism.union(fig1.a1))


def vid_by(h: Hypergame, state_label: str, belief_labels) -> int:
    """Vertex lookup by (state label, belief as action labels); index-free so
    golden tests compare up to perception-index relabelling."""
    want = frozenset(belief_labels)
    for v in h.vertices:
        s = h.state_of(v)
        got = frozenset(h.base.action_name(a) for a in h.perception(v))
        if h.base.state_labels[s] == state_label and got == want:
            return v
    raise AssertionError(f"no vertex ({state_label}, {sorted(want)})")


def vertex_keys(h: Hypergame, vs) -> set[tuple[str, frozenset[str]]]:
    out = set()
    for v in vs:
        s = h.state_of(v)
        out.add(
            (
                h.base.state_labels[s],
                frozenset(h.base.action_name(a) for a in h.perception(v)),
            )
        )
    return out


# -- random corpus ---------------------------------------------------------


def random_game(rng: random.Random, min_states=4, max_states=12) -> GameGraph:
    """Dead-end-free random arena: every state keeps at least one move, so
    the differing dead-end conventions of the solvers never interact."""
    n = rng.randint(min_states, max_states)
    n_a1 = rng.randint(2, 4)
    n_a2 = rng.randint(2, 4)
    owners = [rng.randint(0, 1) for _ in range(n)]
    actions = [Action(i, P1, f"a{i + 1}") for i in range(n_a1)]
    actions += [Action(n_a1 + i, P2, f"b{i + 1}") for i in range(n_a2)]
    transitions = []
    for s in range(n):
        alphabet = (
            list(range(n_a1)) if owners[s] == P1 else list(range(n_a1, n_a1 + n_a2))
        )
        chosen = [a for a in alphabet if rng.random() < 0.7]
        if not chosen:
            chosen = [rng.choice(alphabet)]
        for a in chosen:
            transitions.append((s, a, rng.randrange(n)))
    final = rng.sample(range(n), rng.randint(1, max(1, n // 3)))
    return GameGraph(
        owners=owners,
        final=final,
        actions=actions,
        transitions=transitions,
        initial=rng.randrange(n),
    )


def random_x0(rng: random.Random, game: GameGraph) -> frozenset[int]:
    return frozenset(rng.sample(list(game.a1), rng.randint(0, len(game.a1))))


def corpus(n: int, seed: int = CORPUS_SEED):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        game = random_game(rng)
        out.append((game, random_x0(rng, game)))
    return out


# -- literal reference solvers ----------------------------------------------


def literal_attractor(game: GameGraph):
    """Synchronous whole-set transcription of the attractor iteration."""
    region = set(game.final)
    level = {s: 0 for s in region}
    k = 0
    while True:
        k += 1
        added = set()
        for s in game.states:
            if s in region:
                continue
            succ = game.successors(s)
            if game.owners[s] == P1:
                if any(t in region for _, t in succ):
                    added.add(s)
            else:
                if all(t in region for _, t in succ):
                    added.add(s)
        if not added:
            return frozenset(region), level
        for s in added:
            level[s] = k
        region |= added


def _dapre(h: Hypergame, perm: PermissiveTable, who: int, y, quantifier: str):
    inside = set()
    for v in h.vertices:
        if h.owner(v) == P1:
            if who == P1:
                if any(t in y for _, t in h.successors(v)):
                    inside.add(v)
            else:
                if quantifier == "perceived":
                    belief = h.perception(v)
                    succ = [t for a, t in h.successors(v) if a in belief]
                else:
                    succ = [t for _, t in h.successors(v)]
                if all(t in y for t in succ):
                    inside.add(v)
        else:
            if all(h.delta(v, b) in y for b in perm.m[v]):
                inside.add(v)
    return inside


def literal_safe(h, perm, who, u, quantifier="full"):
    """Shrinking passes straight from the definitions.  Pass counting matches
    the kernels: convergence is only checkable from the second pass on."""
    y = frozenset(u)
    passes = 0
    while True:
        passes += 1
        inside = _dapre(h, perm, who, y, quantifier)
        keep = set()
        for v in y:
            if who == P1 and v in h.hfinal:
                keep.add(v)
            elif v in inside:
                keep.add(v)
        new = frozenset(keep)
        if new == y and passes >= 2:
            return y, passes
        y = new


def literal_safe_reach(h, perm, u, targets):
    """Whole-set transcription of the protagonist's stay-and-surely-reach
    pass: each round keeps the positive-probability backward closure of the
    targets inside the current set (protagonist: some edge into the closure;
    adversary: all permissive edges stay in the set, some enters the
    closure)."""
    y = frozenset(u)
    passes = 0
    while True:
        passes += 1
        closure = {v for v in targets if v in y}
        grew = True
        while grew:
            grew = False
            for v in y - closure:
                if h.owner(v) == P1:
                    ok = any(t in closure for _, t in h.successors(v))
                else:
                    succ = [h.delta(v, b) for b in perm.m[v]]
                    ok = all(t in y for t in succ) and any(
                        t in closure for t in succ
                    )
                if ok:
                    closure.add(v)
                    grew = True
        new = frozenset(closure)
        if new == y and passes >= 2:
            return y, passes
        y = new


def literal_dasw(h, perm, base_regions: WinRegions, quantifier="full"):
    everyone = frozenset(h.vertices)
    z = frozenset(v for v in h.vertices if h.state_of(v) in base_regions.win1)
    levels = [z]
    traps = []
    safe1_passes = []
    safe2_passes = []
    outer = 0
    while True:
        outer += 1
        trap, p2 = literal_safe(h, perm, P2, everyone - z, quantifier)
        z_next, p1 = literal_safe_reach(h, perm, everyone - trap, z)
        traps.append(trap)
        safe2_passes.append(p2)
        safe1_passes.append(p1)
        if z_next == z:
            break
        z = z_next
        levels.append(z)
    return levels, traps, safe1_passes, safe2_passes, outer


# -- brute-force oracles ------------------------------------------------------


def _p1_choices(game: GameGraph):
    states = [
        s for s in game.states if game.owners[s] == P1 and game.successors(s)
    ]
    return states, [
        [a for a, _ in game.successors(s)] for s in states
    ]


def _p2_choices(game: GameGraph):
    states = [
        s for s in game.states if game.owners[s] == P2 and game.successors(s)
    ]
    return states, [
        [a for a, _ in game.successors(s)] for s in states
    ]


def all_p2_strategies(game: GameGraph):
    states, choices = _p2_choices(game)
    for combo in itertools.product(*choices):
        yield dict(zip(states, combo))


def all_p1_strategies(game: GameGraph):
    states, choices = _p1_choices(game)
    for combo in itertools.product(*choices):
        yield dict(zip(states, combo))


def play_reaches(game: GameGraph, start: int, pi: dict, sigma: dict) -> bool:
    """Follow two memoryless strategies; memoryless plays decide reachability
    within |S| steps."""
    s = start
    for _ in range(game.n_states + 1):
        if s in game.final:
            return True
        choice = pi.get(s) if game.owners[s] == P1 else sigma.get(s)
        if choice is None:
            return False
        s = game.trans_get(s, choice)
    return False


def brute_force_win1(game: GameGraph) -> frozenset[int]:
    """Enumerate memoryless strategy pairs outright (positional determinacy
    makes memoryless enough); only usable on small games."""
    sigmas = list(all_p2_strategies(game))
    winning = set()
    for start in game.states:
        for pi in all_p1_strategies(game):
            if all(play_reaches(game, start, pi, sigma) for sigma in sigmas):
                winning.add(start)
                break
    return frozenset(winning)


def p2_strategy_avoids(game: GameGraph, start: int, sigma: dict) -> bool:
    """True when no play from ``start`` can reach the final set once P2 is
    pinned to ``sigma`` (P1 unconstrained: plain graph search)."""
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        if s in game.final:
            return False
        if game.owners[s] == P1:
            targets = [t for _, t in game.successors(s)]
        else:
            choice = sigma.get(s)
            targets = [] if choice is None else [game.trans_get(s, choice)]
        for t in targets:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return True
