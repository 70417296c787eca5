"""Almost-sure winning regions for reachability games.

In a deterministic turn-based arena the almost-sure and sure winning
regions coincide, so the protagonist's region is the classical attractor:
the least fixed point of controllable predecessors grown backward from the
final set.  The complement is the opponent's region (these games are
determined).  The fixed point runs on a backward-edge worklist but produces
the same membership and entry rounds as the literal whole-set iteration;
tests/test_asw.py checks that equivalence against a direct transcription.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import _kernels
from .errors import DecreachError
from .game import P1, GameGraph, require_valid


@dataclass(frozen=True)
class WinRegions:
    """Partition of the state space plus attractor entry rounds.

    ``attractor_levels`` is defined exactly on ``win1`` and is 0 exactly on
    the final states.
    """

    win1: frozenset[int]
    win2: frozenset[int]
    attractor_levels: Mapping[int, int]


def asw(game: GameGraph) -> WinRegions:
    """Solve the reachability game; requires a validated arena.

    An opponent dead end satisfies the universal predecessor condition
    vacuously and therefore falls to the protagonist; a protagonist dead
    end outside the final set is lost.
    """
    require_valid(game)
    arr = game.solver_arrays
    levels = _kernels.impl.attractor(
        arr.owner, arr.out_deg, arr.pred_ptr, arr.pred_src, arr.final_mask
    )
    level_map = {}
    win1 = set()
    for s in game.states:
        lv = int(levels[s])
        if lv >= 0:
            win1.add(s)
            level_map[s] = lv
    win2 = frozenset(game.states) - win1
    return WinRegions(frozenset(win1), win2, level_map)


def asw_strategy(game: GameGraph, regions: WinRegions) -> dict[int, int]:
    """Memoryless winning strategy read off the attractor levels.

    Defined exactly on protagonist states in ``win1`` minus the final set;
    picks the lowest-index action whose successor entered the attractor
    strictly earlier, which bounds every play by |S| steps.
    """
    levels = regions.attractor_levels
    strategy: dict[int, int] = {}
    for s in sorted(regions.win1):
        if game.owners[s] != P1 or s in game.final:
            continue
        chosen = None
        for aid, t in game._succ(s):
            if t in regions.win1 and levels[t] < levels[s]:
                chosen = aid
                break
        if chosen is None:
            raise DecreachError(
                f"attractor invariant broken: no level-decreasing action at state {s}"
            )
        strategy[s] = chosen
    return strategy
