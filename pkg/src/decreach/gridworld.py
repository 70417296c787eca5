"""Product-game benchmark: a robot collecting two flags against a blocker.

Every game state is a tuple (robot cell, adversary cell, mover, objective
progress): the two positions, whose turn it is, and a four-state automaton
tracking which flags the robot has visited.  Moves leaving the grid,
entering an obstacle or entering the other agent's cell are disabled rather
than redirected, so obstacle/collision tuples exist in the state space as
unreachable sinks and the state count is exactly (w*h)^2 * 2 * 4 for every
configuration.

The benchmark's signature asymmetry: the robot also has diagonal moves the
adversary does not expect until he first sees one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .asw import WinRegions
from .dasw import DaswResult
from .game import Action, GameGraph, P1, P2
from .hypergame import Hypergame
from .inference import InferenceMechanism

Cell = tuple[int, int]

MOVES: dict[str, Cell] = {
    "N": (0, 1),
    "E": (1, 0),
    "S": (0, -1),
    "W": (-1, 0),
    "NE": (1, 1),
    "NW": (-1, 1),
    "SW": (-1, -1),
    "SE": (1, -1),
}

DEFAULT_P1_ACTIONS = ("N", "E", "S", "W", "NE", "NW", "SW")
DEFAULT_P2_ACTIONS = ("N", "E", "S", "W")
DEFAULT_X0 = ("N", "E", "S", "W")


@dataclass(frozen=True)
class GridConfig:
    """Benchmark configuration.

    The defaults are this repository's reference layout: an obstacle-free
    4x4 grid, flags at (3,1) and (3,3), the robot starting at (0,0) and the
    adversary between the flags at (3,2), initially believing the robot can
    only move cardinally.  It is verified dead-end-free by the test suite;
    custom layouts with tight pockets can trap the adversary (he must move),
    which the oracle cross-check then reports loudly.
    """

    width: int = 4
    height: int = 4
    flags: tuple[Cell, Cell] = ((3, 1), (3, 3))
    obstacles: frozenset[Cell] = frozenset()
    p1_actions: tuple[str, ...] = DEFAULT_P1_ACTIONS
    p2_actions: tuple[str, ...] = DEFAULT_P2_ACTIONS
    p1_start: Cell = (0, 0)
    p2_start: Cell = (3, 2)
    x0: tuple[str, ...] = DEFAULT_X0

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def cell_index(self, cell: Cell) -> int:
        x, y = cell
        return y * self.width + x

    def in_grid(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height


class ObjectiveDfa:
    """Progress automaton for "visit both flags".

    States are bit masks: 0 nothing seen, 1 first flag seen, 2 second flag
    seen, 3 both (accepting, absorbing).  Advances on the cell the robot
    occupies after her move; the adversary's position never feeds it.
    """

    N_STATES = 4
    ACCEPTING = 3

    def __init__(self, g1: Cell, g2: Cell):
        self.g1 = g1
        self.g2 = g2

    def advance(self, q: int, cell: Cell) -> int:
        if cell == self.g1:
            q |= 1
        if cell == self.g2:
            q |= 2
        return q


def _check_config(cfg: GridConfig) -> None:
    problems = []
    if cfg.width < 1 or cfg.height < 1:
        problems.append("grid must be at least 1x1")
    for name, cell in (("p1_start", cfg.p1_start), ("p2_start", cfg.p2_start)):
        if not cfg.in_grid(cell):
            problems.append(f"{name} {cell} is outside the grid")
        if cell in cfg.obstacles:
            problems.append(f"{name} {cell} is an obstacle")
    if cfg.p1_start == cfg.p2_start:
        problems.append("agents must occupy distinct cells")
    if len(set(cfg.flags)) != 2:
        problems.append("the two flag cells must be distinct")
    for flag in cfg.flags:
        if not cfg.in_grid(flag):
            problems.append(f"flag {flag} is outside the grid")
        if flag in cfg.obstacles:
            problems.append(f"flag {flag} is an obstacle")
    for cell in cfg.obstacles:
        if not cfg.in_grid(cell):
            problems.append(f"obstacle {cell} is outside the grid")
    for group, names in (("p1_actions", cfg.p1_actions), ("p2_actions", cfg.p2_actions)):
        if not names:
            problems.append(f"{group} must not be empty")
        for name in names:
            if name not in MOVES:
                problems.append(f"{group}: unknown move {name!r}")
        if len(set(names)) != len(names):
            problems.append(f"{group}: duplicate moves")
    if not set(cfg.x0) <= set(cfg.p1_actions):
        problems.append("x0 must be a subset of p1_actions")
    if problems:
        raise ValueError("bad grid configuration: " + "; ".join(problems))


def generate(cfg: GridConfig) -> GameGraph:
    """Build the full product arena for a configuration.

    The robot (P1) moves on even turns and her moves advance the objective
    automaton; the adversary (P2) moves on odd turns and never does.
    """
    _check_config(cfg)
    nc = cfg.n_cells
    dfa = ObjectiveDfa(*cfg.flags)

    def sid(c1: int, c2: int, t: int, q: int) -> int:
        return ((c1 * nc + c2) * 2 + t) * ObjectiveDfa.N_STATES + q

    def coords(c: int) -> Cell:
        return (c % cfg.width, c // cfg.width)

    obstacle_idx = {cfg.cell_index(c) for c in cfg.obstacles}

    n_states = nc * nc * 2 * ObjectiveDfa.N_STATES
    owners = [P1] * n_states
    labels: list[Optional[str]] = [None] * n_states
    final = []
    for c1 in range(nc):
        x1, y1 = coords(c1)
        for c2 in range(nc):
            x2, y2 = coords(c2)
            for t in (0, 1):
                for q in range(ObjectiveDfa.N_STATES):
                    s = sid(c1, c2, t, q)
                    owners[s] = P1 if t == 0 else P2
                    labels[s] = f"r({x1},{y1}) a({x2},{y2}) {'P1' if t == 0 else 'P2'} q{q}"
                    valid = (
                        c1 not in obstacle_idx
                        and c2 not in obstacle_idx
                        and c1 != c2
                    )
                    if valid and q == ObjectiveDfa.ACCEPTING:
                        final.append(s)

    actions = []
    p1_ids = {}
    for i, name in enumerate(cfg.p1_actions):
        actions.append(Action(i, P1, name))
        p1_ids[name] = i
    offset = len(cfg.p1_actions)
    for i, name in enumerate(cfg.p2_actions):
        actions.append(Action(offset + i, P2, name))

    transitions = []
    for c1 in range(nc):
        if c1 in obstacle_idx:
            continue
        p1_cell = coords(c1)
        for c2 in range(nc):
            if c2 in obstacle_idx or c1 == c2:
                continue
            p2_cell = coords(c2)
            for q in range(ObjectiveDfa.N_STATES):
                src = sid(c1, c2, 0, q)
                for i, name in enumerate(cfg.p1_actions):
                    dx, dy = MOVES[name]
                    tgt = (p1_cell[0] + dx, p1_cell[1] + dy)
                    if not cfg.in_grid(tgt):
                        continue
                    ci = cfg.cell_index(tgt)
                    if ci in obstacle_idx or ci == c2:
                        continue
                    transitions.append(
                        (src, i, sid(ci, c2, 1, dfa.advance(q, tgt)))
                    )
                src = sid(c1, c2, 1, q)
                for i, name in enumerate(cfg.p2_actions):
                    dx, dy = MOVES[name]
                    tgt = (p2_cell[0] + dx, p2_cell[1] + dy)
                    if not cfg.in_grid(tgt):
                        continue
                    ci = cfg.cell_index(tgt)
                    if ci in obstacle_idx or ci == c1:
                        continue
                    transitions.append((src, offset + i, sid(c1, ci, 0, q)))

    q0 = dfa.advance(0, cfg.p1_start)
    initial = sid(cfg.cell_index(cfg.p1_start), cfg.cell_index(cfg.p2_start), 0, q0)
    return GameGraph(
        owners=owners,
        final=final,
        actions=actions,
        transitions=transitions,
        initial=initial,
        state_labels=labels,
    )


def inference_for(cfg: GridConfig, game: GameGraph) -> tuple[InferenceMechanism, frozenset[int]]:
    """Default belief update for the benchmark: any move outside the initial
    belief reveals the whole alphabet; already-known moves reveal nothing new."""
    name_to_id = {game.action(a).label: a for a in game.a1}
    x0 = frozenset(name_to_id[name] for name in cfg.x0)
    full = frozenset(game.a1)
    mapping = {
        aid: ({aid} if aid in x0 else full) for aid in game.a1
    }
    return InferenceMechanism.closure(game.a1, mapping), x0


@dataclass(frozen=True)
class LayoutReport:
    """Solution sizes for one layout, in the benchmark's reporting shape.

    Flag placement, obstacles and starts change every figure here, so the
    numbers are layout-dependent observations, not invariants.  The
    projection / almost-sure comparison (whose difference counts the states
    winnable only by deception) is taken over the states the reachable
    product actually contains; the raw almost-sure count over the whole
    state space is reported alongside, but it also counts unreachable
    obstacle and collision tuples, whose sink conventions make it
    incomparable with the projection.
    """

    game_states: int
    product_vertices: int
    reachable_vertices: int
    dasw_vertices: int
    dasw_projection: int
    asw_states_reachable: int
    asw_states_total: int

    @property
    def deception_gain(self) -> int:
        return self.dasw_projection - self.asw_states_reachable

    def format(self) -> str:
        lines = [
            f"game states:                        {self.game_states}",
            f"hypergame product (states x beliefs): {self.product_vertices}"
            f" ({self.reachable_vertices} reachable)",
            f"deceptive almost-sure vertices:     {self.dasw_vertices} of {self.product_vertices}",
            f"projected onto game states:         {self.dasw_projection}",
            f"almost-sure region, reachable slice: {self.asw_states_reachable}"
            f" (whole state space: {self.asw_states_total})",
            f"states winnable only by deception:  {self.deception_gain}",
        ]
        return "\n".join(lines)


def layout_report(
    cfg: GridConfig,
    base_regions: WinRegions,
    h: Hypergame,
    result: DaswResult,
) -> LayoutReport:
    reachable_states = h.project(h.vertices)
    return LayoutReport(
        game_states=h.base.n_states,
        product_vertices=h.full_vertex_count,
        reachable_vertices=h.n_vertices,
        dasw_vertices=len(result.region),
        dasw_projection=len(h.project(result.region)),
        asw_states_reachable=len(base_regions.win1 & reachable_states),
        asw_states_total=len(base_regions.win1),
    )
