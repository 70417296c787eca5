"""Product of game states with the adversary's evolving belief.

Vertices are (game state, perception index) pairs discovered by breadth-first
exploration from the initial state under a chosen inference mechanism.  Only
reachable pairs are materialised: the full product over all belief subsets is
exponential in the protagonist's alphabet while everything downstream (the
deceptive fixed point, the oracle, the simulator) only ever touches reachable
vertices.  Perception indices are allocated in discovery order with the
initial belief at index 0, so builds are reproducible.

The adversary's own moves never change the perception index; only observed
protagonist actions feed the inference mechanism.
"""

from __future__ import annotations

import json
from collections import deque, namedtuple
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import GameFormatError
from .game import GameGraph, P1, Run, require_valid
from .inference import InferenceMechanism, infer_step


class PerceptionTable:
    """Bijection between dense indices and the belief subsets seen so far."""

    def __init__(self, sets: Sequence[frozenset[int]]):
        self._sets = tuple(frozenset(s) for s in sets)
        self._index = {s: i for i, s in enumerate(self._sets)}
        if len(self._index) != len(self._sets):
            raise ValueError("perception sets must be distinct")

    def set_of(self, index: int) -> frozenset[int]:
        return self._sets[index]

    def index_of(self, belief: frozenset[int]) -> int:
        return self._index[frozenset(belief)]

    @property
    def sets(self) -> tuple[frozenset[int], ...]:
        return self._sets

    def __len__(self) -> int:
        return len(self._sets)

    def __iter__(self):
        return iter(self._sets)


HypergameArrays = namedtuple(
    "HypergameArrays",
    "owner final_mask out_deg succ_ptr succ_act succ_dst pred_ptr pred_src",
)


class Hypergame:
    """Reachable belief-augmented arena; immutable once built."""

    def __init__(
        self,
        base: GameGraph,
        mech: InferenceMechanism,
        ptable: PerceptionTable,
        vertex_state: Sequence[int],
        vertex_pindex: Sequence[int],
        succ: Sequence[Sequence[tuple[int, int]]],
    ):
        self.base = base
        self.mech = mech
        self.ptable = ptable
        self._vstate = tuple(vertex_state)
        self._vpindex = tuple(vertex_pindex)
        self._succ = tuple(tuple(row) for row in succ)
        self._vid = {
            (s, i): v for v, (s, i) in enumerate(zip(self._vstate, self._vpindex))
        }
        self.hfinal = frozenset(
            v for v, s in enumerate(self._vstate) if s in base.final
        )
        self.initial = 0

    @property
    def x0(self) -> frozenset[int]:
        return self.ptable.set_of(0)

    @property
    def n_vertices(self) -> int:
        return len(self._vstate)

    @property
    def vertices(self) -> range:
        return range(len(self._vstate))

    @property
    def full_vertex_count(self) -> int:
        """Size of the state x reachable-belief product, counting pairs the
        breadth-first search never visits."""
        return self.base.n_states * len(self.ptable)

    def vertex(self, v: int) -> tuple[int, int]:
        return self._vstate[v], self._vpindex[v]

    def state_of(self, v: int) -> int:
        return self._vstate[v]

    def pindex_of(self, v: int) -> int:
        return self._vpindex[v]

    def perception(self, v: int) -> frozenset[int]:
        return self.ptable.set_of(self._vpindex[v])

    def owner(self, v: int) -> int:
        return self.base.owners[self._vstate[v]]

    def vid(self, state: int, pindex: int) -> int:
        try:
            return self._vid[(state, pindex)]
        except KeyError:
            raise ValueError(f"({state}, {pindex}) is not a reachable vertex") from None

    def successors(self, v: int) -> tuple[tuple[int, int], ...]:
        return self._succ[v]

    def delta(self, v: int, aid: int) -> Optional[int]:
        for a, w in self._succ[v]:
            if a == aid:
                return w
        return None

    def project(self, vs: Iterable[int]) -> frozenset[int]:
        return frozenset(self._vstate[v] for v in vs)

    def vertex_name(self, v: int) -> str:
        s, i = self.vertex(v)
        belief = ",".join(
            sorted(self.base.action_name(a) for a in self.ptable.set_of(i))
        )
        return f"({self.base.state_name(s)}|{{{belief}}})"

    def __repr__(self) -> str:
        return (
            f"Hypergame(vertices={self.n_vertices}, beliefs={len(self.ptable)}, "
            f"final={len(self.hfinal)})"
        )

    @cached_property
    def solver_arrays(self) -> HypergameArrays:
        n = self.n_vertices
        owner = np.array([self.owner(v) for v in range(n)], dtype=np.int8)
        final_mask = np.zeros(n, dtype=np.uint8)
        for v in self.hfinal:
            final_mask[v] = 1
        out_deg = np.array([len(r) for r in self._succ], dtype=np.int32)
        m = int(out_deg.sum())
        succ_ptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(out_deg, out=succ_ptr[1:])
        succ_act = np.empty(m, dtype=np.int32)
        succ_dst = np.empty(m, dtype=np.int32)
        k = 0
        for row in self._succ:
            for a, w in row:
                succ_act[k] = a
                succ_dst[k] = w
                k += 1
        pred_counts = np.zeros(n, dtype=np.int32)
        for row in self._succ:
            for _, w in row:
                pred_counts[w] += 1
        pred_ptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(pred_counts, out=pred_ptr[1:])
        pred_src = np.empty(m, dtype=np.int32)
        fill = pred_ptr[:-1].copy()
        for v, row in enumerate(self._succ):
            for _, w in row:
                pred_src[fill[w]] = v
                fill[w] += 1
        return HypergameArrays(
            owner, final_mask, out_deg, succ_ptr, succ_act, succ_dst, pred_ptr, pred_src
        )


def build(game: GameGraph, x0: Iterable[int], mech: InferenceMechanism) -> Hypergame:
    """Explore the reachable product from (initial state, initial belief)."""
    require_valid(game)
    if game.initial is None:
        raise ValueError("hypergame construction needs a game with an initial state")
    x0 = frozenset(int(a) for a in x0)
    if not x0 <= set(game.a1):
        raise ValueError(f"x0 contains non-P1 actions: {sorted(x0 - set(game.a1))}")
    if mech.universe != frozenset(game.a1):
        raise ValueError("inference mechanism was built for a different P1 alphabet")

    sets: list[frozenset[int]] = [x0]
    set_index: dict[frozenset[int], int] = {x0: 0}
    vstate: list[int] = []
    vpindex: list[int] = []
    vid: dict[tuple[int, int], int] = {}
    succ: list[list[tuple[int, int]]] = []

    def intern_vertex(s: int, i: int) -> tuple[int, bool]:
        key = (s, i)
        v = vid.get(key)
        if v is not None:
            return v, False
        v = len(vstate)
        vid[key] = v
        vstate.append(s)
        vpindex.append(i)
        return v, True

    root, _ = intern_vertex(game.initial, 0)
    queue = deque([root])
    while queue:
        v = queue.popleft()
        s, i = vstate[v], vpindex[v]
        row: list[tuple[int, int]] = []
        if game.owners[s] == P1:
            belief = sets[i]
            for aid, t in game._succ(s):
                updated = infer_step(mech, belief, aid)
                j = set_index.get(updated)
                if j is None:
                    j = len(sets)
                    set_index[updated] = j
                    sets.append(updated)
                w, fresh = intern_vertex(t, j)
                if fresh:
                    queue.append(w)
                row.append((aid, w))
        else:
            for aid, t in game._succ(s):
                w, fresh = intern_vertex(t, i)
                if fresh:
                    queue.append(w)
                row.append((aid, w))
        succ.append(row)

    return Hypergame(game, mech, PerceptionTable(sets), vstate, vpindex, succ)


def project_run(
    h: Hypergame, vertices: Sequence[int], actions: Optional[Sequence[int]] = None
) -> Run:
    """Project a delta-connected vertex sequence onto game states.

    When the action labels are not supplied, each step takes the lowest
    action index connecting the pair (several labels can share an edge).
    """
    vs = [int(v) for v in vertices]
    if not vs:
        raise ValueError("empty hypergame run")
    for v in vs:
        if not 0 <= v < h.n_vertices:
            raise ValueError(f"unknown vertex id {v}")
    if actions is None:
        acts = []
        for u, w in zip(vs, vs[1:]):
            found = None
            for a, t in h.successors(u):
                if t == w:
                    found = a
                    break
            if found is None:
                raise ValueError(f"run is not delta-connected at {u} -> {w}")
            acts.append(found)
    else:
        acts = [int(a) for a in actions]
        if len(acts) != len(vs) - 1:
            raise ValueError("actions must be one entry shorter than vertices")
        for u, a, w in zip(vs, acts, vs[1:]):
            if h.delta(u, a) != w:
                raise ValueError(
                    f"run is not delta-connected at {u} --{a}--> {w}"
                )
    return Run(tuple(h.state_of(v) for v in vs), tuple(acts))


# -- export format -----------------------------------------------------
#
# Mirrors the game file format at the vertex level, with each vertex
# carrying its game state and belief (by action label), plus the belief
# table itself.


def export_doc(h: Hypergame) -> dict:
    def belief_names(i: int):
        return [
            name
            for name in sorted(
                h.base.action_name(a) for a in h.ptable.set_of(i)
            )
        ]

    vertices = []
    for v in h.vertices:
        s, i = h.vertex(v)
        entry: dict = {"id": v, "state": s}
        if h.base.state_labels[s] is not None:
            entry["state_label"] = h.base.state_labels[s]
        entry["perception"] = belief_names(i)
        vertices.append(entry)
    transitions = []
    for v in h.vertices:
        for a, w in h.successors(v):
            transitions.append({"from": v, "action": a, "to": w})
    return {
        "perceptions": [
            {"index": i, "actions": belief_names(i)} for i in range(len(h.ptable))
        ],
        "vertices": vertices,
        "transitions": transitions,
        "final": sorted(h.hfinal),
        "initial": h.initial,
    }


def dumps_export(h: Hypergame) -> str:
    return json.dumps(export_doc(h), indent=2) + "\n"


def save_export(h: Hypergame, path) -> None:
    Path(path).write_text(dumps_export(h))


def load_export(path) -> dict:
    """Parse and structurally check an exported hypergame file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise GameFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{path}: not valid JSON: {exc}") from exc
    for key in ("perceptions", "vertices", "transitions", "final", "initial"):
        if key not in doc:
            raise GameFormatError(f"{path}: missing required field '{key}'")
    ids = [entry.get("id") for entry in doc["vertices"]]
    if ids != list(range(len(ids))):
        raise GameFormatError(f"{path}: vertex ids must be exactly 0..{len(ids) - 1}")
    return doc
