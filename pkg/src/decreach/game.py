"""Turn-based deterministic reachability games on explicit graphs.

States and actions carry dense integer ids so the fixed-point solvers can run
on flat arrays; labels exist only for files and diagnostics.  A ``GameGraph``
is immutable after construction and safe to share read-only between workers.

Conventions adopted here and relied on everywhere else:

* transitions are partial: an undefined (state, action) pair simply has no
  edge, and a state with no outgoing edges is a legal dead end (a play stuck
  in a dead end outside the final set is lost for the protagonist);
* all iteration orders are deterministic (state index, then action index),
  so every solver output is reproducible across runs.
"""

from __future__ import annotations

import json
from collections import namedtuple
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import GameFormatError, GameValidationError

P1 = 0
P2 = 1
OWNER_NAMES = ("P1", "P2")


@dataclass(frozen=True)
class Action:
    """A move belonging to exactly one player's alphabet."""

    id: int
    owner: int
    label: Optional[str] = None

    def name(self) -> str:
        return self.label if self.label is not None else str(self.id)


@dataclass(frozen=True)
class Violation:
    """One broken invariant reported by :func:`validate`."""

    kind: str
    detail: str
    state: Optional[int] = None
    action: Optional[int] = None

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass(frozen=True)
class Run:
    """A play projected onto game states; ``actions`` is one entry shorter."""

    states: tuple[int, ...]
    actions: tuple[int, ...]


SolverArrays = namedtuple(
    "SolverArrays",
    "owner final_mask out_deg succ_ptr succ_act succ_dst pred_ptr pred_src",
)


class GameGraph:
    """Explicit two-player arena with deterministic partial transitions.

    ``owners`` fixes the state count: state ids are the positions
    ``0..len(owners)-1``.  Transitions may reference unknown states or
    actions; such defects are reported by :func:`validate` rather than
    rejected here, so defective files can be loaded and diagnosed.
    """

    def __init__(
        self,
        owners: Sequence[int],
        final: Iterable[int],
        actions: Iterable[Action],
        transitions: Iterable[tuple[int, int, int]],
        initial: Optional[int] = None,
        state_labels: Optional[Sequence[Optional[str]]] = None,
    ):
        self._owners = tuple(int(o) for o in owners)
        if any(o not in (P1, P2) for o in self._owners):
            raise ValueError("state owners must be P1 or P2")
        n = len(self._owners)
        if state_labels is None:
            self._labels: tuple[Optional[str], ...] = (None,) * n
        else:
            self._labels = tuple(state_labels)
            if len(self._labels) != n:
                raise ValueError("state_labels length must match owners")
        acts = sorted(actions, key=lambda a: a.id)
        self._actions = tuple(acts)
        self._action_by_id = {a.id: a for a in acts}
        if len(self._action_by_id) != len(acts):
            raise ValueError("duplicate action ids")
        self._final = frozenset(int(s) for s in final)
        self._initial = None if initial is None else int(initial)
        trans: dict[tuple[int, int], int] = {}
        conflicts = []
        for s, a, t in transitions:
            key = (int(s), int(a))
            tgt = int(t)
            if key in trans:
                if trans[key] != tgt:
                    conflicts.append((key[0], key[1], trans[key], tgt))
                continue
            trans[key] = tgt
        self._trans = trans
        self._conflicts = tuple(conflicts)

    # -- basic views ---------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self._owners)

    @property
    def states(self) -> range:
        return range(len(self._owners))

    @property
    def owners(self) -> tuple[int, ...]:
        return self._owners

    @property
    def state_labels(self) -> tuple[Optional[str], ...]:
        return self._labels

    @property
    def final(self) -> frozenset[int]:
        return self._final

    @property
    def initial(self) -> Optional[int]:
        return self._initial

    @property
    def actions(self) -> tuple[Action, ...]:
        return self._actions

    @cached_property
    def a1(self) -> tuple[int, ...]:
        return tuple(a.id for a in self._actions if a.owner == P1)

    @cached_property
    def a2(self) -> tuple[int, ...]:
        return tuple(a.id for a in self._actions if a.owner == P2)

    def action(self, aid: int) -> Action:
        try:
            return self._action_by_id[aid]
        except KeyError:
            raise ValueError(f"unknown action id {aid}") from None

    def action_name(self, aid: int) -> str:
        act = self._action_by_id.get(aid)
        return act.name() if act is not None else str(aid)

    def state_name(self, s: int) -> str:
        label = self._labels[s] if 0 <= s < self.n_states else None
        return label if label is not None else f"s{s}"

    @property
    def trans(self) -> dict[tuple[int, int], int]:
        return dict(self._trans)

    def trans_get(self, s: int, a: int) -> Optional[int]:
        return self._trans.get((s, a))

    def transitions(self) -> Iterator[tuple[int, int, int]]:
        """All defined transitions in canonical (state, action) order."""
        for (s, a) in sorted(self._trans):
            yield s, a, self._trans[(s, a)]

    # -- operations ----------------------------------------------------

    @cached_property
    def _succ_lists(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        rows: list[list[tuple[int, int]]] = [[] for _ in range(self.n_states)]
        for (s, a) in sorted(self._trans):
            if 0 <= s < self.n_states:
                rows[s].append((a, self._trans[(s, a)]))
        return tuple(tuple(r) for r in rows)

    def _succ(self, s: int) -> tuple[tuple[int, int], ...]:
        return self._succ_lists[s]

    def successors(self, s: int) -> list[tuple[int, int]]:
        """Defined (action, target) pairs from ``s`` in action-index order."""
        if not 0 <= s < self.n_states:
            raise ValueError(f"unknown state id {s}")
        return list(self._succ_lists[s])

    def restrict(self, kept: Iterable[int]) -> "GameGraph":
        """The same arena with the protagonist's alphabet cut down to ``kept``.

        Transitions labelled by dropped protagonist actions disappear; the
        opponent's side of the game is untouched.
        """
        kept_set = frozenset(int(a) for a in kept)
        bad = kept_set - set(self.a1)
        if bad:
            raise ValueError(
                f"restrict: not P1 actions of this game: {sorted(bad)}"
            )
        actions = [a for a in self._actions if a.owner == P2 or a.id in kept_set]
        transitions = []
        for (s, a), t in self._trans.items():
            act = self._action_by_id.get(a)
            if act is not None and act.owner == P1 and a not in kept_set:
                continue
            transitions.append((s, a, t))
        return GameGraph(
            owners=self._owners,
            final=self._final,
            actions=actions,
            transitions=transitions,
            initial=self._initial,
            state_labels=self._labels,
        )

    def __eq__(self, other: object):
        if not isinstance(other, GameGraph):
            return NotImplemented
        return (
            self._owners == other._owners
            and self._labels == other._labels
            and self._final == other._final
            and self._actions == other._actions
            and self._trans == other._trans
            and self._initial == other._initial
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"GameGraph(states={self.n_states}, a1={len(self.a1)}, "
            f"a2={len(self.a2)}, edges={len(self._trans)}, "
            f"final={len(self._final)})"
        )

    # -- flat arrays for the kernels ------------------------------------

    @cached_property
    def solver_arrays(self) -> SolverArrays:
        """CSR successor/predecessor arrays; only valid on validated games."""
        n = self.n_states
        owner = np.array(self._owners, dtype=np.int8)
        final_mask = np.zeros(n, dtype=np.uint8)
        for s in self._final:
            final_mask[s] = 1
        rows = self._succ_lists
        out_deg = np.array([len(r) for r in rows], dtype=np.int32)
        m = int(out_deg.sum())
        succ_ptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(out_deg, out=succ_ptr[1:])
        succ_act = np.empty(m, dtype=np.int32)
        succ_dst = np.empty(m, dtype=np.int32)
        k = 0
        for r in rows:
            for a, t in r:
                succ_act[k] = a
                succ_dst[k] = t
                k += 1
        pred_counts = np.zeros(n, dtype=np.int32)
        for r in rows:
            for _, t in r:
                pred_counts[t] += 1
        pred_ptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(pred_counts, out=pred_ptr[1:])
        pred_src = np.empty(m, dtype=np.int32)
        fill = pred_ptr[:-1].copy()
        for s, r in enumerate(rows):
            for _, t in r:
                pred_src[fill[t]] = s
                fill[t] += 1
        return SolverArrays(
            owner, final_mask, out_deg, succ_ptr, succ_act, succ_dst, pred_ptr, pred_src
        )


def validate(game: GameGraph) -> list[Violation]:
    """Check every structural invariant; an empty list means the game is sound.

    Violations are data, not failures: loading tools collect them so a broken
    file can be reported in full rather than dying on the first defect.
    """
    problems: list[Violation] = []
    n = game.n_states

    def check_state(s: int, where: str) -> bool:
        if not 0 <= s < n:
            problems.append(
                Violation("dangling-state", f"{where} references unknown state {s}", state=s)
            )
            return False
        return True

    for s in sorted(game.final):
        check_state(s, "final set")
    if game.initial is not None:
        check_state(game.initial, "initial state")

    known = {a.id for a in game.actions}
    for s, a, t in game.transitions():
        ok = check_state(s, f"transition ({s},{game.action_name(a)})")
        check_state(t, f"transition from {s} via {game.action_name(a)}")
        if a not in known:
            problems.append(
                Violation(
                    "unknown-action",
                    f"transition from state {s} uses undeclared action {a}",
                    state=s,
                    action=a,
                )
            )
            continue
        if ok:
            act = game.action(a)
            if act.owner != game.owners[s]:
                problems.append(
                    Violation(
                        "ownership",
                        f"{OWNER_NAMES[act.owner]} action {act.name()} attached to "
                        f"{OWNER_NAMES[game.owners[s]]} state {game.state_name(s)}",
                        state=s,
                        action=a,
                    )
                )
    for s, a, t1, t2 in game._conflicts:
        problems.append(
            Violation(
                "nondeterministic",
                f"state {s} has two targets ({t1}, {t2}) for action {game.action_name(a)}",
                state=s,
                action=a,
            )
        )
    return problems


def require_valid(game: GameGraph) -> None:
    violations = validate(game)
    if violations:
        raise GameValidationError(violations)


def p1_action_id(game: GameGraph, token) -> int:
    """Resolve a label or integer id to one of the game's P1 actions."""
    a1 = set(game.a1)
    if isinstance(token, int):
        if token in a1:
            return token
        raise GameFormatError(f"{token} is not a P1 action id of this game")
    text = str(token)
    matches = [a.id for a in game.actions if a.owner == P1 and a.label == text]
    if len(matches) == 1:
        return matches[0]
    if len(matches) > 1:
        raise GameFormatError(f"P1 action label {text!r} is ambiguous")
    if text.lstrip("-").isdigit() and int(text) in a1:
        return int(text)
    raise GameFormatError(f"unknown P1 action {text!r}")


# -- file format -------------------------------------------------------
#
# JSON object with fields:
#   states:      [{id, label?, owner: "P1"|"P2", final: bool}, ...]
#   actions:     [{id, label?, owner}, ...]
#   transitions: [{from, action, to}, ...]
#   initial:     optional state id
# Canonical order: states ascending, actions ascending, transitions sorted
# by (from, action).  `dumps` always emits this order, so save/load is a
# byte-identical round trip.


def _need(entry: dict, key: str, where: str):
    if key not in entry:
        raise GameFormatError(f"{where}: missing required field '{key}'")
    return entry[key]


def _owner_code(text, where: str) -> int:
    if text not in OWNER_NAMES:
        raise GameFormatError(f"{where}: owner must be 'P1' or 'P2', got {text!r}")
    return OWNER_NAMES.index(text)


def loads(text: str, source: str = "<string>") -> GameGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{source}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GameFormatError(f"{source}: top level must be an object")
    for key in ("states", "actions", "transitions"):
        if key not in doc:
            raise GameFormatError(f"{source}: missing required field '{key}'")
        if not isinstance(doc[key], list):
            raise GameFormatError(f"{source}: field '{key}' must be a list")

    entries = []
    for idx, entry in enumerate(doc["states"]):
        where = f"{source}: states[{idx}]"
        if not isinstance(entry, dict):
            raise GameFormatError(f"{where}: must be an object")
        sid = _need(entry, "id", where)
        owner = _owner_code(_need(entry, "owner", where), where)
        final = _need(entry, "final", where)
        if not isinstance(final, bool):
            raise GameFormatError(f"{where}: field 'final' must be a boolean")
        entries.append((int(sid), entry.get("label"), owner, final))
    entries.sort(key=lambda e: e[0])
    ids = [e[0] for e in entries]
    if ids != list(range(len(ids))):
        raise GameFormatError(
            f"{source}: state ids must be exactly 0..{len(ids) - 1}, got {ids}"
        )
    owners = [e[2] for e in entries]
    labels = [e[1] for e in entries]
    final = [e[0] for e in entries if e[3]]

    actions = []
    for idx, entry in enumerate(doc["actions"]):
        where = f"{source}: actions[{idx}]"
        if not isinstance(entry, dict):
            raise GameFormatError(f"{where}: must be an object")
        aid = _need(entry, "id", where)
        owner = _owner_code(_need(entry, "owner", where), where)
        actions.append(Action(int(aid), owner, entry.get("label")))
    if len({a.id for a in actions}) != len(actions):
        raise GameFormatError(f"{source}: duplicate action ids")

    transitions = []
    for idx, entry in enumerate(doc["transitions"]):
        where = f"{source}: transitions[{idx}]"
        if not isinstance(entry, dict):
            raise GameFormatError(f"{where}: must be an object")
        transitions.append(
            (
                int(_need(entry, "from", where)),
                int(_need(entry, "action", where)),
                int(_need(entry, "to", where)),
            )
        )

    initial = doc.get("initial")
    game = GameGraph(
        owners=owners,
        final=final,
        actions=actions,
        transitions=transitions,
        initial=None if initial is None else int(initial),
        state_labels=labels,
    )
    violations = validate(game)
    if violations:
        raise GameValidationError(violations)
    return game


def load(path) -> GameGraph:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GameFormatError(f"cannot read {path}: {exc}") from exc
    return loads(text, source=str(path))


def dumps(game: GameGraph) -> str:
    states = []
    for s in game.states:
        entry: dict = {"id": s}
        if game.state_labels[s] is not None:
            entry["label"] = game.state_labels[s]
        entry["owner"] = OWNER_NAMES[game.owners[s]]
        entry["final"] = s in game.final
        states.append(entry)
    actions = []
    for a in game.actions:
        entry = {"id": a.id}
        if a.label is not None:
            entry["label"] = a.label
        entry["owner"] = OWNER_NAMES[a.owner]
        actions.append(entry)
    transitions = [
        {"from": s, "action": a, "to": t} for s, a, t in game.transitions()
    ]
    doc: dict = {"states": states, "actions": actions, "transitions": transitions}
    if game.initial is not None:
        doc["initial"] = game.initial
    return json.dumps(doc, indent=2) + "\n"


def save(game: GameGraph, path) -> None:
    Path(path).write_text(dumps(game))
