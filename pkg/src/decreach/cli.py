"""Command-line pipeline: solve games, build hypergames, synthesize deceptive
strategies, simulate them, generate benchmarks, and play against the deceiver.

Exit codes: 0 ok, 1 usage or parse problem, 2 validation problem, 3 internal
(including the oracle disagreeing with the fixed point).  All randomness is
controlled by ``--seed`` (default from the ``DECREACH_SEED`` environment
variable), so every subcommand is deterministic given identical inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import game as game_io
from .asw import asw, asw_strategy
from .dasw import (
    SAFE2_FULL,
    SAFE2_PERCEIVED,
    dasw,
    extract_strategy,
    mdp_oracle,
    permissive,
)
from .errors import (
    DecreachError,
    GameFormatError,
    GameValidationError,
    OracleMismatchError,
    SimulationConfigError,
)
from .game import P1, GameGraph, p1_action_id
from .gridworld import GridConfig, generate, inference_for, layout_report
from .hypergame import Hypergame, build, dumps_export
from .inference import load_inference, save_inference
from .simulate import (
    P2Policy,
    RANDOM_WEIGHTS,
    UNIFORM,
    Episode,
    default_cap,
    run_batch,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this suite reserves 2 for validation."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get("DECREACH_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _write_json(doc, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def _out_dir(args) -> Path:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stem(path) -> str:
    return Path(path).stem


def _emit(args, text_lines, doc) -> None:
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        for line in text_lines:
            print(line)


def _episode_doc(h: Hypergame, episode: Episode) -> dict:
    base = h.base
    vertices = []
    for v in episode.vertices:
        s, i = h.vertex(v)
        vertices.append(
            {
                "vertex": v,
                "state": s,
                "state_label": base.state_labels[s],
                "perception": sorted(
                    base.action_name(a) for a in h.ptable.set_of(i)
                ),
            }
        )
    return {
        "seed": episode.seed,
        "start": episode.start,
        "outcome": episode.outcome,
        "steps": episode.steps,
        "vertices": vertices,
        "actions": [
            {"id": a, "label": base.action_name(a)} for a in episode.actions
        ],
    }


# -- solve wrappers -----------------------------------------------------


def _load_game(path) -> GameGraph:
    return game_io.load(path)


def _load_pair(args):
    game = _load_game(args.game)
    mech, x0 = load_inference(args.inference, game)
    return game, mech, x0


def _solve_hypergame(game, mech, x0, quantifier=SAFE2_FULL):
    h = build(game, x0, mech)
    base = asw(game)
    perm = permissive(h)
    result = dasw(h, safe2_p1_quantifier=quantifier, perm=perm, base_regions=base)
    return h, base, perm, result


def cmd_asw(args) -> int:
    game = _load_game(args.game)
    restricted_to = None
    if args.restrict is not None:
        tokens = [t for t in args.restrict.split(",") if t]
        kept = [p1_action_id(game, tok) for tok in tokens]
        game = game.restrict(kept)
        restricted_to = sorted(game.action_name(a) for a in kept)
    regions = asw(game)
    strategy = asw_strategy(game, regions)
    doc = {
        "game": str(args.game),
        "restricted_to": restricted_to,
        "win1": sorted(regions.win1),
        "win2": sorted(regions.win2),
        "levels": [
            {"state": s, "level": regions.attractor_levels[s]}
            for s in sorted(regions.win1)
        ],
        "strategy": [
            {"state": s, "action": strategy[s]} for s in sorted(strategy)
        ],
    }
    out = _write_json(doc, _out_dir(args) / f"{_stem(args.game)}.asw.json")
    name = game.state_name
    _emit(
        args,
        [
            f"win1 ({len(regions.win1)}): " + " ".join(name(s) for s in sorted(regions.win1)),
            f"win2 ({len(regions.win2)}): " + " ".join(name(s) for s in sorted(regions.win2)),
            "strategy: "
            + " ".join(
                f"{name(s)}->{game.action_name(a)}" for s, a in sorted(strategy.items())
            ),
            f"wrote {out}",
        ],
        {**doc, "output": str(out)},
    )
    return EXIT_OK


def cmd_dasw(args) -> int:
    game, mech, x0 = _load_pair(args)
    h, base, perm, result = _solve_hypergame(game, mech, x0, args.safe2_p1_quantifier)
    strat = extract_strategy(h, result, perm=perm, base_regions=base)
    oracle = mdp_oracle(h, perm)
    agrees = oracle == result.region
    doc = {
        "game": str(args.game),
        "inference": str(args.inference),
        "safe2_p1_quantifier": result.safe2_p1_quantifier,
        "vertices": h.n_vertices,
        "product_vertices": h.full_vertex_count,
        "beliefs": len(h.ptable),
        "region": sorted(result.region),
        "rank": [{"vertex": v, "rank": result.rank[v]} for v in sorted(result.rank)],
        "level_sizes": [len(level) for level in result.levels],
        "outer_iterations": result.outer_iterations,
        "safe1_iterations": list(result.safe1_iterations),
        "safe2_iterations": list(result.safe2_iterations),
        "strategy": [
            {"vertex": v, "actions": list(strat.p1[v])} for v in sorted(strat.p1)
        ],
        "p2_policy_kind": strat.p2_policy_kind,
        "oracle_agrees": agrees,
    }
    out = _write_json(doc, _out_dir(args) / f"{_stem(args.game)}.dasw.json")
    if not agrees:
        print(
            "oracle mismatch: independent almost-sure set differs from the "
            f"fixed point by {sorted(oracle ^ result.region)[:10]}",
            file=sys.stderr,
        )
        return EXIT_INTERNAL
    shown = sorted(result.region)[:12]
    region_line = "region: " + " ".join(h.vertex_name(v) for v in shown)
    if len(result.region) > len(shown):
        region_line += f" ... ({len(result.region) - len(shown)} more, see result file)"
    _emit(
        args,
        [
            f"hypergame: {h.n_vertices} reachable vertices "
            f"({h.full_vertex_count} in the product), {len(h.ptable)} beliefs",
            f"deceptive region: {len(result.region)} vertices "
            f"(level sizes {[len(l) for l in result.levels]})",
            region_line,
            f"oracle agrees: {agrees}",
            f"wrote {out}",
        ],
        {**doc, "output": str(out)},
    )
    return EXIT_OK


def cmd_hypergame(args) -> int:
    game, mech, x0 = _load_pair(args)
    h = build(game, x0, mech)
    out = _out_dir(args) / f"{_stem(args.game)}.hypergame.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps_export(h))
    _emit(
        args,
        [
            f"{h.n_vertices} reachable vertices, {len(h.ptable)} beliefs, "
            f"{len(h.hfinal)} final",
            f"wrote {out}",
        ],
        {
            "vertices": h.n_vertices,
            "beliefs": len(h.ptable),
            "final": len(h.hfinal),
            "output": str(out),
        },
    )
    return EXIT_OK


def _parse_starts(spec: str, h: Hypergame, region) -> list[int]:
    if spec == "region":
        return sorted(region)
    if spec == "all":
        return list(h.vertices)
    try:
        return [int(tok) for tok in spec.split(",") if tok]
    except ValueError:
        raise SimulationConfigError(
            f"--starts must be 'region', 'all' or a comma list of vertex ids, got {spec!r}"
        ) from None


def cmd_simulate(args) -> int:
    game, mech, x0 = _load_pair(args)
    h, base, perm, result = _solve_hypergame(game, mech, x0)
    strat = extract_strategy(h, result, perm=perm, base_regions=base)
    starts = _parse_starts(args.starts, h, result.region)
    policy = P2Policy(UNIFORM if args.policy == "uniform" else RANDOM_WEIGHTS)
    cap = args.cap if args.cap is not None else default_cap(h)
    stats = run_batch(
        h, strat, policy, starts, args.episodes, cap, args.seed, perm=perm
    )
    out_dir = _out_dir(args)
    counter_path = None
    if stats.counterexample is not None:
        counter_path = _write_json(
            _episode_doc(h, stats.counterexample),
            out_dir / f"{_stem(args.game)}.counterexample.json",
        )
    doc = {
        "game": str(args.game),
        "policy": stats.policy,
        "episodes_per_start": stats.episodes_per_start,
        "cap": stats.cap,
        "base_seed": stats.base_seed,
        "starts": [
            {
                "start": s.start,
                "reach_rate": s.reach_rate,
                "mean_steps": s.mean_steps,
                "max_steps": s.max_steps,
            }
            for s in stats.per_start
        ],
        "all_reached": stats.all_reached,
        "counterexample": None if counter_path is None else str(counter_path),
    }
    out = _write_json(doc, out_dir / f"{_stem(args.game)}.sim.json")
    lines = [
        f"policy {stats.policy}, {stats.episodes_per_start} episodes per start, cap {stats.cap}"
    ]
    for s in stats.per_start:
        lines.append(
            f"  {h.vertex_name(s.start)}: reach {s.reach_rate:.4f} "
            f"mean {s.mean_steps:.2f} max {s.max_steps}"
        )
    lines.append(f"all reached: {stats.all_reached}")
    if counter_path is not None:
        lines.append(f"counterexample: {counter_path}")
    lines.append(f"wrote {out}")
    _emit(args, lines, {**doc, "output": str(out)})
    return EXIT_OK


def _parse_cell(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"cell must be 'x,y', got {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_cells(text: str) -> list[tuple[int, int]]:
    return [_parse_cell(tok) for tok in text.split(";") if tok]


def cmd_gridworld(args) -> int:
    try:
        width, height = (int(p) for p in args.size.lower().split("x"))
        flags = _parse_cells(args.flags)
        if len(flags) != 2:
            raise ValueError("exactly two flag cells required")
        cfg = GridConfig(
            width=width,
            height=height,
            flags=(flags[0], flags[1]),
            obstacles=frozenset(_parse_cells(args.obstacles)),
            p1_start=_parse_cell(args.p1_start),
            p2_start=_parse_cell(args.p2_start),
            x0=tuple(tok for tok in args.x0.split(",") if tok),
        )
        game = generate(cfg)
    except ValueError as exc:
        print(f"gridworld: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    mech, x0 = inference_for(cfg, game)
    out_dir = _out_dir(args)
    game_path = out_dir / "gridworld.game.json"
    game_io.save(game, game_path)
    inference_path = out_dir / "gridworld.inference.json"
    save_inference(mech, x0, game, inference_path)
    lines = [
        f"{game.n_states} states, {len(game.trans)} transitions",
        f"wrote {game_path}",
        f"wrote {inference_path}",
    ]
    doc = {
        "states": game.n_states,
        "transitions": len(game.trans),
        "game": str(game_path),
        "inference": str(inference_path),
    }
    if args.solve:
        h, base, perm, result = _solve_hypergame(game, mech, x0)
        oracle = mdp_oracle(h, perm)
        report = layout_report(cfg, base, h, result)
        lines.append(report.format())
        lines.append(f"oracle agrees: {oracle == result.region}")
        doc["report"] = {
            "game_states": report.game_states,
            "product_vertices": report.product_vertices,
            "reachable_vertices": report.reachable_vertices,
            "dasw_vertices": report.dasw_vertices,
            "dasw_projection": report.dasw_projection,
            "asw_states_reachable": report.asw_states_reachable,
            "asw_states_total": report.asw_states_total,
            "deception_gain": report.deception_gain,
        }
        doc["oracle_agrees"] = oracle == result.region
        if not doc["oracle_agrees"]:
            print("oracle mismatch on the generated layout", file=sys.stderr)
            return EXIT_INTERNAL
    _emit(args, lines, doc)
    return EXIT_OK


# -- interactive play ----------------------------------------------------


def play_session(
    h: Hypergame,
    perm,
    result,
    strat,
    *,
    read=input,
    write=print,
    seed: int = 0,
    cap=None,
):
    """Terminal loop: the human plays the adversary against the deceiver.

    Returns the finished :class:`Episode` transcript.  The human sees his
    full move set with the perceptually safe ones marked, and watches the
    protagonist's moves update the perception set.
    """
    base = h.base
    if cap is None:
        cap = default_cap(h)
    v = h.initial
    vertices = [v]
    actions = []

    def belief_text(vertex):
        return ",".join(
            sorted(base.action_name(a) for a in h.perception(vertex))
        )

    write("you play the adversary; the deceiver plays P1")
    goal_names = [base.state_name(s) for s in sorted(base.final)]
    if len(goal_names) > 8:
        goal_names = goal_names[:8] + [f"... ({len(base.final) - 8} more)"]
    write(f"P1 wins by reaching: {' '.join(goal_names)}")
    outcome = "STEP_CAP"
    while len(actions) < cap:
        s = h.state_of(v)
        if v in h.hfinal:
            outcome = "REACHED_F"
            write(f"P1 reached {base.state_name(s)}: goal achieved in {len(actions)} steps")
            break
        moves = h.successors(v)
        if not moves:
            outcome = "DEAD_END"
            write(f"no moves at {base.state_name(s)}; play is stuck (P1 loses)")
            break
        if h.owner(v) == P1:
            chosen = strat.p1.get(v)
            aid = min(chosen) if chosen else moves[0][0]
            w = h.delta(v, aid)
            note = " [reveals]" if h.pindex_of(w) != h.pindex_of(v) else ""
            write(f"P1 plays {base.action_name(aid)}{note}")
            actions.append(aid)
            v = w
            vertices.append(v)
            write(f"  now at {base.state_name(h.state_of(v))}; P2 believes P1 has: {belief_text(v)}")
            continue
        marked = []
        permissive_here = perm.m.get(v, frozenset())
        for aid, _ in moves:
            tag = " [believed safe]" if aid in permissive_here else ""
            marked.append(f"{base.action_name(aid)}{tag}")
        write(f"state {base.state_name(s)}; P2 believes P1 has: {belief_text(v)}")
        write("your moves: " + "  ".join(marked))
        while True:
            try:
                token = read("P2 move (or q to quit)> ").strip()
            except EOFError:
                token = "q"
            if token == "q":
                write("session ended")
                outcome = "QUIT"
                break
            match = None
            for aid, _ in moves:
                if token == base.action_name(aid) or token == str(aid):
                    match = aid
                    break
            if match is None:
                write(f"unknown move {token!r}; choose one of the listed moves")
                continue
            actions.append(match)
            v = h.delta(v, match)
            vertices.append(v)
            break
        if outcome == "QUIT":
            break
    else:
        write(f"step cap {cap} reached; ending session")
    return Episode(
        seed=seed,
        start=h.initial,
        vertices=tuple(vertices),
        actions=tuple(actions),
        outcome=outcome,
        steps=len(actions),
    )


def cmd_play(args) -> int:
    game, mech, x0 = _load_pair(args)
    h, base, perm, result = _solve_hypergame(game, mech, x0)
    strat = extract_strategy(h, result, perm=perm, base_regions=base)
    episode = play_session(
        h, perm, result, strat, seed=args.seed, cap=args.cap
    )
    out = _write_json(
        _episode_doc(h, episode), _out_dir(args) / f"{_stem(args.game)}.play.json"
    )
    print(f"transcript: {out}")
    return EXIT_OK


# -- wiring ---------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="decreach", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", default=".", help="directory for result files")
    common.add_argument(
        "--format", choices=("text", "json"), default="text", help="stdout format"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("asw", parents=[common], help="classical winning regions")
    p.add_argument("game")
    p.add_argument("--restrict", help="comma list of P1 actions to keep")
    p.set_defaults(func=cmd_asw)

    p = sub.add_parser(
        "dasw", parents=[common], help="deceptive synthesis with oracle cross-check"
    )
    p.add_argument("game")
    p.add_argument("inference")
    p.add_argument(
        "--safe2-p1-quantifier",
        choices=(SAFE2_FULL, SAFE2_PERCEIVED),
        default=SAFE2_FULL,
        help="alphabet the adversary-confinement pass quantifies P1 vertices over",
    )
    p.set_defaults(func=cmd_dasw)

    p = sub.add_parser("hypergame", parents=[common], help="export the reachable product")
    p.add_argument("game")
    p.add_argument("inference")
    p.set_defaults(func=cmd_hypergame)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo strategy validation")
    p.add_argument("game")
    p.add_argument("inference")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--policy", choices=("uniform", "random"), default="uniform")
    p.add_argument(
        "--starts",
        default="region",
        help="'region', 'all' or a comma list of vertex ids",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gridworld", parents=[common], help="generate the grid benchmark")
    p.add_argument("--size", default="4x4")
    p.add_argument("--flags", default="3,1;3,3")
    p.add_argument("--obstacles", default="")
    p.add_argument("--p1-start", default="0,0")
    p.add_argument("--p2-start", default="3,2")
    p.add_argument("--x0", default="N,E,S,W")
    p.add_argument("--solve", action="store_true", help="solve and print the layout report")
    p.set_defaults(func=cmd_gridworld)

    p = sub.add_parser("play", parents=[common], help="play the adversary interactively")
    p.add_argument("game")
    p.add_argument("inference")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(func=cmd_play)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except GameFormatError as exc:
        print(f"decreach: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GameValidationError as exc:
        print(f"decreach: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SimulationConfigError, ValueError) as exc:
        print(f"decreach: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OracleMismatchError as exc:
        print(f"decreach: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except DecreachError as exc:
        print(f"decreach: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
