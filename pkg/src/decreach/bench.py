"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python -m decreach.bench [--quick]

Times the three hot paths (attractor fixed point, full deceptive solve,
episode batches) on the grid benchmark with both backends and prints the
speedups.  Results are identical between backends by construction; this
only measures time.
"""

from __future__ import annotations

import argparse
import time

from . import _kernels
from .asw import asw
from .dasw import dasw, extract_strategy, permissive
from .gridworld import GridConfig, generate, inference_for
from .hypergame import build
from .simulate import P2Policy, RANDOM_WEIGHTS, UNIFORM, run_batch


def _time(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(quick: bool = False) -> list[tuple[str, float, float]]:
    cfg = GridConfig() if quick else GridConfig(width=5, height=5, flags=((4, 1), (4, 4)), p2_start=(4, 2))
    game = generate(cfg)
    mech, x0 = inference_for(cfg, game)
    h = build(game, x0, mech)
    perm = permissive(h)
    base = asw(game)
    result = dasw(h, perm=perm, base_regions=base)
    strat = extract_strategy(h, result, perm=perm, base_regions=base)
    starts = sorted(result.region)[:8]
    episodes = 2_000 if quick else 20_000
    arr = game.solver_arrays

    workloads = [
        (
            f"attractor ({game.n_states} states)",
            lambda: _kernels.impl.attractor(
                arr.owner, arr.out_deg, arr.pred_ptr, arr.pred_src, arr.final_mask
            ),
        ),
        (
            f"deceptive solve ({h.n_vertices} vertices)",
            lambda: dasw(h, perm=perm, base_regions=base),
        ),
        (
            f"simulation ({len(starts)} starts x {episodes} episodes, uniform)",
            lambda: run_batch(
                h, strat, P2Policy(UNIFORM), starts, episodes, base_seed=1, perm=perm
            ),
        ),
        (
            f"simulation ({len(starts)} starts x {episodes} episodes, weighted)",
            lambda: run_batch(
                h, strat, P2Policy(RANDOM_WEIGHTS), starts, episodes, base_seed=1, perm=perm
            ),
        ),
    ]

    rows = []
    for name, fn in workloads:
        _kernels.select("pure")
        t_pure = _time(fn, repeat=1 if quick else 2)
        if _kernels.HAVE_COMPILED:
            _kernels.select("compiled")
            t_compiled = _time(fn)
        else:
            t_compiled = float("nan")
        rows.append((name, t_pure, t_compiled))
    _kernels.select("auto")
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args(argv)
    if not _kernels.HAVE_COMPILED:
        print("compiled kernels unavailable; timing the pure backend only")
    rows = run(quick=args.quick)
    width = max(len(r[0]) for r in rows)
    print(f"{'workload'.ljust(width)}  {'pure':>10}  {'compiled':>10}  {'speedup':>8}")
    for name, t_pure, t_compiled in rows:
        speed = t_pure / t_compiled if t_compiled == t_compiled and t_compiled > 0 else float("nan")
        print(
            f"{name.ljust(width)}  {t_pure * 1e3:>8.1f}ms  {t_compiled * 1e3:>8.1f}ms  {speed:>7.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
