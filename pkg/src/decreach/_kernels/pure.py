"""Pure-Python worklist and simulation kernels.

Reference implementation of the hot loops.  The compiled extension in
``_core.pyx`` mirrors these functions operation for operation (same worklist
rounds, same PRNG, same floating-point evaluation order) so that both
backends produce bit-identical results; the equivalence is enforced by
tests/test_kernels.py.
"""

from __future__ import annotations

from collections import deque

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


class SplitMix64:
    """Tiny deterministic PRNG, identical in both kernel backends."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * _INV53


def prng_doubles(seed: int, n: int) -> np.ndarray:
    rng = SplitMix64(seed)
    return np.array([rng.next_double() for _ in range(n)], dtype=np.float64)


def _as_list(seq):
    """Plain-Python list view; numpy arrays convert via tolist to avoid
    leaking numpy scalar types into the integer arithmetic."""
    tolist = getattr(seq, "tolist", None)
    return tolist() if callable(tolist) else list(seq)


def attractor(owner, out_deg, pred_ptr, pred_src, final_mask) -> np.ndarray:
    """Backward-worklist least fixed point of controllable predecessors.

    Returns per-state entry rounds (-1 = outside the winning region).  The
    FIFO queue processes states in nondecreasing round order, so the rounds
    coincide with the literal synchronous iteration in which each state
    would join the growing region: final states at round 0; a protagonist
    state one past its earliest winning successor; an opponent state one
    past its latest successor (all must win first).  Opponent dead ends
    satisfy the universal condition vacuously and join at round 1.
    """
    owner = _as_list(owner)
    out_deg = _as_list(out_deg)
    pred_ptr = _as_list(pred_ptr)
    pred_src = _as_list(pred_src)
    final_mask = _as_list(final_mask)
    n = len(owner)
    level = [-1] * n
    remaining = out_deg[:]
    queue: deque[int] = deque()
    for s in range(n):
        if final_mask[s]:
            level[s] = 0
            queue.append(s)
    for s in range(n):
        if not final_mask[s] and owner[s] == 1 and out_deg[s] == 0:
            level[s] = 1
            queue.append(s)
    while queue:
        w = queue.popleft()
        next_level = level[w] + 1
        for k in range(pred_ptr[w], pred_ptr[w + 1]):
            u = pred_src[k]
            if level[u] >= 0:
                continue
            if owner[u] == 0:
                level[u] = next_level
                queue.append(u)
            else:
                remaining[u] -= 1
                if remaining[u] == 0:
                    level[u] = next_level
                    queue.append(u)
    return np.array(level, dtype=np.int32)


def safe_fixpoint(
    owner,
    in_u,
    final_mask,
    succ_ptr,
    succ_dst,
    pred_ptr,
    pred_src,
    p1_exists,
    keep_finals,
):
    """Greatest subset of ``in_u`` closed under the per-player edge conditions.

    Protagonist vertices need one edge staying inside (``p1_exists``) or all
    of them (universal mode); opponent vertices always need all their edges
    (the caller passes only the edges being quantified over, so a vertex
    with an empty row passes vacuously).  With ``keep_finals`` set, goal
    vertices are absorbing and never removed.

    Returns ``(member_mask, removal_round, iterations)``.  The removal
    rounds replay the synchronous shrinking passes exactly; ``iterations``
    counts passes with the convention that convergence is only detectable
    from the second pass on, hence the minimum reported value is 2.
    """
    owner = _as_list(owner)
    in_u = _as_list(in_u)
    final_mask = _as_list(final_mask)
    succ_ptr = _as_list(succ_ptr)
    succ_dst = _as_list(succ_dst)
    pred_ptr = _as_list(pred_ptr)
    pred_src = _as_list(pred_src)
    n = len(owner)
    y = [bool(in_u[v]) for v in range(n)]
    deg = [succ_ptr[v + 1] - succ_ptr[v] for v in range(n)]
    cnt = [0] * n
    for v in range(n):
        if not y[v]:
            continue
        c = 0
        for k in range(succ_ptr[v], succ_ptr[v + 1]):
            if y[succ_dst[k]]:
                c += 1
        cnt[v] = c

    def holds(v: int) -> bool:
        if keep_finals and final_mask[v]:
            return True
        if owner[v] == 0 and p1_exists:
            return cnt[v] > 0
        return cnt[v] == deg[v]

    removal_round = [0] * n
    frontier = [v for v in range(n) if y[v] and not holds(v)]
    rounds = 0
    while frontier:
        rounds += 1
        for v in frontier:
            y[v] = False
            removal_round[v] = rounds
        touched = []
        for v in frontier:
            for k in range(pred_ptr[v], pred_ptr[v + 1]):
                u = pred_src[k]
                if y[u]:
                    cnt[u] -= 1
                    touched.append(u)
        frontier = []
        seen = set()
        for u in touched:
            if y[u] and u not in seen and not holds(u):
                seen.add(u)
                frontier.append(u)
    iterations = max(rounds + 1, 2)
    member = np.array([1 if y[v] else 0 for v in range(n)], dtype=np.uint8)
    return member, np.array(removal_round, dtype=np.int32), iterations


def safe_reach_fixpoint(
    owner,
    in_u,
    target_mask,
    succ_ptr,
    succ_dst,
    pred_ptr,
    pred_src,
):
    """Largest subset of ``in_u`` from which the protagonist can stay inside
    and reach a target with probability one.

    Each pass keeps the positive-probability backward closure of the targets
    within the current set: protagonist vertices need one edge into the
    closure; opponent vertices need all their edges to stay in the set and
    one of them to enter the closure (full support makes that a guaranteed
    positive-probability step).  Iterating the pass until it keeps
    everything turns positive progress into probability-one reachability.
    Targets inside the set always survive.  Pass counting matches
    :func:`safe_fixpoint`: convergence is only detectable from the second
    pass on.
    """
    owner = _as_list(owner)
    in_u = _as_list(in_u)
    target_mask = _as_list(target_mask)
    succ_ptr = _as_list(succ_ptr)
    succ_dst = _as_list(succ_dst)
    pred_ptr = _as_list(pred_ptr)
    pred_src = _as_list(pred_src)
    n = len(owner)
    y = [bool(in_u[v]) for v in range(n)]
    deg = [succ_ptr[v + 1] - succ_ptr[v] for v in range(n)]
    cnt = [0] * n  # out-edges currently inside y, maintained decrementally
    for v in range(n):
        if not y[v]:
            continue
        c = 0
        for k in range(succ_ptr[v], succ_ptr[v + 1]):
            if y[succ_dst[k]]:
                c += 1
        cnt[v] = c
    reach = [False] * n
    passes_with_change = 0
    while True:
        stack = []
        for v in range(n):
            reach[v] = False
        for v in range(n):
            if y[v] and target_mask[v]:
                reach[v] = True
                stack.append(v)
        while stack:
            w = stack.pop()
            for k in range(pred_ptr[w], pred_ptr[w + 1]):
                u = pred_src[k]
                if not y[u] or reach[u]:
                    continue
                if owner[u] == 0 or cnt[u] == deg[u]:
                    reach[u] = True
                    stack.append(u)
        dropped = [v for v in range(n) if y[v] and not reach[v]]
        if not dropped:
            break
        passes_with_change += 1
        for v in dropped:
            y[v] = False
        for v in dropped:
            for k in range(pred_ptr[v], pred_ptr[v + 1]):
                u = pred_src[k]
                if y[u]:
                    cnt[u] -= 1
    iterations = max(passes_with_change + 1, 2)
    member = np.array([1 if y[v] else 0 for v in range(n)], dtype=np.uint8)
    return member, iterations


def _pick_p2(rng, policy, lo, hi, wbuf, wsum, drawn, epoch, v):
    """Draw one support edge; returns its absolute index in the supp arrays."""
    k = hi - lo
    if policy == 0:
        return lo + rng.next_u64() % k
    if drawn[v] != epoch:
        total = 0.0
        for i in range(lo, hi):
            w = 0.5 + rng.next_double()
            wbuf[i] = w
            total += w
        wsum[v] = total
        drawn[v] = epoch
    r = rng.next_double() * wsum[v]
    j = lo
    while j < hi - 1:
        r -= wbuf[j]
        if r < 0.0:
            break
        j += 1
    return j


def episode_batch(
    owner,
    final_mask,
    p1_next,
    supp_ptr,
    supp_dst,
    policy,
    start,
    n_episodes,
    cap,
    seed0,
):
    """Run seeded episodes from one start vertex without recording traces.

    Episode ``e`` uses PRNG seed ``seed0 + e``.  Outcome codes: 1 reached a
    goal vertex, 2 step cap, 3 dead end.  Returns ``(reached, steps_total,
    steps_max, first_fail)`` where ``first_fail`` is the first episode index
    that did not reach a goal (-1 when all did).
    """
    owner = _as_list(owner)
    final_mask = _as_list(final_mask)
    p1_next = _as_list(p1_next)
    supp_ptr = _as_list(supp_ptr)
    supp_dst = _as_list(supp_dst)
    n = len(owner)
    m = supp_ptr[n]
    wbuf = [0.0] * m
    wsum = [0.0] * n
    # weights are drawn once per (episode, vertex); an epoch stamp avoids
    # clearing the whole marker array between episodes
    drawn = [0] * n
    reached = 0
    steps_total = 0
    steps_max = 0
    first_fail = -1
    for e in range(n_episodes):
        rng = SplitMix64(seed0 + e)
        epoch = e + 1
        v = start
        steps = 0
        while True:
            if final_mask[v]:
                outcome = 1
                break
            if steps >= cap:
                outcome = 2
                break
            if owner[v] == 0:
                nxt = p1_next[v]
                if nxt < 0:
                    outcome = 3
                    break
                v = nxt
            else:
                lo = supp_ptr[v]
                hi = supp_ptr[v + 1]
                if hi == lo:
                    outcome = 3
                    break
                v = supp_dst[_pick_p2(rng, policy, lo, hi, wbuf, wsum, drawn, epoch, v)]
            steps += 1
        steps_total += steps
        if steps > steps_max:
            steps_max = steps
        if outcome == 1:
            reached += 1
        elif first_fail < 0:
            first_fail = e
    return reached, steps_total, steps_max, first_fail


def episode_trace(
    owner,
    final_mask,
    p1_next,
    p1_act,
    supp_ptr,
    supp_act,
    supp_dst,
    policy,
    start,
    cap,
    seed,
):
    """One episode with its full vertex/action trace (pure backend only).

    Consumes the PRNG in exactly the same order as :func:`episode_batch`,
    so replaying a batch episode by seed reproduces its trajectory.
    """
    owner = _as_list(owner)
    final_mask = _as_list(final_mask)
    p1_next = _as_list(p1_next)
    p1_act = _as_list(p1_act)
    supp_ptr = _as_list(supp_ptr)
    supp_act = _as_list(supp_act)
    supp_dst = _as_list(supp_dst)
    n = len(owner)
    m = supp_ptr[n]
    wbuf = [0.0] * m
    wsum = [0.0] * n
    drawn = [0] * n
    rng = SplitMix64(seed)
    v = start
    steps = 0
    vertices = [v]
    actions = []
    while True:
        if final_mask[v]:
            outcome = 1
            break
        if steps >= cap:
            outcome = 2
            break
        if owner[v] == 0:
            nxt = p1_next[v]
            if nxt < 0:
                outcome = 3
                break
            actions.append(p1_act[v])
            v = nxt
        else:
            lo = supp_ptr[v]
            hi = supp_ptr[v + 1]
            if hi == lo:
                outcome = 3
                break
            idx = _pick_p2(rng, policy, lo, hi, wbuf, wsum, drawn, 1, v)
            actions.append(supp_act[idx])
            v = supp_dst[idx]
        vertices.append(v)
        steps += 1
    return vertices, actions, outcome, steps
