# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled worklist and simulation kernels.

Mirrors ``pure.py`` operation for operation; see that module for the
semantics.  Any behavioural change must be made in both backends."""

import numpy as np

ctypedef unsigned long long u64

cdef u64 _GOLDEN = 0x9E3779B97F4A7C15ULL
cdef u64 _MIX1 = 0xBF58476D1CE4E5B9ULL
cdef u64 _MIX2 = 0x94D049BB133111EBULL
cdef double _INV53 = 1.0 / 9007199254740992.0


cdef inline u64 _next_u64(u64 *state) nogil:
    cdef u64 z
    state[0] = state[0] + _GOLDEN
    z = state[0]
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline double _next_double(u64 *state) nogil:
    return <double>(_next_u64(state) >> 11) * _INV53


def prng_doubles(seed, int n):
    cdef u64 state = <u64>seed
    out = np.empty(n, dtype=np.float64)
    cdef double[:] view = out
    cdef int i
    for i in range(n):
        view[i] = _next_double(&state)
    return out


def attractor(signed char[:] owner, int[:] out_deg, int[:] pred_ptr,
              int[:] pred_src, unsigned char[:] final_mask):
    cdef int n = owner.shape[0]
    level_arr = np.full(n, -1, dtype=np.int32)
    remaining_arr = np.empty(n, dtype=np.int32)
    queue_arr = np.empty(n, dtype=np.int32)
    cdef int[:] level = level_arr
    cdef int[:] remaining = remaining_arr
    cdef int[:] queue = queue_arr
    cdef int head = 0, tail = 0
    cdef int s, w, u, k, next_level
    for s in range(n):
        remaining[s] = out_deg[s]
    for s in range(n):
        if final_mask[s]:
            level[s] = 0
            queue[tail] = s
            tail += 1
    for s in range(n):
        if not final_mask[s] and owner[s] == 1 and out_deg[s] == 0:
            level[s] = 1
            queue[tail] = s
            tail += 1
    while head < tail:
        w = queue[head]
        head += 1
        next_level = level[w] + 1
        for k in range(pred_ptr[w], pred_ptr[w + 1]):
            u = pred_src[k]
            if level[u] >= 0:
                continue
            if owner[u] == 0:
                level[u] = next_level
                queue[tail] = u
                tail += 1
            else:
                remaining[u] -= 1
                if remaining[u] == 0:
                    level[u] = next_level
                    queue[tail] = u
                    tail += 1
    return level_arr


def safe_fixpoint(signed char[:] owner, unsigned char[:] in_u,
                  unsigned char[:] final_mask, int[:] succ_ptr, int[:] succ_dst,
                  int[:] pred_ptr, int[:] pred_src, int p1_exists, int keep_finals):
    cdef int n = owner.shape[0]
    cdef int m = succ_ptr[n]
    member_arr = np.zeros(n, dtype=np.uint8)
    round_arr = np.zeros(n, dtype=np.int32)
    cnt_arr = np.zeros(n, dtype=np.int32)
    frontier_arr = np.empty(n, dtype=np.int32)
    nxt_arr = np.empty(n, dtype=np.int32)
    touched_arr = np.empty(m if m > 0 else 1, dtype=np.int32)
    pending_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[:] y = member_arr
    cdef int[:] removal_round = round_arr
    cdef int[:] cnt = cnt_arr
    cdef int[:] frontier = frontier_arr
    cdef int[:] nxt = nxt_arr
    cdef int[:] touched = touched_arr
    cdef unsigned char[:] pending = pending_arr
    cdef int v, k, u, i, c
    cdef int n_frontier = 0, n_next, n_touched, rounds = 0

    for v in range(n):
        y[v] = 1 if in_u[v] else 0
    for v in range(n):
        if not y[v]:
            continue
        c = 0
        for k in range(succ_ptr[v], succ_ptr[v + 1]):
            if y[succ_dst[k]]:
                c += 1
        cnt[v] = c

    for v in range(n):
        if y[v] and not _holds(owner, final_mask, succ_ptr, cnt, p1_exists,
                               keep_finals, v):
            frontier[n_frontier] = v
            n_frontier += 1

    while n_frontier > 0:
        rounds += 1
        for i in range(n_frontier):
            v = frontier[i]
            y[v] = 0
            removal_round[v] = rounds
        n_touched = 0
        for i in range(n_frontier):
            v = frontier[i]
            for k in range(pred_ptr[v], pred_ptr[v + 1]):
                u = pred_src[k]
                if y[u]:
                    cnt[u] -= 1
                    touched[n_touched] = u
                    n_touched += 1
        n_next = 0
        for i in range(n_touched):
            u = touched[i]
            if y[u] and not pending[u] and not _holds(owner, final_mask, succ_ptr,
                                                      cnt, p1_exists, keep_finals, u):
                pending[u] = 1
                nxt[n_next] = u
                n_next += 1
        for i in range(n_next):
            frontier[i] = nxt[i]
            pending[nxt[i]] = 0
        n_frontier = n_next

    cdef int iterations = rounds + 1
    if iterations < 2:
        iterations = 2
    return member_arr, round_arr, iterations


def safe_reach_fixpoint(signed char[:] owner, unsigned char[:] in_u,
                        unsigned char[:] target_mask, int[:] succ_ptr,
                        int[:] succ_dst, int[:] pred_ptr, int[:] pred_src):
    cdef int n = owner.shape[0]
    member_arr = np.zeros(n, dtype=np.uint8)
    cnt_arr = np.zeros(n, dtype=np.int32)
    deg_arr = np.zeros(n, dtype=np.int32)
    reach_arr = np.zeros(n, dtype=np.uint8)
    stack_arr = np.empty(n, dtype=np.int32)
    dropped_arr = np.empty(n, dtype=np.int32)
    cdef unsigned char[:] y = member_arr
    cdef int[:] cnt = cnt_arr
    cdef int[:] deg = deg_arr
    cdef unsigned char[:] reach = reach_arr
    cdef int[:] stack = stack_arr
    cdef int[:] dropped = dropped_arr
    cdef int v, k, u, w, c, i
    cdef int n_stack, n_dropped
    cdef int passes_with_change = 0
    cdef int iterations

    for v in range(n):
        y[v] = 1 if in_u[v] else 0
        deg[v] = succ_ptr[v + 1] - succ_ptr[v]
    for v in range(n):
        if not y[v]:
            continue
        c = 0
        for k in range(succ_ptr[v], succ_ptr[v + 1]):
            if y[succ_dst[k]]:
                c += 1
        cnt[v] = c

    while True:
        n_stack = 0
        for v in range(n):
            reach[v] = 0
        for v in range(n):
            if y[v] and target_mask[v]:
                reach[v] = 1
                stack[n_stack] = v
                n_stack += 1
        while n_stack > 0:
            n_stack -= 1
            w = stack[n_stack]
            for k in range(pred_ptr[w], pred_ptr[w + 1]):
                u = pred_src[k]
                if not y[u] or reach[u]:
                    continue
                if owner[u] == 0 or cnt[u] == deg[u]:
                    reach[u] = 1
                    stack[n_stack] = u
                    n_stack += 1
        n_dropped = 0
        for v in range(n):
            if y[v] and not reach[v]:
                dropped[n_dropped] = v
                n_dropped += 1
        if n_dropped == 0:
            break
        passes_with_change += 1
        for i in range(n_dropped):
            y[dropped[i]] = 0
        for i in range(n_dropped):
            v = dropped[i]
            for k in range(pred_ptr[v], pred_ptr[v + 1]):
                u = pred_src[k]
                if y[u]:
                    cnt[u] -= 1
    iterations = passes_with_change + 1
    if iterations < 2:
        iterations = 2
    return member_arr, iterations


cdef inline bint _holds(signed char[:] owner, unsigned char[:] final_mask,
                        int[:] succ_ptr, int[:] cnt, int p1_exists,
                        int keep_finals, int v) nogil:
    if keep_finals and final_mask[v]:
        return True
    if owner[v] == 0 and p1_exists:
        return cnt[v] > 0
    return cnt[v] == succ_ptr[v + 1] - succ_ptr[v]


cdef inline int _pick_p2(u64 *state, int policy, int lo, int hi, double *wbuf,
                         double *wsum, int *drawn, int epoch, int v) nogil:
    cdef int k = hi - lo
    cdef int i, j
    cdef double w, total, r
    if policy == 0:
        return lo + <int>(_next_u64(state) % <u64>k)
    if drawn[v] != epoch:
        total = 0.0
        for i in range(lo, hi):
            w = 0.5 + _next_double(state)
            wbuf[i] = w
            total += w
        wsum[v] = total
        drawn[v] = epoch
    r = _next_double(state) * wsum[v]
    j = lo
    while j < hi - 1:
        r -= wbuf[j]
        if r < 0.0:
            break
        j += 1
    return j


def episode_batch(signed char[:] owner, unsigned char[:] final_mask,
                  int[:] p1_next, int[:] supp_ptr, int[:] supp_dst,
                  int policy, int start, int n_episodes, int cap, seed0):
    cdef int n = owner.shape[0]
    cdef int m = supp_ptr[n]
    wbuf_arr = np.zeros(m if m > 0 else 1, dtype=np.float64)
    wsum_arr = np.zeros(n, dtype=np.float64)
    drawn_arr = np.zeros(n, dtype=np.int32)
    cdef double[:] wbuf = wbuf_arr
    cdef double[:] wsum = wsum_arr
    cdef int[:] drawn = drawn_arr
    cdef u64 base = <u64>seed0
    cdef u64 state
    cdef int reached = 0, first_fail = -1
    cdef long long steps_total = 0
    cdef int steps_max = 0
    cdef int e, v, steps, outcome, nxt, lo, hi, epoch
    for e in range(n_episodes):
        state = base + <u64>e
        epoch = e + 1
        v = start
        steps = 0
        outcome = 0
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
                v = supp_dst[_pick_p2(&state, policy, lo, hi, &wbuf[0], &wsum[0],
                                      &drawn[0], epoch, v)]
            steps += 1
        steps_total += steps
        if steps > steps_max:
            steps_max = steps
        if outcome == 1:
            reached += 1
        elif first_fail < 0:
            first_fail = e
    return reached, int(steps_total), steps_max, first_fail
