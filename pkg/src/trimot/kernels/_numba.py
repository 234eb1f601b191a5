"""Compiled loop kernels. Each has a numpy twin in ``_numpy.py`` with the
same signature and the same tie-breaking, so results agree bit for bit up
to floating-point summation order."""

import math

import numpy as np

from .._accel import njit

INF = np.inf


SERIES_CUTOFF = 1e-3


@njit
def fp_scalar(y, p):
    a = abs(y)
    q = p + 1.0
    if a < SERIES_CUTOFF:
        c2 = q * (q - 1.0) / 2.0
        c4 = c2 * (q - 2.0) * (q - 3.0) / 12.0
        c6 = c4 * (q - 4.0) * (q - 5.0) / 30.0
        a2 = a * a
        return 2.0 * a2 * (c2 + a2 * (c4 + a2 * c6))
    if a <= 1.0:
        lower = math.expm1(q * math.log1p(-a)) if a < 1.0 else -1.0
        return math.expm1(q * math.log1p(a)) + lower
    return (1.0 + a) ** q - (a - 1.0) ** q - 2.0


@njit
def _stage_cost(h, mid, half, q):
    d = abs(h - mid)
    if d <= half:
        return half ** q * fp_scalar(d / half, q - 1.0) / q
    return ((half + d) ** q - (d - half) ** q - 2.0 * half ** q) / q


@njit
def chain_dp(grid, counts, mid, half, p, delta, slack):
    """Minimise sum_s cost_s(h_s) over per-stage grids subject to
    ``h_{s-1} <= h_s <= h_{s-1} + delta``.

    ``grid[s, :counts[s]]`` must be sorted ascending. Returns ``(value, path)``;
    ``value`` is ``inf`` and ``path`` is NaN when no chain is feasible.
    """
    S, W = grid.shape
    q = p + 1.0
    v_prev = np.full(W, INF)
    v_cur = np.full(W, INF)
    arg = np.full((S, W), -1, np.int64)
    dq = np.empty(W, np.int64)
    for t in range(counts[0]):
        v_prev[t] = _stage_cost(grid[0, t], mid[0], half[0], q)
    for s in range(1, S):
        cp = counts[s - 1]
        head = 0
        tail = 0
        nxt = 0
        for t in range(counts[s]):
            h = grid[s, t]
            while nxt < cp and grid[s - 1, nxt] <= h + slack:
                v = v_prev[nxt]
                while tail > head and v_prev[dq[tail - 1]] > v:
                    tail -= 1
                dq[tail] = nxt
                tail += 1
                nxt += 1
            lo = h - delta - slack
            while head < tail and grid[s - 1, dq[head]] < lo:
                head += 1
            if head < tail and v_prev[dq[head]] < INF:
                v_cur[t] = v_prev[dq[head]] + _stage_cost(h, mid[s], half[s], q)
                arg[s, t] = dq[head]
            else:
                v_cur[t] = INF
        for t in range(W):
            v_prev[t] = v_cur[t] if t < counts[s] else INF
    best = INF
    bi = -1
    for t in range(counts[S - 1]):
        if v_prev[t] < best:
            best = v_prev[t]
            bi = t
    path = np.full(S, np.nan)
    if bi < 0:
        return INF, path
    idx = bi
    for s in range(S - 1, -1, -1):
        path[s] = grid[s, idx]
        idx = arg[s, idx]
    return best, path


@njit
def _pair_cost(C, X, Y, p, use_matrix, i, j):
    if use_matrix:
        return C[i, j]
    acc = 0.0
    for k in range(X.shape[1]):
        diff = X[i, k] - Y[j, k]
        acc += diff * diff
    if p == 2.0:
        return acc
    if p == 1.0:
        return math.sqrt(acc)
    return acc ** (0.5 * p)


@njit
def _refresh_free_min(C, X, Y, p, use_matrix, free, n_free, j, best_free, arg_free):
    best = INF
    arg = -1
    for f in range(n_free):
        i = free[f]
        c = _pair_cost(C, X, Y, p, use_matrix, i, j)
        if c < best or (c == best and i < arg):
            best = c
            arg = i
    best_free[j] = best
    arg_free[j] = arg


@njit
def ssp_matching(C, X, Y, p, use_matrix, m_target):
    """Successive shortest augmenting paths on the bipartite flow network
    source -> x_i -> y_j -> sink, unit capacities, ``m_target`` units of flow.

    Dijkstra on reduced costs with node potentials. Free x nodes always carry
    potential 0, so the source fan-out is folded into a cached cheapest free x
    per y. A matched x is settled together with its y (the matched arc has
    zero reduced cost). Ties go to the lowest index.
    Returns ``(match_x, match_y, pot_x, pot_y, settled, ok)``.
    """
    n = X.shape[0]
    pot_x = np.zeros(n)
    pot_y = np.zeros(n)
    pot_t = 0.0
    match_x = np.full(n, -1, np.int64)
    match_y = np.full(n, -1, np.int64)
    dist_x = np.empty(n)
    dist_y = np.empty(n)
    done_x = np.zeros(n, np.bool_)
    done_y = np.zeros(n, np.bool_)
    pred_x = np.empty(n, np.int64)
    pred_y = np.empty(n, np.int64)
    free = np.arange(n)
    pos = np.arange(n)
    n_free = n
    best_free = np.empty(n)
    arg_free = np.empty(n, np.int64)
    for j in range(n):
        _refresh_free_min(C, X, Y, p, use_matrix, free, n_free, j, best_free, arg_free)
    settled = 0
    for _ in range(m_target):
        best = INF
        sel = -1
        for j in range(n):
            done_y[j] = False
            dist_y[j] = best_free[j] - pot_y[j]
            pred_y[j] = arg_free[j]
            if dist_y[j] < best:
                best = dist_y[j]
                sel = j
        for i in range(n):
            done_x[i] = match_x[i] < 0
            dist_x[i] = 0.0 if done_x[i] else INF
            pred_x[i] = -1
        dist_t = INF
        tail = -1
        while True:
            if sel < 0 or not (best <= dist_t):
                if dist_t == INF:
                    return match_x, match_y, pot_x, pot_y, settled, False
                break
            j = sel
            done_y[j] = True
            settled += 1
            k = match_y[j]
            if k < 0:
                nd = dist_y[j] + pot_y[j] - pot_t
                if nd < dist_t:
                    dist_t = nd
                    tail = j
                best = INF
                sel = -1
                for jj in range(n):
                    if not done_y[jj] and dist_y[jj] < best:
                        best = dist_y[jj]
                        sel = jj
                continue
            dk = dist_y[j] + pot_y[j] - _pair_cost(C, X, Y, p, use_matrix, k, j) - pot_x[k]
            if dk < dist_y[j]:
                dk = dist_y[j]
            dist_x[k] = dk
            pred_x[k] = j
            done_x[k] = True
            base = dk + pot_x[k]
            best = INF
            sel = -1
            for jj in range(n):
                if done_y[jj]:
                    continue
                if jj != j:
                    nd = base + _pair_cost(C, X, Y, p, use_matrix, k, jj) - pot_y[jj]
                    if nd < dist_y[jj]:
                        dist_y[jj] = nd
                        pred_y[jj] = k
                if dist_y[jj] < best:
                    best = dist_y[jj]
                    sel = jj
        D = dist_t
        for i in range(n):
            if match_x[i] >= 0:
                pot_x[i] += min(dist_x[i], D)
        for j in range(n):
            pot_y[j] += min(dist_y[j], D)
        pot_t += D
        j = tail
        while True:
            i = pred_y[j]
            prev = pred_x[i]
            match_x[i] = j
            match_y[j] = i
            if prev < 0:
                break
            j = prev
        # i left the free set: swap-remove, then repair cached minima that used it
        f = pos[i]
        last = free[n_free - 1]
        free[f] = last
        pos[last] = f
        n_free -= 1
        for jj in range(n):
            if arg_free[jj] == i:
                _refresh_free_min(C, X, Y, p, use_matrix, free, n_free, jj, best_free, arg_free)
    return match_x, match_y, pot_x, pot_y, settled, True
