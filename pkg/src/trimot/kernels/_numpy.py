"""Pure-numpy twins of the compiled kernels (same signatures, same ties)."""

import numpy as np


SERIES_CUTOFF = 1e-3


def _series(a, q):
    # 2 * sum_k binom(q, 2k) a^(2k), k = 1..3; truncation error ~ a^8
    c2 = q * (q - 1.0) / 2.0
    c4 = c2 * (q - 2.0) * (q - 3.0) / 12.0
    c6 = c4 * (q - 4.0) * (q - 5.0) / 30.0
    a2 = a * a
    return 2.0 * a2 * (c2 + a2 * (c4 + a2 * c6))


def fp_array(y, p):
    """``(1+|y|)^q + sgn(1-|y|)|1-|y||^q - 2`` with ``q = p+1``. Inside the unit
    interval the ``-1`` terms are folded into ``expm1``, and an even power
    series takes over near zero, to limit cancellation."""
    a = np.abs(np.asarray(y, dtype=float))
    q = p + 1.0
    inner = np.minimum(a, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        near = np.expm1(q * np.log1p(inner)) + np.expm1(q * np.log1p(-inner))
        far = (1.0 + a) ** q - np.abs(a - 1.0) ** q - 2.0
    near = np.where(a < SERIES_CUTOFF, _series(a, q), near)
    return np.where(a <= 1.0, near, far)


def fp_scalar(y, p):
    return float(fp_array(y, p))


def _stage_costs(h, mid, half, q):
    """``half^q f_p((h-mid)/half) / q``, evaluated unscaled beyond one
    half-spacing so that tiny spacings cannot overflow."""
    d = np.abs(h - mid)
    with np.errstate(divide="ignore", invalid="ignore"):
        near = half ** q * fp_array(d / half, q - 1.0)
    far = (half + d) ** q - np.abs(d - half) ** q - 2.0 * half ** q
    return np.where(d <= half, near, far) / q


def chain_dp(grid, counts, mid, half, p, delta, slack):
    S, W = grid.shape
    q = p + 1.0
    valid = np.arange(W)[None, :] < np.asarray(counts)[:, None]
    G = np.where(valid, grid, np.nan)
    with np.errstate(invalid="ignore"):
        costs = _stage_costs(G, mid[:, None], half[:, None], q)
    costs = np.where(valid, costs, np.inf)
    arg = np.full((S, W), -1, np.int64)
    rows = np.arange(W)
    v = costs[0]
    for s in range(1, S):
        prev = G[s - 1][None, :]
        cur = G[s][:, None]
        with np.errstate(invalid="ignore"):
            ok = (prev <= cur + slack) & (prev >= cur - delta - slack)
        cand = np.where(ok, v[None, :], np.inf)
        a = np.argmin(cand, axis=1)
        best = cand[rows, a]
        arg[s] = np.where(np.isfinite(best), a, -1)
        v = best + costs[s]
    path = np.full(S, np.nan)
    if not np.isfinite(v).any():
        return np.inf, path
    idx = int(np.argmin(v))
    value = float(v[idx])
    for s in range(S - 1, -1, -1):
        path[s] = grid[s, idx]
        idx = arg[s, idx]
    return value, path


def _cost_row(C, X, Y, p, use_matrix, i):
    if use_matrix:
        return C[i]
    sq = ((Y - X[i]) ** 2).sum(axis=1)
    if p == 2.0:
        return sq
    if p == 1.0:
        return np.sqrt(sq)
    return sq ** (0.5 * p)


def _pair_cost(C, X, Y, p, use_matrix, i, j):
    if use_matrix:
        return C[i, j]
    sq = float(((X[i] - Y[j]) ** 2).sum())
    if p == 2.0:
        return sq
    if p == 1.0:
        return np.sqrt(sq)
    return sq ** (0.5 * p)


def _col_costs(C, X, Y, p, use_matrix, rows, j):
    if use_matrix:
        return C[rows, j]
    sq = ((X[rows] - Y[j]) ** 2).sum(axis=1)
    if p == 2.0:
        return sq
    if p == 1.0:
        return np.sqrt(sq)
    return sq ** (0.5 * p)


def _refresh_free_min(C, X, Y, p, use_matrix, free_mask, cols, best_free, arg_free):
    rows = np.flatnonzero(free_mask)
    for j in cols:
        c = _col_costs(C, X, Y, p, use_matrix, rows, j)
        if rows.size == 0:
            best_free[j] = np.inf
            arg_free[j] = -1
            continue
        a = int(np.argmin(c))
        best_free[j] = c[a]
        arg_free[j] = rows[a]


def ssp_matching(C, X, Y, p, use_matrix, m_target):
    n = X.shape[0]
    pot_x = np.zeros(n)
    pot_y = np.zeros(n)
    pot_t = 0.0
    match_x = np.full(n, -1, np.int64)
    match_y = np.full(n, -1, np.int64)
    pred_x = np.full(n, -1, np.int64)
    free_mask = np.ones(n, bool)
    best_free = np.empty(n)
    arg_free = np.empty(n, np.int64)
    _refresh_free_min(C, X, Y, p, use_matrix, free_mask, range(n), best_free, arg_free)
    settled = 0
    for _ in range(m_target):
        dist_y = best_free - pot_y
        pred_y = arg_free.copy()
        done_y = np.zeros(n, bool)
        dist_x = np.where(free_mask, 0.0, np.inf)
        pred_x[:] = -1
        dist_t = np.inf
        tail = -1
        while True:
            open_y = np.where(done_y, np.inf, dist_y)
            sel = int(np.argmin(open_y))
            best = open_y[sel]
            if not (best <= dist_t) or not np.isfinite(best):
                if dist_t == np.inf:
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
                continue
            dk = dist_y[j] + pot_y[j] - _pair_cost(C, X, Y, p, use_matrix, k, j) - pot_x[k]
            dk = max(dk, dist_y[j])
            dist_x[k] = dk
            pred_x[k] = j
            nd = dk + pot_x[k] + _cost_row(C, X, Y, p, use_matrix, k) - pot_y
            mask = ~done_y & (nd < dist_y)
            dist_y[mask] = nd[mask]
            pred_y[mask] = k
        D = dist_t
        matched = ~free_mask
        pot_x[matched] += np.minimum(dist_x[matched], D)
        pot_y += np.minimum(dist_y, D)
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
        free_mask[i] = False
        _refresh_free_min(C, X, Y, p, use_matrix, free_mask,
                          np.flatnonzero(arg_free == i), best_free, arg_free)
    return match_x, match_y, pot_x, pot_y, settled, True
