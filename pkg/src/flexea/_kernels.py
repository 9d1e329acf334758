"""Compiled run loops for the built-in benchmarks.

The loops draw from a numpy ``Generator`` in exactly the order used by the
Python reference implementations (init: ``n`` doubles; rate choice: one
double; ``r``-bit flip: ``r`` doubles; standard bit mutation: ``n``
doubles), so a kernel run and a reference run with the same seed produce the
same trajectory.  Fitness dispatch codes match ``flexea.benchmarks``.
"""
import numpy as np
from numba import njit

CODE_LEVEL_TABLE = 0
CODE_LEADING_ONES = 1
CODE_MST = 2


@njit(cache=True)
def _evaluate(code, x, ones, table, ints, edges):
    if code == CODE_LEVEL_TABLE:
        return table[ones]
    if code == CODE_LEADING_ONES:
        i = 0
        n = x.size
        while i < n and x[i] == 1:
            i += 1
        return float(i)
    # MST, maximization form: minus the penalized cost
    n_v = ints[0]
    M = ints[1]
    parent = np.arange(n_v)
    comps = n_v
    weight = 0
    for i in range(edges.shape[0]):
        if x[i] == 1:
            weight += edges[i, 2]
            a = edges[i, 0]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = edges[i, 1]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a != b:
                parent[b] = a
                comps -= 1
    cost = M * M * (comps - 1) + M * (ones - (n_v - 1)) + weight
    return -float(cost)


@njit(cache=True)
def _init(gen, x):
    ones = 0
    for i in range(x.size):
        if gen.random() < 0.5:
            x[i] = 1
            ones += 1
        else:
            x[i] = 0
    return ones


@njit(cache=True)
def _flip_exact(gen, x, r, perm, pos):
    """Flip ``r`` distinct bits chosen by partial Fisher-Yates; returns the ones delta."""
    n = x.size
    for j in range(r):
        k = j + int(gen.random() * (n - j))
        tmp = perm[j]
        perm[j] = perm[k]
        perm[k] = tmp
        pos[j] = k
    delta = 0
    for j in range(r):
        p = perm[j]
        if x[p] == 1:
            x[p] = 0
            delta -= 1
        else:
            x[p] = 1
            delta += 1
    # undo swaps in reverse so perm is the identity again, keep chosen positions
    for j in range(r - 1, -1, -1):
        k = pos[j]
        chosen = perm[j]
        perm[j] = perm[k]
        perm[k] = chosen
        pos[j] = chosen
    return delta


@njit(cache=True)
def _flip_standard(gen, x, prob, pos):
    """Standard bit mutation; returns (number of flips, ones delta)."""
    cnt = 0
    delta = 0
    for i in range(x.size):
        if gen.random() < prob:
            pos[cnt] = i
            cnt += 1
            if x[i] == 1:
                x[i] = 0
                delta -= 1
            else:
                x[i] = 1
                delta += 1
    return cnt, delta


@njit(cache=True)
def _undo(x, pos, cnt):
    for j in range(cnt):
        x[pos[j]] = 1 - x[pos[j]]


@njit(cache=True)
def _search_right(cdf, target):
    lo = 0
    hi = cdf.size
    while lo < hi:
        mid = (lo + hi) // 2
        if cdf[mid] > target:
            hi = mid
        else:
            lo = mid + 1
    if lo >= cdf.size:
        lo = cdf.size - 1
    return lo


@njit(cache=True)
def _insert(order, size, lam, idx):
    # ordered by descending lower bound, then ascending index
    pos = 0
    while pos < size and (lam[order[pos]] > lam[idx] or (lam[order[pos]] == lam[idx] and order[pos] < idx)):
        pos += 1
    for j in range(size, pos, -1):
        order[j] = order[j - 1]
    order[pos] = idx
    return size + 1


@njit(cache=True)
def _remove(order, size, idx):
    pos = 0
    while order[pos] != idx:
        pos += 1
    for j in range(pos, size - 1):
        order[j] = order[j + 1]
    return size - 1


@njit(cache=True)
def _fill(active, order, size, lam, p, cdf):
    n = lam.size
    mass = 1.0
    for i in range(n):
        p[i] = lam[i]
        if not active[i]:
            mass -= lam[i]
    for j in range(size):
        share = mass / (size - j)
        idx = order[j]
        if lam[idx] <= share:
            for q in range(j, size):
                p[order[q]] = share
            break
        p[idx] = lam[idx]
        mass -= lam[idx]
    acc = 0.0
    for i in range(n):
        acc += p[i]
        cdf[i] = acc


@njit(cache=True)
def flexea_run(gen, x, lam, T, code, table, ints, edges, target, budget, stop_at_optimum):
    """Returns (evaluations, hit, final score, archive size, resets)."""
    n = x.size
    ones = _init(gen, x)
    score = _evaluate(code, x, ones, table, ints, edges)
    evals = 1
    hit = score == target
    active = np.zeros(n, dtype=np.bool_)
    order = np.zeros(n, dtype=np.int64)
    counters = np.zeros(n, dtype=np.int64)
    perm = np.arange(n)
    pos = np.zeros(n, dtype=np.int64)
    p = np.empty(n)
    cdf = np.empty(n)
    active[0] = True
    order[0] = 0
    size = 1
    u = 0
    resets = 0
    dirty = True
    bound = 0.0
    while not (hit and stop_at_optimum) and (budget < 0 or evals < budget):
        if dirty:
            _fill(active, order, size, lam, p, cdf)
            m = 0
            while not active[m]:
                m += 1
            bound = T[m] / p[m] if p[m] > 0.0 else np.inf
            dirty = False
        idx = _search_right(cdf, gen.random() * cdf[n - 1])
        r = idx + 1
        delta = _flip_exact(gen, x, r, perm, pos)
        fy = _evaluate(code, x, ones + delta, table, ints, edges)
        evals += 1
        if fy > score:
            score = fy
            ones += delta
            if not active[idx]:
                active[idx] = True
                size = _insert(order, size, lam, idx)
                dirty = True
            u = 0
            counters[idx] = 0
        else:
            if fy == score:
                ones += delta
            else:
                _undo(x, pos, r)
            u += 1
            counters[idx] += 1
            if u >= bound:
                u = 0
                resets += 1
                if size != 1 or not active[0]:
                    for q in range(size):
                        active[order[q]] = False
                    active[0] = True
                    order[0] = 0
                    size = 1
                    dirty = True
                counters[0] = 0
            elif counters[idx] >= T[idx]:
                if active[idx]:
                    active[idx] = False
                    size = _remove(order, size, idx)
                    dirty = True
                if size == 0:
                    nxt = idx + 1 if idx + 1 < n else 0
                    active[nxt] = True
                    order[0] = nxt
                    size = 1
                    counters[nxt] = 0
        if fy == target:
            hit = True
    return evals, hit, score, size, resets


@njit(cache=True)
def sd_rls_run(gen, x, T, accept_equal, code, table, ints, edges, target, budget, stop_at_optimum):
    n = x.size
    ones = _init(gen, x)
    score = _evaluate(code, x, ones, table, ints, edges)
    evals = 1
    hit = score == target
    perm = np.arange(n)
    pos = np.zeros(n, dtype=np.int64)
    max_rate = (n + 1) // 2
    rate = 1
    counter = 0
    while not (hit and stop_at_optimum) and (budget < 0 or evals < budget):
        delta = _flip_exact(gen, x, rate, perm, pos)
        fy = _evaluate(code, x, ones + delta, table, ints, edges)
        evals += 1
        if fy > score:
            score = fy
            ones += delta
            rate = 1
            counter = 0
        else:
            if fy == score and accept_equal:
                ones += delta
            else:
                _undo(x, pos, rate)
            counter += 1
            if counter >= T[rate - 1]:
                rate = rate + 1 if rate < max_rate else 1
                counter = 0
        if fy == target:
            hit = True
    return evals, hit, score


@njit(cache=True)
def rls12_run(gen, x, accept_equal, code, table, ints, edges, target, budget, stop_at_optimum):
    n = x.size
    ones = _init(gen, x)
    score = _evaluate(code, x, ones, table, ints, edges)
    evals = 1
    hit = score == target
    perm = np.arange(n)
    pos = np.zeros(n, dtype=np.int64)
    while not (hit and stop_at_optimum) and (budget < 0 or evals < budget):
        r = 1 if gen.random() < 0.5 else 2
        delta = _flip_exact(gen, x, r, perm, pos)
        fy = _evaluate(code, x, ones + delta, table, ints, edges)
        evals += 1
        if fy > score or (fy == score and accept_equal):
            score = fy
            ones += delta
        else:
            _undo(x, pos, r)
        if fy == target:
            hit = True
    return evals, hit, score


@njit(cache=True)
def sbm_run(gen, x, cdf, heavy, accept_equal, code, table, ints, edges, target, budget,
            stop_at_optimum):
    """Standard-bit-mutation EA; ``heavy=False`` fixes the rate at 1 (classic (1+1) EA)."""
    n = x.size
    ones = _init(gen, x)
    score = _evaluate(code, x, ones, table, ints, edges)
    evals = 1
    hit = score == target
    pos = np.zeros(n, dtype=np.int64)
    while not (hit and stop_at_optimum) and (budget < 0 or evals < budget):
        r = 1
        if heavy:
            r = _search_right(cdf, gen.random() * cdf[cdf.size - 1]) + 1
        cnt, delta = _flip_standard(gen, x, r / n, pos)
        fy = _evaluate(code, x, ones + delta, table, ints, edges)
        evals += 1
        if fy > score or (fy == score and accept_equal):
            score = fy
            ones += delta
        else:
            _undo(x, pos, cnt)
        if fy == target:
            hit = True
    return evals, hit, score
