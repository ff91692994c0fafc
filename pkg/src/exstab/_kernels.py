"""Compiled kernels: instance generation and pruned backtracking enumeration.

Rank arrays are int64 with 1-based ranks and 0-based participant indices.
All uint64 arithmetic wraps mod 2**64; every constant is cast to uint64 so
numba never promotes a mixed expression to float.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)

_jit = njit(cache=True, nogil=True)


@_jit
def finalize(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@_jit
def mix(value, t):
    return finalize(value + (np.uint64(t) + _ONE) * _GOLDEN)


@_jit
def _shuffle(state, order):
    k = order.shape[0]
    for i in range(k - 1, 0, -1):
        bound = np.uint64(i + 1)
        # 2**64 mod bound, computed without overflow
        threshold = (_ZERO - bound) % bound
        while True:
            state = state + _GOLDEN
            x = finalize(state)
            if x >= threshold:
                break
        j = np.int64(x % bound)
        tmp = order[i]
        order[i] = order[j]
        order[j] = tmp


@_jit
def gen_two_sided(seed, n):
    men = np.empty((n, n), dtype=np.int64)
    women = np.empty((n, n), dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    for r in range(2 * n):
        for k in range(n):
            order[k] = k
        _shuffle(mix(seed, r), order)
        if r < n:
            for p in range(n):
                men[r, order[p]] = p + 1
        else:
            for p in range(n):
                women[r - n, order[p]] = p + 1
    return men, women


@_jit
def gen_one_sided(seed, n):
    rank = np.zeros((n, n), dtype=np.int64)
    order = np.empty(n - 1, dtype=np.int64)
    for r in range(n):
        k = 0
        for j in range(n):
            if j != r:
                order[k] = j
                k += 1
        _shuffle(mix(seed, r), order)
        for p in range(n - 1):
            rank[r, order[p]] = p + 1
    return rank


@_jit
def enumerate_two_sided(mr, wr, exchange, classic, out, stop_after):
    """Count matchings (man -> woman) with no pairwise block of the chosen kinds.

    Men are assigned in index order, women tried in increasing index, so
    matchings are found in lexicographic order. The first ``out.shape[0]``
    matchings found are written to ``out``. The search stops once
    ``stop_after`` matchings are found (0 = exhaustive).
    Returns ``(count, nodes_visited)``; a node is one placed pair (i, w).
    """
    n = mr.shape[0]
    cap = out.shape[0]
    wife = np.empty(n, dtype=np.int64)
    used = np.zeros(n, dtype=np.bool_)
    nxt = np.zeros(n + 1, dtype=np.int64)
    count = 0
    nodes = 0
    i = 0
    while i >= 0:
        if i == n:
            if count < cap:
                for k in range(n):
                    out[count, k] = wife[k]
            count += 1
            if stop_after > 0 and count >= stop_after:
                break
            i -= 1
            used[wife[i]] = False
            continue
        placed = False
        w = nxt[i]
        while w < n:
            if not used[w]:
                nodes += 1
                ok = True
                for ip in range(i):
                    wp = wife[ip]
                    if exchange:
                        if mr[i, wp] < mr[i, w] and mr[ip, w] < mr[ip, wp]:
                            ok = False
                            break
                        if wr[w, ip] < wr[w, i] and wr[wp, i] < wr[wp, ip]:
                            ok = False
                            break
                    if classic:
                        if mr[i, wp] < mr[i, w] and wr[wp, i] < wr[wp, ip]:
                            ok = False
                            break
                        if mr[ip, w] < mr[ip, wp] and wr[w, ip] < wr[w, i]:
                            ok = False
                            break
                if ok:
                    wife[i] = w
                    used[w] = True
                    nxt[i] = w + 1
                    i += 1
                    nxt[i] = 0
                    placed = True
                    break
            w += 1
        if not placed:
            i -= 1
            if i >= 0:
                used[wife[i]] = False
    return count, nodes


@_jit
def _pair_ok(rk, partner, x, y, exchange, classic):
    # x is about to be matched with y; test x against every matched member c
    n = rk.shape[0]
    for c in range(n):
        pc = partner[c]
        if pc < 0 or c == x or c == y:
            continue
        if exchange and rk[x, pc] < rk[x, y] and rk[c, y] < rk[c, pc]:
            return False
        if classic and rk[x, c] < rk[x, y] and rk[c, x] < rk[c, pc]:
            return False
    return True


@_jit
def enumerate_one_sided(rk, exchange, classic, out, stop_after):
    """One-sided analogue of :func:`enumerate_two_sided`.

    The lowest unmatched member is paired with each larger unmatched member in
    turn. Rows of ``out`` hold the partner array of each matching found.
    """
    n = rk.shape[0]
    cap = out.shape[0]
    half = n // 2
    partner = np.full(n, -1, dtype=np.int64)
    low = np.empty(half + 1, dtype=np.int64)
    nxt = np.zeros(half + 1, dtype=np.int64)
    count = 0
    nodes = 0
    d = 0
    low[0] = 0
    nxt[0] = 1
    while d >= 0:
        if d == half:
            if count < cap:
                for k in range(n):
                    out[count, k] = partner[k]
            count += 1
            if stop_after > 0 and count >= stop_after:
                break
            d -= 1
            a = low[d]
            partner[partner[a]] = -1
            partner[a] = -1
            continue
        a = low[d]
        placed = False
        b = nxt[d]
        while b < n:
            if partner[b] < 0:
                nodes += 1
                if _pair_ok(rk, partner, a, b, exchange, classic) and _pair_ok(
                    rk, partner, b, a, exchange, classic
                ):
                    partner[a] = b
                    partner[b] = a
                    nxt[d] = b + 1
                    d += 1
                    if d < half:
                        na = a + 1
                        while partner[na] >= 0:
                            na += 1
                        low[d] = na
                        nxt[d] = na + 1
                    placed = True
                    break
            b += 1
        if not placed:
            d -= 1
            if d >= 0:
                a = low[d]
                partner[partner[a]] = -1
                partner[a] = -1
    return count, nodes


@_jit
def batch_two_sided(master, t0, t1, n, exchange, classic, stop_after):
    """Per-trial counts for trials ``t0 <= t < t1`` of a two-sided experiment."""
    res = np.empty(t1 - t0, dtype=np.int64)
    out = np.empty((0, n), dtype=np.int64)
    for t in range(t0, t1):
        mr, wr = gen_two_sided(mix(master, t), n)
        c, _ = enumerate_two_sided(mr, wr, exchange, classic, out, stop_after)
        res[t - t0] = c
    return res


@_jit
def batch_one_sided(master, t0, t1, n, exchange, classic, stop_after):
    res = np.empty(t1 - t0, dtype=np.int64)
    out = np.empty((0, n), dtype=np.int64)
    for t in range(t0, t1):
        rk = gen_one_sided(mix(master, t), n)
        c, _ = enumerate_one_sided(rk, exchange, classic, out, stop_after)
        res[t - t0] = c
    return res
