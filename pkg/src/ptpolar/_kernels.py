"""Compiled inner loops: list decoding and exhaustive codebook enumeration.

The list decoder keeps one pool of arrays per tree level and lets paths share
rows by reference count; a row is only replaced (never copied) when a path
is about to overwrite a level another path still reads. Semantics are those
of copying every path's state on every split.

Layout per path: LLRs and left-child partial sums of level d (d < n) live in
columns [2**d, 2**(d+1)) of a pool row; level n is the shared channel.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _ctz(x):
    c = 0
    while (x & 1) == 0:
        x >>= 1
        c += 1
    return c


@njit(cache=True, inline="always")
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return int((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True)
def _kth_smallest(a, m, k):
    """k-th smallest (0-based) of a[:m]; reorders a[:m] in place."""
    lo = 0
    hi = m - 1
    while lo < hi:
        pivot = a[(lo + hi) >> 1]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                t = a[i]
                a[i] = a[j]
                a[j] = t
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            return a[k]
    return a[k]


@njit(cache=True)
def scl_core(llr_ch, n, L, frozen, trows, use_t, trace):
    """Run list decoding over the pre-transformed (v) domain.

    Returns (paths, metrics, hist_parent, hist_bit, x_final, metric_trace)
    where the first ``paths`` rows/columns are valid. Pool bookkeeping is
    written out inline: helper calls taking arrays cost more than the work.
    """
    N = 1 << n
    W = trows.shape[1]
    nl = max(n, 1)
    apool = np.empty((L, N), dtype=np.float64)
    bpool = np.zeros((L, N), dtype=np.uint8)
    aptr = np.zeros((L, nl), dtype=np.int32)
    bptr = np.zeros((L, nl), dtype=np.int32)
    aref = np.zeros((nl, L), dtype=np.int32)
    bref = np.zeros((nl, L), dtype=np.int32)
    afree = np.empty((nl, L), dtype=np.int32)
    bfree = np.empty((nl, L), dtype=np.int32)
    atop = np.empty(nl, dtype=np.int32)
    btop = np.empty(nl, dtype=np.int32)
    for d in range(n):
        aref[d, 0] = 1
        bref[d, 0] = 1
        for k in range(L - 1):
            afree[d, k] = L - 1 - k
            bfree[d, k] = L - 1 - k
        atop[d] = L - 1
        btop[d] = L - 1

    metric = np.zeros(L, dtype=np.float64)
    acc = np.zeros((L, W), dtype=np.uint64)
    hist_parent = np.empty((N, L), dtype=np.int32)
    hist_bit = np.empty((N, L), dtype=np.uint8)
    xfinal = np.zeros((L, N), dtype=np.uint8)
    if trace:
        mtrace = np.zeros((N, L), dtype=np.float64)
    else:
        mtrace = np.zeros((1, 1), dtype=np.float64)
    cur = np.zeros(N, dtype=np.uint8)
    nxt = np.zeros(N, dtype=np.uint8)
    leaf = np.empty(L, dtype=np.float64)
    cand = np.empty(2 * L, dtype=np.float64)
    work = np.empty(2 * L, dtype=np.float64)
    keep = np.zeros(2 * L, dtype=np.uint8)
    new_u = np.empty(L, dtype=np.uint8)
    new_parent = np.empty(L, dtype=np.int32)
    new_metric = np.empty(L, dtype=np.float64)
    spare = np.empty(L, dtype=np.int32)
    na = 1

    for j in range(N):
        word = j >> 6
        shift = np.uint64(j & 63)
        if j == 0:
            top_level = n - 1
        else:
            top_level = 0
            x = j
            while (x & 1) == 0:
                x >>= 1
                top_level += 1

        # LLR of u_j on every path
        for s in range(na):
            d = top_level
            first = j > 0
            while d >= 0:
                half = 1 << d
                r = aptr[s, d]
                if aref[d, r] > 1:
                    aref[d, r] -= 1
                    atop[d] -= 1
                    r = afree[d, atop[d]]
                    aref[d, r] = 1
                    aptr[s, d] = r
                if d + 1 == n:
                    src = llr_ch
                    base = 0
                else:
                    src = apool[aptr[s, d + 1]]
                    base = 2 * half
                dst = apool[r]
                if first:
                    left = bpool[bptr[s, d]]
                    for k in range(half):
                        a = src[base + k]
                        b = src[base + half + k]
                        dst[half + k] = b - a if left[half + k] else b + a
                    first = False
                else:
                    for k in range(half):
                        a = src[base + k]
                        b = src[base + half + k]
                        m = min(abs(a), abs(b))
                        dst[half + k] = m if (a < 0) == (b < 0) else -m
                d -= 1
            if n > 0:
                leaf[s] = apool[aptr[s, 0], 1]
            else:
                leaf[s] = llr_ch[0]

        if frozen[j]:
            for s in range(na):
                forced = 0
                if use_t:
                    forced = np.int64((acc[s, word] >> shift) & np.uint64(1))
                lam = leaf[s]
                if (forced == 1) != (lam < 0):
                    metric[s] += abs(lam)
                new_u[s] = 0
                new_parent[s] = s
                new_metric[s] = metric[s]
        else:
            for s in range(na):
                a = 0
                if use_t:
                    a = np.int64((acc[s, word] >> shift) & np.uint64(1))
                lam = leaf[s]
                for u in range(2):
                    v = u ^ a
                    pen = abs(lam) if (v == 1) != (lam < 0) else 0.0
                    cand[2 * s + u] = metric[s] + pen
            m2 = 2 * na
            if m2 <= L:
                for c in range(m2):
                    keep[c] = 1
                for s in range(na, L):
                    spare[s - na] = s
            else:
                # keep the L smallest metrics, ties to the lower candidate index
                for c in range(m2):
                    work[c] = cand[c]
                thr = _kth_smallest(work, m2, L - 1)
                below = 0
                for c in range(m2):
                    if cand[c] < thr:
                        below += 1
                ties = L - below
                for c in range(m2):
                    if cand[c] < thr:
                        keep[c] = 1
                    elif cand[c] == thr and ties > 0:
                        keep[c] = 1
                        ties -= 1
                    else:
                        keep[c] = 0
                nspare = 0
                for s in range(na):
                    if keep[2 * s] == 0 and keep[2 * s + 1] == 0:
                        for d in range(n):
                            r = aptr[s, d]
                            aref[d, r] -= 1
                            if aref[d, r] == 0:
                                afree[d, atop[d]] = r
                                atop[d] += 1
                            r = bptr[s, d]
                            bref[d, r] -= 1
                            if bref[d, r] == 0:
                                bfree[d, btop[d]] = r
                                btop[d] += 1
                        spare[nspare] = s
                        nspare += 1
                for s in range(na, L):
                    spare[nspare] = s
                    nspare += 1
            used = 0
            for s in range(na):
                k0 = keep[2 * s]
                k1 = keep[2 * s + 1]
                if k0 and k1:
                    t = spare[used]
                    used += 1
                    for d in range(n):
                        r = aptr[s, d]
                        aptr[t, d] = r
                        aref[d, r] += 1
                        r = bptr[s, d]
                        bptr[t, d] = r
                        bref[d, r] += 1
                    for k in range(W):
                        acc[t, k] = acc[s, k]
                    new_u[s] = 0
                    new_parent[s] = s
                    new_metric[s] = cand[2 * s]
                    new_u[t] = 1
                    new_parent[t] = s
                    new_metric[t] = cand[2 * s + 1]
                elif k0 or k1:
                    u = 0 if k0 else 1
                    new_u[s] = u
                    new_parent[s] = s
                    new_metric[s] = cand[2 * s + u]
            na = min(m2, L)

        # commit decisions and propagate partial sums
        for s in range(na):
            u = new_u[s]
            metric[s] = new_metric[s]
            hist_parent[j, s] = new_parent[s]
            hist_bit[j, s] = u
            if trace:
                mtrace[j, s] = metric[s]
            a = 0
            if use_t:
                a = np.int64((acc[s, word] >> shift) & np.uint64(1))
                if u == 1:
                    for k in range(W):
                        acc[s, k] ^= trows[j, k]
            v = u ^ a
            cur[0] = v
            size = 1
            d = 0
            while d < n and (j >> d) & 1:
                left = bpool[bptr[s, d]]
                for k in range(size):
                    c = cur[k]
                    nxt[k] = left[size + k] ^ c
                    nxt[size + k] = c
                for k in range(2 * size):
                    cur[k] = nxt[k]
                size *= 2
                d += 1
            if d < n:
                r = bptr[s, d]
                if bref[d, r] > 1:
                    bref[d, r] -= 1
                    btop[d] -= 1
                    r = bfree[d, btop[d]]
                    bref[d, r] = 1
                    bptr[s, d] = r
                row = bpool[r]
                for k in range(size):
                    row[size + k] = cur[k]
            else:
                for k in range(size):
                    xfinal[s, k] = cur[k]

    return na, metric, hist_parent, hist_bit, xfinal, mtrace


@njit(cache=True)
def backtrace(hist_parent, hist_bit, paths):
    N = hist_parent.shape[0]
    u = np.empty((paths, N), dtype=np.uint8)
    for s in range(paths):
        cur = s
        for j in range(N - 1, -1, -1):
            u[s, j] = hist_bit[j, cur]
            cur = hist_parent[j, cur]
    return u


@njit(cache=True)
def backtrace_metrics(hist_parent, mtrace, paths):
    N = hist_parent.shape[0]
    out = np.empty((paths, N), dtype=np.float64)
    for s in range(paths):
        cur = s
        for j in range(N - 1, -1, -1):
            out[s, j] = mtrace[j, cur]
            cur = hist_parent[j, cur]
    return out


@njit(cache=True)
def gray_enumerate(gen, syn, check):
    """Walk every nonzero message in Gray order.

    ``gen`` holds packed codeword rows, ``syn`` the CRC syndrome contribution of
    each message bit (zero total syndrome means the CRC passes). Returns
    (d_min, n_min, n_min passing CRC).
    """
    k = gen.shape[0]
    W = gen.shape[1]
    cw = np.zeros(W, dtype=np.uint64)
    s = 0
    best = 1 << 62
    count = 0
    count_crc = 0
    for i in range(1, 1 << k):
        b = _ctz(i)
        for q in range(W):
            cw[q] ^= gen[b, q]
        s ^= syn[b]
        wt = 0
        for q in range(W):
            wt += _popcount64(cw[q])
        if wt < best:
            best = wt
            count = 0
            count_crc = 0
        if wt == best:
            count += 1
            if check and s == 0:
                count_crc += 1
    return best, count, count_crc
