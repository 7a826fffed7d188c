"""numba-compiled kernels; signatures mirror ``_numpy``."""
import numpy as np
from numba import njit


@njit(cache=True)
def bfs_row(indptr, indices, src):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if dist[v] < 0:
                dist[v] = du
                queue[tail] = v
                tail += 1
    return dist


@njit(cache=True)
def all_pairs(indptr, indices):
    n = indptr.shape[0] - 1
    out = np.empty((n, n), dtype=np.int32)
    for s in range(n):
        out[s, :] = bfs_row(indptr, indices, s)
    return out


@njit(cache=True)
def four_point(D):
    n = D.shape[0]
    best = -1  # so a quadruple is recorded even when every gap is 0
    wa, wb, wc, wd = -1, -1, -1, -1
    for a in range(n):
        for b in range(a + 1, n):
            dab = D[a, b]
            for c in range(b + 1, n):
                dac = D[a, c]
                dbc = D[b, c]
                for d in range(c + 1, n):
                    s1 = dab + D[c, d]
                    s2 = dac + D[b, d]
                    s3 = D[a, d] + dbc
                    if s1 >= s2 and s1 >= s3:
                        gap = s1 - max(s2, s3)
                        if gap > best:
                            best = gap
                            wa, wb, wc, wd = a, c, b, d
                    elif s2 >= s3:
                        gap = s2 - max(s1, s3)
                        if gap > best:
                            best = gap
                            wa, wb, wc, wd = a, b, c, d
                    else:
                        gap = s3 - max(s1, s2)
                        if gap > best:
                            best = gap
                            wa, wb, wc, wd = a, b, d, c
    return max(best, 0), np.array([wa, wb, wc, wd], dtype=np.int64)


@njit(cache=True)
def nesting_scan(D, delta, eta1, eta2, tight):
    n = D.shape[0]
    tol = 1e-9
    holds = 0
    vacuous = 0
    violated = 0
    witness = np.full(4, -1, dtype=np.int64)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                dbc = D[b, c]
                e1 = eta1
                if tight:
                    e1 = D[a, b] + dbc - D[a, c]
                if D[a, b] + dbc > D[a, c] + e1 + tol:
                    vacuous += n
                    continue
                for d in range(n):
                    e2 = eta2
                    if tight:
                        e2 = dbc + D[c, d] - D[b, d]
                    if dbc + D[c, d] > D[b, d] + e2 + tol or not (dbc > (e1 + e2 + delta) / 2.0):
                        vacuous += 1
                        continue
                    ok1 = D[a, b] + D[b, d] <= D[a, d] + e1 + delta + tol
                    ok2 = D[a, c] + D[c, d] <= D[a, d] + e2 + delta + tol
                    if ok1 and ok2:
                        holds += 1
                    else:
                        if violated == 0:
                            witness[0] = a
                            witness[1] = b
                            witness[2] = c
                            witness[3] = d
                        violated += 1
    return holds, vacuous, violated, witness


@njit(cache=True)
def minplus_closure(W):
    n = W.shape[0]
    out = W.copy()
    # stale row maxima stay valid upper bounds, so rows that cannot improve are skipped
    rowmax = np.empty(n)
    for i in range(n):
        rowmax[i] = out[i].max()
    for k in range(n):
        kmin = np.inf
        for j in range(n):
            if j != k and out[k, j] < kmin:
                kmin = out[k, j]
        for i in range(n):
            dik = out[i, k]
            if i == k or dik + kmin >= rowmax[i]:
                continue
            for j in range(n):
                cand = dik + out[k, j]
                if cand < out[i, j]:
                    out[i, j] = cand
    return out


@njit(cache=True)
def set_distance(D, members):
    n = D.shape[0]
    out = np.empty(n, dtype=np.int32)
    for z in range(n):
        best = D[members[0], z]
        for j in range(1, members.shape[0]):
            v = D[members[j], z]
            if v < best:
                best = v
        out[z] = best
    return out
