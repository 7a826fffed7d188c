"""Pure numpy (and scipy) kernels, used when numba is disabled."""
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


def _csr(indptr, indices):
    n = indptr.shape[0] - 1
    data = np.ones(indices.shape[0], dtype=np.float64)
    return csr_matrix((data, indices, indptr), shape=(n, n))


def bfs_row(indptr, indices, src):
    row = shortest_path(_csr(indptr, indices), unweighted=True, indices=[src])[0]
    return np.where(np.isinf(row), -1, row).astype(np.int32)


def all_pairs(indptr, indices):
    table = shortest_path(_csr(indptr, indices), unweighted=True)
    return np.where(np.isinf(table), -1, table).astype(np.int32)


def four_point(D):
    n = D.shape[0]
    D = D.astype(np.int64)
    best = -1  # so a quadruple is recorded even when every gap is 0
    witness = np.full(4, -1, dtype=np.int64)
    for a in range(n):
        # (b, c, d) cube; ordering constraints only trim duplicates, so skip them
        s1 = D[a][:, None, None] + D[None, :, :]              # d(a,b)+d(c,d)
        s2 = D[a][None, :, None] + D[:, None, :]              # d(a,c)+d(b,d)
        s3 = D[a][None, None, :] + D[:, :, None]              # d(a,d)+d(b,c)
        stacked = np.sort(np.stack([s1, s2, s3]), axis=0)
        gap = stacked[2] - stacked[1]
        k = int(np.argmax(gap))
        if gap.flat[k] > best:
            best = int(gap.flat[k])
            b, c, d = np.unravel_index(k, gap.shape)
            sums = (s1[b, c, d], s2[b, c, d], s3[b, c, d])
            top = int(np.argmax(sums))
            witness[:] = [(a, c, b, d), (a, b, c, d), (a, b, d, c)][top]
    return max(best, 0), witness


def nesting_scan(D, delta, eta1, eta2, tight):
    n = D.shape[0]
    tol = 1e-9
    D = D.astype(np.float64)
    holds = vacuous = violated = 0
    witness = np.full(4, -1, dtype=np.int64)
    bc = D[:, :, None]                      # d(b,c) over (b, c, d)
    cd = D[None, :, :]                      # d(c,d)
    bd = D[:, None, :]                      # d(b,d)
    for a in range(n):
        ab = D[a][:, None, None]
        ac = D[a][None, :, None]
        ad = D[a][None, None, :]
        e1 = ab + bc - ac if tight else eta1
        e2 = bc + cd - bd if tight else eta2
        hyp = (ab + bc <= ac + e1 + tol) & (bc + cd <= bd + e2 + tol) & (bc > (e1 + e2 + delta) / 2.0)
        ok = (ab + bd <= ad + e1 + delta + tol) & (ac + cd <= ad + e2 + delta + tol)
        hyp = np.broadcast_to(hyp, (n, n, n))
        ok = np.broadcast_to(ok, (n, n, n))
        bad = hyp & ~ok
        nh = int(np.count_nonzero(hyp))
        nbad = int(np.count_nonzero(bad))
        if nbad and violated == 0:
            b, c, d = np.unravel_index(int(np.argmax(bad)), bad.shape)
            witness[:] = [a, b, c, d]
        holds += nh - nbad
        violated += nbad
        vacuous += n ** 3 - nh
    return holds, vacuous, violated, witness


def minplus_closure(W):
    out = np.array(W, dtype=np.float64, copy=True)
    for k in range(out.shape[0]):
        np.minimum(out, out[:, k, None] + out[None, k, :], out=out)
    return out


def set_distance(D, members):
    return D[members].min(axis=0).astype(np.int32)
