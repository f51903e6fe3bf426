"""Numba kernel backend.

njit mirrors of :mod:`ltrank.kernels_numpy`; same signatures, same RNG
contract, bit-identical outputs.  The Monte-Carlo loops run chunks of
trials in parallel (prange) with one counter-based stream per trial,
so results depend on neither thread count nor chunking.  Per-chunk
workspaces keep allocations out of the per-trial path.

All 64-bit arithmetic sticks to uint64 operands: numba promotes mixed
uint64/int64 expressions to float64, which would corrupt the RNG.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from . import _rng

IMPL = "numba"

U0 = np.uint64(0)
U1 = np.uint64(1)
U11 = np.uint64(11)
U27 = np.uint64(27)
U30 = np.uint64(30)
U31 = np.uint64(31)
U32 = np.uint64(32)
U58 = np.uint64(58)
U32MASK = np.uint64(0xFFFFFFFF)
U_GOLDEN = np.uint64(_rng.GOLDEN)
U_MIX_A = np.uint64(_rng.MIX_A)
U_MIX_B = np.uint64(_rng.MIX_B)
INV53 = 2.0 ** -53

_DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
_CTZ_TABLE = np.zeros(64, dtype=np.int64)
for _i in range(64):
    _CTZ_TABLE[((1 << _i) * 0x03F79D71B4CB0A89 & _rng.MASK64) >> 58] = _i


@njit(cache=True, inline="always")
def _ctz(w):
    return _CTZ_TABLE[np.int64(((w & (~w + U1)) * _DEBRUIJN) >> U58)]


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U30)) * U_MIX_A
    z = (z ^ (z >> U27)) * U_MIX_B
    return z ^ (z >> U31)


@njit(cache=True, inline="always")
def _base(seed, salt, stream):
    return _mix64(_mix64(seed ^ salt) + stream * U_GOLDEN)


@njit(cache=True, inline="always")
def _draw(base, i):
    return _mix64(base + (i + U1) * U_GOLDEN)


@njit(cache=True, inline="always")
def _mulhi64(a, b):
    ah = a >> U32
    al = a & U32MASK
    bh = b >> U32
    bl = b & U32MASK
    mid1 = ah * bl + ((al * bl) >> U32)
    mid2 = al * bh + (mid1 & U32MASK)
    return ah * bh + (mid1 >> U32) + (mid2 >> U32)


@njit(cache=True, inline="always")
def _pick_bounded(dr, bound):
    return np.int64(_mulhi64(dr, np.uint64(bound)))


def stream_base(seed: int, salt: int, stream: int) -> int:
    return int(_base(np.uint64(seed & _rng.MASK64), np.uint64(salt),
                     np.uint64(stream & _rng.MASK64)))


@njit(cache=True)
def _rng_block(base, count):
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = _draw(base, np.uint64(i))
    return out


def rng_block(base: int, count: int) -> np.ndarray:
    return _rng_block(np.uint64(base & _rng.MASK64), count)


@njit(cache=True)
def _ge_rank_ws(words, m, west, n):
    r = 0
    for col in range(n):
        if r == m:
            break
        wi = col >> 6
        mask = U1 << np.uint64(col & 63)
        piv = -1
        for i in range(r, m):
            if words[i, wi] & mask:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for w in range(west):
                tmp = words[r, w]
                words[r, w] = words[piv, w]
                words[piv, w] = tmp
        for i in range(r + 1, m):
            if words[i, wi] & mask:
                for w in range(west):
                    words[i, w] ^= words[r, w]
        r += 1
    return r


def ge_rank(words: np.ndarray, n: int) -> int:
    return int(_ge_rank_ws(words, words.shape[0], words.shape[1], n))


@njit(cache=True)
def _triangulate_ws(words, colwords, row_deg, col_deg, m, n, actmask,
                    alivemask, deg1, q_inact, P, Q):
    """Peeling with inactivation over bitset adjacency.

    `words` is the row-major bit packing and `colwords` its transpose;
    `row_deg`/`col_deg` hold residual degrees and are consumed.
    `actmask` (active columns), `alivemask` (non-pivot rows) and `deg1`
    (degree-1 rows) are scratch bitsets.
    """
    west = words.shape[1]
    wm = colwords.shape[1]
    for w in range(west):
        actmask[w] = ~U0
    nt = n & 63
    if n <= (west - 1) << 6:
        for w in range((n + 63) >> 6, west):
            actmask[w] = U0
    if nt:
        actmask[n >> 6] = (U1 << np.uint64(nt)) - U1
    for w in range(wm):
        alivemask[w] = ~U0
        deg1[w] = U0
    mt = m & 63
    if m <= (wm - 1) << 6:
        for w in range((m + 63) >> 6, wm):
            alivemask[w] = U0
    if mt:
        alivemask[m >> 6] = (U1 << np.uint64(mt)) - U1
    for i in range(m):
        if row_deg[i] == 1:
            deg1[i >> 6] |= U1 << np.uint64(i & 63)

    l = 0
    ni = 0
    remaining = n
    while remaining > 0:
        # lowest-index alive row of residual degree 1
        i = -1
        for wi in range(wm):
            w = deg1[wi]
            if w != U0:
                i = (wi << 6) + _ctz(w)
                break
        if i >= 0:
            # single scan: first active bit is the pivot column, and the
            # dying row releases a degree from every active column it hits
            c = -1
            for w in range(west):
                v = words[i, w] & actmask[w]
                while v != U0:
                    cc = (w << 6) + _ctz(v)
                    v &= v - U1
                    if c < 0:
                        c = cc
                    col_deg[cc] -= 1
            P[l] = i
            Q[l] = c
            l += 1
            alivemask[i >> 6] &= ~(U1 << np.uint64(i & 63))
            deg1[i >> 6] &= ~(U1 << np.uint64(i & 63))
        else:
            # inactivate: max residual degree, ties to lowest index
            c = -1
            bestdeg = np.int64(-1)
            for j in range(n):
                if (actmask[j >> 6] >> np.uint64(j & 63)) & U1:
                    if col_deg[j] > bestdeg:
                        c = j
                        bestdeg = col_deg[j]
            q_inact[ni] = c
            ni += 1
        actmask[c >> 6] &= ~(U1 << np.uint64(c & 63))
        remaining -= 1
        for w in range(wm):
            v = colwords[c, w] & alivemask[w]
            while v != U0:
                t = (w << 6) + _ctz(v)
                v &= v - U1
                row_deg[t] -= 1
                if row_deg[t] == 1:
                    deg1[t >> 6] |= U1 << np.uint64(t & 63)
                elif row_deg[t] == 0:
                    deg1[t >> 6] &= ~(U1 << np.uint64(t & 63))

    pos = l
    for w in range(wm):
        v = alivemask[w]
        while v != U0:
            P[pos] = (w << 6) + _ctz(v)
            v &= v - U1
            pos += 1
    for t in range(ni):
        Q[l + t] = q_inact[t]
    return l


@njit(cache=True)
def _adjacency_fill(indices, indptr, m, n, words, colwords, row_deg,
                    col_deg):
    west = words.shape[1]
    wm = colwords.shape[1]
    for i in range(m):
        for w in range(west):
            words[i, w] = U0
    for c in range(n):
        col_deg[c] = 0
        for w in range(wm):
            colwords[c, w] = U0
    for i in range(m):
        row_deg[i] = indptr[i + 1] - indptr[i]
        for p in range(indptr[i], indptr[i + 1]):
            c = indices[p]
            words[i, c >> 6] |= U1 << np.uint64(c & 63)
            colwords[c, i >> 6] |= U1 << np.uint64(i & 63)
            col_deg[c] += 1


@njit(cache=True)
def _triangulate(indices, indptr, m, n):
    west = max(1, (n + 63) >> 6)
    wm = max(1, (m + 63) >> 6)
    words = np.empty((m, west), dtype=np.uint64)
    colwords = np.empty((n, wm), dtype=np.uint64)
    row_deg = np.empty(max(1, m), dtype=np.int64)
    col_deg = np.empty(n, dtype=np.int64)
    _adjacency_fill(indices, indptr, m, n, words, colwords, row_deg,
                    col_deg)
    actmask = np.empty(west, dtype=np.uint64)
    alivemask = np.empty(wm, dtype=np.uint64)
    deg1 = np.empty(wm, dtype=np.uint64)
    q_inact = np.empty(n, dtype=np.int64)
    P = np.empty(max(1, m), dtype=np.int64)
    Q = np.empty(n, dtype=np.int64)
    l = _triangulate_ws(words, colwords, row_deg, col_deg, m, n, actmask,
                        alivemask, deg1, q_inact, P, Q)
    return P[:m].copy(), Q, l


def triangulate(indices, indptr, m, n):
    P, Q, l = _triangulate(indices, indptr, m, n)
    return P, Q, int(l)


@njit(cache=True)
def _residual_rank_ws(words, P, Q, l, m, n, colbits, tmat, hitbuf):
    """Rank of the residual block, by column-oriented elimination.

    colbits[c] is the bitmask of non-pivot rows currently holding
    column c, so XORing a pivot row into every row that holds its peel
    column is one mask-XOR per support column.  The rank then comes
    from eliminating the transposed residual (rank is
    transpose-invariant).
    """
    west = words.shape[1]
    r = n - l
    rows = m - l
    if r == 0 or rows == 0:
        return 0
    wrows = (rows + 63) >> 6
    for c in range(n):
        for w in range(wrows):
            colbits[c, w] = U0
    for idx in range(rows):
        i = P[l + idx]
        rb = U1 << np.uint64(idx & 63)
        rw = idx >> 6
        for w in range(west):
            v = words[i, w]
            while v != U0:
                colbits[(w << 6) + _ctz(v), rw] |= rb
                v &= v - U1
    for t in range(l - 1, -1, -1):
        c = Q[t]
        nonzero = False
        for w in range(wrows):
            hitbuf[w] = colbits[c, w]
            if hitbuf[w] != U0:
                nonzero = True
        if not nonzero:
            continue
        piv = P[t]
        for w in range(west):
            v = words[piv, w]
            while v != U0:
                c2 = (w << 6) + _ctz(v)
                v &= v - U1
                for ww in range(wrows):
                    colbits[c2, ww] ^= hitbuf[ww]
    for j in range(r):
        c = Q[l + j]
        for w in range(wrows):
            tmat[j, w] = colbits[c, w]
    return _ge_rank_ws(tmat, r, wrows, rows)


@njit(cache=True)
def _residual_matrix(words, P, Q, l, n):
    m = words.shape[0]
    west = words.shape[1]
    r = n - l
    rows = m - l
    wr = max(1, (r + 63) >> 6)
    work = np.empty((rows, west), dtype=np.uint64)
    for i in range(rows):
        src = P[l + i]
        for w in range(west):
            work[i, w] = words[src, w]
    for t in range(l - 1, -1, -1):
        c = Q[t]
        wi = c >> 6
        mask = U1 << np.uint64(c & 63)
        piv = P[t]
        for i in range(rows):
            if work[i, wi] & mask:
                for w in range(west):
                    work[i, w] ^= words[piv, w]
    out = np.zeros((rows, wr), dtype=np.uint64)
    for j in range(r):
        c = Q[l + j]
        wi = c >> 6
        sh = np.uint64(c & 63)
        ow = j >> 6
        ob = np.uint64(j & 63)
        for i in range(rows):
            out[i, ow] |= ((work[i, wi] >> sh) & U1) << ob
    return out


def residual_matrix(words, P, Q, l, n):
    return _residual_matrix(words, P, Q, l, n)


@njit(cache=True)
def _solve(words, P, Q, l, n, syms):
    m = words.shape[0]
    west = words.shape[1]
    width = syms.shape[1]
    r = n - l
    rows = m - l
    work = np.empty((rows, west), dtype=np.uint64)
    wsyms = np.empty((rows, width), dtype=np.uint8)
    for i in range(rows):
        src = P[l + i]
        for w in range(west):
            work[i, w] = words[src, w]
        for b in range(width):
            wsyms[i, b] = syms[src, b]
    for t in range(l - 1, -1, -1):
        c = Q[t]
        wi = c >> 6
        mask = U1 << np.uint64(c & 63)
        piv = P[t]
        for i in range(rows):
            if work[i, wi] & mask:
                for w in range(west):
                    work[i, w] ^= words[piv, w]
                for b in range(width):
                    wsyms[i, b] ^= syms[piv, b]
    wr = max(1, (r + 63) >> 6)
    R = np.zeros((rows, wr), dtype=np.uint64)
    for j in range(r):
        c = Q[l + j]
        wi = c >> 6
        sh = np.uint64(c & 63)
        ow = j >> 6
        ob = np.uint64(j & 63)
        for i in range(rows):
            R[i, ow] |= ((work[i, wi] >> sh) & U1) << ob

    pivot_of_col = np.full(r, -1, dtype=np.int64)
    pr = 0
    for j in range(r):
        if pr == rows:
            break
        wi = j >> 6
        mask = U1 << np.uint64(j & 63)
        piv = -1
        for i in range(pr, rows):
            if R[i, wi] & mask:
                piv = i
                break
        if piv < 0:
            continue
        if piv != pr:
            for w in range(wr):
                tmp = R[pr, w]
                R[pr, w] = R[piv, w]
                R[piv, w] = tmp
            for b in range(width):
                tmp8 = wsyms[pr, b]
                wsyms[pr, b] = wsyms[piv, b]
                wsyms[piv, b] = tmp8
        for i in range(rows):
            if i != pr and (R[i, wi] & mask):
                for w in range(wr):
                    R[i, w] ^= R[pr, w]
                for b in range(width):
                    wsyms[i, b] ^= wsyms[pr, b]
        pivot_of_col[j] = pr
        pr += 1

    rank = l + pr
    x = np.zeros((n, width), dtype=np.uint8)
    if rank < n:
        return rank, x, False
    for j in range(r):
        prow = pivot_of_col[j]
        for b in range(width):
            x[Q[l + j], b] = wsyms[prow, b]
    for t in range(l):
        i = P[t]
        pivcol = Q[t]
        acc = np.empty(width, dtype=np.uint8)
        for b in range(width):
            acc[b] = syms[i, b]
        for wi in range(west):
            w = words[i, wi]
            while w != U0:
                b = _ctz(w)
                w &= w - U1
                c = (wi << 6) + b
                if c != pivcol:
                    for bb in range(width):
                        acc[bb] ^= x[c, bb]
        for b in range(width):
            x[pivcol, b] = acc[b]
    return rank, x, True


def solve(words, P, Q, l, n, syms):
    rank, x, full = _solve(words, P, Q, l, n, syms)
    return int(rank), x, bool(full)


@njit(cache=True)
def _matvec(words, x):
    m = words.shape[0]
    west = words.shape[1]
    width = x.shape[1]
    out = np.zeros((m, width), dtype=np.uint8)
    for i in range(m):
        for wi in range(west):
            w = words[i, wi]
            while w != U0:
                b = _ctz(w)
                w &= w - U1
                c = (wi << 6) + b
                for bb in range(width):
                    out[i, bb] ^= x[c, bb]
    return out


def matvec(words, x):
    return _matvec(words, x)


@njit(cache=True, inline="always")
def _search_cum(cum, u):
    lo = 0
    hi = cum.size
    while lo < hi:
        mid = (lo + hi) >> 1
        if u < cum[mid]:
            hi = mid
        else:
            lo = mid + 1
    if lo >= cum.size:
        lo = cum.size - 1
    return lo


@njit(cache=True)
def _sample_ws(base, n, m, degrees, cum, row_deg, words, colwords, col_deg,
               indices, indptr, perm):
    """Sample one matrix into the workspaces, including the column-major
    transpose and degree vectors the triangulation consumes."""
    west = words.shape[1]
    wm = colwords.shape[1]
    for i in range(m):
        for w in range(west):
            words[i, w] = U0
    for c in range(n):
        col_deg[c] = 0
        for w in range(wm):
            colwords[c, w] = U0
    nnz = 0
    cnt = U0
    for i in range(m):
        u = np.float64(_draw(base, cnt) >> U11) * INV53
        cnt += U1
        d = degrees[_search_cum(cum, u)]
        row_deg[i] = d
        nnz += d
    for j in range(n):
        perm[j] = j
    pos = 0
    indptr[0] = 0
    for i in range(m):
        rowbit = U1 << np.uint64(i & 63)
        roww = i >> 6
        d = row_deg[i]
        for j in range(d):
            dr = _draw(base, cnt)
            cnt += U1
            t = j + _pick_bounded(dr, n - j)
            tmp = perm[j]
            perm[j] = perm[t]
            perm[t] = tmp
            c = perm[j]
            words[i, c >> 6] |= U1 << np.uint64(c & 63)
            colwords[c, roww] |= rowbit
            col_deg[c] += 1
            indices[pos] = c
            pos += 1
        indptr[i + 1] = pos
    return nnz


@njit(cache=True)
def _sample_words(n, m, degrees, cum, base):
    west = max(1, (n + 63) >> 6)
    wm = max(1, (m + 63) >> 6)
    dmax = 0
    for i in range(degrees.size):
        if degrees[i] > dmax:
            dmax = degrees[i]
    row_deg = np.empty(max(1, m), dtype=np.int64)
    words = np.empty((m, west), dtype=np.uint64)
    colwords = np.empty((n, wm), dtype=np.uint64)
    col_deg = np.empty(n, dtype=np.int64)
    indices = np.empty(max(1, m * dmax), dtype=np.int64)
    indptr = np.empty(m + 1, dtype=np.int64)
    perm = np.empty(n, dtype=np.int64)
    nnz = _sample_ws(base, n, m, degrees, cum, row_deg, words, colwords,
                     col_deg, indices, indptr, perm)
    return words, indices[:nnz].copy(), indptr


def sample_words(n, m, degrees, cum, base):
    return _sample_words(n, m, degrees, cum,
                         np.uint64(base & _rng.MASK64))


@njit(cache=True)
def _peel_rank(words, indices, indptr, m, n):
    P, Q, l = _triangulate(indices, indptr, m, n)
    wm = max(1, (m + 63) >> 6)
    colbits = np.empty((n, wm), dtype=np.uint64)
    tmat = np.empty((n, wm), dtype=np.uint64)
    hitbuf = np.empty(wm, dtype=np.uint64)
    rr = _residual_rank_ws(words, P, Q, l, m, n, colbits, tmat, hitbuf)
    return l + rr, n - l


def peel_rank(words, indices, indptr, m, n):
    rank, r = _peel_rank(words, indices, indptr, m, n)
    return int(rank), int(r)


@njit(cache=True, parallel=True)
def _mc_deficiency(n, m, trials, degrees, cum, seed, salt, stream_offset):
    etas = np.empty(trials, dtype=np.int64)
    rcols = np.empty(trials, dtype=np.int64)
    if trials == 0:
        return etas, rcols
    dmax = 0
    for i in range(degrees.size):
        if degrees[i] > dmax:
            dmax = degrees[i]
    cap = max(1, m * dmax)
    west = max(1, (n + 63) >> 6)
    wm = max(1, (m + 63) >> 6)
    nchunks = 64 if trials >= 64 else trials
    csize = (trials + nchunks - 1) // nchunks
    for ch in prange(nchunks):
        lo = ch * csize
        hi = min(lo + csize, trials)
        words = np.empty((m, west), dtype=np.uint64)
        colwords = np.empty((n, wm), dtype=np.uint64)
        indices = np.empty(cap, dtype=np.int64)
        indptr = np.empty(m + 1, dtype=np.int64)
        perm = np.empty(n, dtype=np.int64)
        col_deg = np.empty(n, dtype=np.int64)
        row_deg = np.empty(max(1, m), dtype=np.int64)
        actmask = np.empty(west, dtype=np.uint64)
        alivemask = np.empty(wm, dtype=np.uint64)
        deg1 = np.empty(wm, dtype=np.uint64)
        q_inact = np.empty(n, dtype=np.int64)
        P = np.empty(max(1, m), dtype=np.int64)
        Q = np.empty(n, dtype=np.int64)
        colbits = np.empty((n, wm), dtype=np.uint64)
        tmat = np.empty((n, wm), dtype=np.uint64)
        hitbuf = np.empty(wm, dtype=np.uint64)
        for t in range(lo, hi):
            base = _base(seed, salt, stream_offset + np.uint64(t))
            _sample_ws(base, n, m, degrees, cum, row_deg, words, colwords,
                       col_deg, indices, indptr, perm)
            l = _triangulate_ws(words, colwords, row_deg, col_deg, m, n,
                                actmask, alivemask, deg1, q_inact, P, Q)
            rr = _residual_rank_ws(words, P, Q, l, m, n, colbits, tmat,
                                   hitbuf)
            etas[t] = n - l - rr
            rcols[t] = n - l
    return etas, rcols


def mc_deficiency(n, m, trials, degrees, cum, seed, salt, stream_offset):
    return _mc_deficiency(n, m, trials, degrees, cum,
                          np.uint64(seed & _rng.MASK64), np.uint64(salt),
                          np.uint64(stream_offset & _rng.MASK64))


@njit(cache=True, parallel=True)
def _mc_append_rank(base_words, n, k, trials, seed, salt, stream_offset,
                    mask):
    nb = base_words.shape[0]
    west = max(1, (n + 63) >> 6)
    ranks = np.empty(trials, dtype=np.int64)
    if trials == 0:
        return ranks
    nchunks = 64 if trials >= 64 else trials
    csize = (trials + nchunks - 1) // nchunks
    for ch in prange(nchunks):
        lo = ch * csize
        hi = min(lo + csize, trials)
        mat = np.empty((nb + k, west), dtype=np.uint64)
        for t in range(lo, hi):
            base = _base(seed, salt, stream_offset + np.uint64(t))
            for i in range(nb):
                for w in range(west):
                    mat[i, w] = base_words[i, w]
            cnt = U0
            for i in range(k):
                for w in range(west):
                    v = _draw(base, cnt)
                    cnt += U1
                    if w == west - 1:
                        v &= mask
                    mat[nb + i, w] = v
            ranks[t] = _ge_rank_ws(mat, nb + k, west, n)
    return ranks


def mc_append_rank(base_words, n, k, trials, seed, salt, stream_offset):
    tail_bits = n & 63
    mask = _rng.MASK64 if tail_bits == 0 else (1 << tail_bits) - 1
    return _mc_append_rank(base_words, n, k, trials,
                           np.uint64(seed & _rng.MASK64), np.uint64(salt),
                           np.uint64(stream_offset & _rng.MASK64),
                           np.uint64(mask))
