"""Pure-numpy kernel backend.

Reference implementations of the hot kernels: plain GF(2) elimination,
peeling triangulation with inactivation, the two-phase solve, row
sampling, and the fused Monte-Carlo loops.  Row operations are
vectorized with numpy; everything else is straightforward Python.  The
numba backend in :mod:`ltrank.kernels_numba` mirrors these functions
bit for bit; equivalence is enforced by tests.

Matrices are bit-packed: row i is ``words[i, :]`` with column c stored
at bit ``c & 63`` of word ``c >> 6``.
"""

from __future__ import annotations

import numpy as np

from . import _rng

IMPL = "numpy"

_U64 = np.uint64


def stream_base(seed: int, salt: int, stream: int) -> int:
    return _rng.stream_base(seed, salt, stream)


def rng_block(base: int, count: int) -> np.ndarray:
    """Draws 0..count-1 of a stream as a uint64 array."""
    idx = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _U64(base & _rng.MASK64) + idx * _U64(_rng.GOLDEN)
        z = (z ^ (z >> _U64(30))) * _U64(_rng.MIX_A)
        z = (z ^ (z >> _U64(27))) * _U64(_rng.MIX_B)
        return z ^ (z >> _U64(31))


def _uniform01(u64s: np.ndarray) -> np.ndarray:
    return (u64s >> _U64(11)).astype(np.float64) * (2.0 ** -53)


def _pick_bounded(draw: int, bound: int) -> int:
    """Map a 64-bit draw to [0, bound) by the multiply-shift method."""
    return (int(draw) * bound) >> 64


def ge_rank(words: np.ndarray, n: int) -> int:
    """GF(2) rank by plain Gaussian elimination.  Mutates `words`."""
    m = words.shape[0]
    r = 0
    for col in range(n):
        if r == m:
            break
        wi = col >> 6
        mask = _U64(1 << (col & 63))
        hits = np.nonzero(words[r:, wi] & mask)[0]
        if hits.size == 0:
            continue
        piv = r + int(hits[0])
        if piv != r:
            tmp = words[r].copy()
            words[r] = words[piv]
            words[piv] = tmp
        below = r + hits[1:]
        if below.size:
            words[below] ^= words[r]
        r += 1
    return r


def triangulate(indices: np.ndarray, indptr: np.ndarray, m: int, n: int):
    """Greedy peeling with inactivation.

    Repeatedly peels the lowest-index row of residual degree 1 onto the
    diagonal; when no such row exists, inactivates the active column of
    maximum residual degree (ties broken by lowest column index).
    Returns (P, Q, l): row permutation (pivot rows first, in peel
    order), column permutation (peeled columns first, then inactivated
    ones), and the triangular block size l.
    """
    col_deg = np.zeros(n, dtype=np.int64)
    np.add.at(col_deg, indices, 1)
    col_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(col_deg, out=col_ptr[1:])
    col_rows = np.empty(indices.size, dtype=np.int64)
    fill = col_ptr[:-1].copy()
    for i in range(m):
        for p in range(indptr[i], indptr[i + 1]):
            c = indices[p]
            col_rows[fill[c]] = i
            fill[c] += 1

    row_deg = (indptr[1:] - indptr[:-1]).astype(np.int64)
    active = np.ones(n, dtype=bool)
    alive = np.ones(m, dtype=bool)
    deg1 = row_deg == 1

    piv_rows = np.empty(m, dtype=np.int64)
    q_peel = np.empty(n, dtype=np.int64)
    q_inact = np.empty(n, dtype=np.int64)
    l = 0
    ni = 0
    remaining = n

    def drop_column(c: int) -> None:
        nonlocal remaining
        active[c] = False
        remaining -= 1
        for t in col_rows[col_ptr[c]:col_ptr[c + 1]]:
            if alive[t]:
                row_deg[t] -= 1
                deg1[t] = row_deg[t] == 1

    while remaining > 0:
        i = int(np.argmax(deg1)) if deg1.any() else -1
        if i >= 0:
            c = -1
            for p in range(indptr[i], indptr[i + 1]):
                if active[indices[p]]:
                    c = int(indices[p])
                    break
            piv_rows[l] = i
            q_peel[l] = c
            l += 1
            alive[i] = False
            deg1[i] = False
            for p in range(indptr[i], indptr[i + 1]):
                col_deg[indices[p]] -= 1
            drop_column(c)
        else:
            masked = np.where(active, col_deg, -1)
            c = int(np.argmax(masked))
            q_inact[ni] = c
            ni += 1
            drop_column(c)

    P = np.empty(m, dtype=np.int64)
    P[:l] = piv_rows[:l]
    P[l:] = np.nonzero(alive)[0]
    Q = np.empty(n, dtype=np.int64)
    Q[:l] = q_peel[:l]
    Q[l:] = q_inact[:ni]
    return P, Q, l


def residual_matrix(words: np.ndarray, P: np.ndarray, Q: np.ndarray,
                    l: int, n: int) -> np.ndarray:
    """Residual system of the non-pivot rows over the inactivated columns.

    Eliminates the peeled columns from the non-pivot rows (XORing the
    original pivot rows in reverse peel order) and packs the surviving
    bits over columns Q[l:] into a compact (m-l) x ceil(r/64) matrix.
    """
    m = words.shape[0]
    r = n - l
    rows = m - l
    wr = max(1, (r + 63) >> 6)
    work = words[P[l:]].copy()
    for t in range(l - 1, -1, -1):
        c = int(Q[t])
        wi = c >> 6
        mask = _U64(1 << (c & 63))
        hits = (work[:, wi] & mask) != 0
        if hits.any():
            work[hits] ^= words[P[t]]
    out = np.zeros((rows, wr), dtype=np.uint64)
    for j in range(r):
        c = int(Q[l + j])
        bits = (work[:, c >> 6] >> _U64(c & 63)) & _U64(1)
        out[:, j >> 6] |= bits << _U64(j & 63)
    return out


def _row_support(words: np.ndarray, i: int):
    cols = []
    for wi in range(words.shape[1]):
        w = int(words[i, wi])
        while w:
            b = (w & -w).bit_length() - 1
            cols.append((wi << 6) + b)
            w &= w - 1
    return cols


def solve(words: np.ndarray, P: np.ndarray, Q: np.ndarray, l: int, n: int,
          syms: np.ndarray):
    """Two-phase solve: residual elimination then forward substitution.

    Returns (rank, x, full).  When full is False only rank is
    meaningful and x is all zeros.
    """
    m = words.shape[0]
    width = syms.shape[1]
    r = n - l
    rows = m - l
    work = words[P[l:]].copy()
    wsyms = syms[P[l:]].copy()
    for t in range(l - 1, -1, -1):
        c = int(Q[t])
        wi = c >> 6
        mask = _U64(1 << (c & 63))
        hits = (work[:, wi] & mask) != 0
        if hits.any():
            work[hits] ^= words[P[t]]
            wsyms[hits] ^= syms[P[t]]
    wr = max(1, (r + 63) >> 6)
    R = np.zeros((rows, wr), dtype=np.uint64)
    for j in range(r):
        c = int(Q[l + j])
        bits = (work[:, c >> 6] >> _U64(c & 63)) & _U64(1)
        R[:, j >> 6] |= bits << _U64(j & 63)

    pivot_of_col = np.full(r, -1, dtype=np.int64)
    pr = 0
    for j in range(r):
        if pr == rows:
            break
        wi = j >> 6
        mask = _U64(1 << (j & 63))
        hits = np.nonzero(R[pr:, wi] & mask)[0]
        if hits.size == 0:
            continue
        piv = pr + int(hits[0])
        if piv != pr:
            R[[pr, piv]] = R[[piv, pr]]
            wsyms[[pr, piv]] = wsyms[[piv, pr]]
        others = np.nonzero(R[:, wi] & mask)[0]
        for i in others:
            if i != pr:
                R[i] ^= R[pr]
                wsyms[i] ^= wsyms[pr]
        pivot_of_col[j] = pr
        pr += 1

    rank = l + pr
    x = np.zeros((n, width), dtype=np.uint8)
    if rank < n:
        return rank, x, False
    for j in range(r):
        x[int(Q[l + j])] = wsyms[pivot_of_col[j]]
    for t in range(l):
        i = int(P[t])
        acc = syms[i].copy()
        for c in _row_support(words, i):
            if c != int(Q[t]):
                acc ^= x[c]
        x[int(Q[t])] = acc
    return rank, x, True


def matvec(words: np.ndarray, x: np.ndarray) -> np.ndarray:
    """GF(2) matrix-vector product with symbol payloads: out = H * x."""
    m = words.shape[0]
    out = np.zeros((m, x.shape[1]), dtype=np.uint8)
    for i in range(m):
        cols = _row_support(words, i)
        if cols:
            out[i] = np.bitwise_xor.reduce(x[cols], axis=0)
    return out


def sample_words(n: int, m: int, degrees: np.ndarray, cum: np.ndarray,
                 base: int):
    """Sample an m x n matrix: per-row degree from (degrees, cum), then
    that many distinct columns via partial Fisher-Yates.

    Draw order (fixed contract): m degree draws first, then the column
    draws row by row.  Returns (words, indices, indptr).
    """
    deg_draws = _uniform01(rng_block(base, m))
    didx = np.minimum(np.searchsorted(cum, deg_draws, side="right"),
                      len(cum) - 1)
    degs = degrees[didx]
    nnz = int(degs.sum())
    col_draws = rng_block(base, m + nnz)[m:]

    west = max(1, (n + 63) >> 6)
    words = np.zeros((m, west), dtype=np.uint64)
    indices = np.empty(nnz, dtype=np.int64)
    indptr = np.zeros(m + 1, dtype=np.int64)
    perm = np.arange(n, dtype=np.int64)
    pos = 0
    for i in range(m):
        d = int(degs[i])
        for j in range(d):
            t = j + _pick_bounded(col_draws[pos], n - j)
            perm[j], perm[t] = perm[t], perm[j]
            c = int(perm[j])
            words[i, c >> 6] |= _U64(1 << (c & 63))
            indices[pos] = c
            pos += 1
        indptr[i + 1] = pos
    return words, indices, indptr


def peel_rank(words: np.ndarray, indices: np.ndarray, indptr: np.ndarray,
              m: int, n: int):
    """Rank via the triangulate-then-eliminate decoding path.

    Returns (rank, residual column count r).
    """
    P, Q, l = triangulate(indices, indptr, m, n)
    rw = residual_matrix(words, P, Q, l, n)
    rr = ge_rank(rw, n - l)
    return l + rr, n - l


def mc_deficiency(n: int, m: int, trials: int, degrees: np.ndarray,
                  cum: np.ndarray, seed: int, salt: int, stream_offset: int):
    """Fused Monte-Carlo loop: sample, triangulate, rank, per trial.

    Returns (etas, rcols): deficiency n - rank and residual column
    count for each trial.  Trial t uses stream stream_offset + t.
    """
    etas = np.empty(trials, dtype=np.int64)
    rcols = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        base = stream_base(seed, salt, stream_offset + t)
        words, indices, indptr = sample_words(n, m, degrees, cum, base)
        rank, r = peel_rank(words, indices, indptr, m, n)
        etas[t] = n - rank
        rcols[t] = r
    return etas, rcols


def mc_append_rank(base_words: np.ndarray, n: int, k: int, trials: int,
                   seed: int, salt: int, stream_offset: int) -> np.ndarray:
    """Rank of [base; k fair-coin rows] per trial, by plain elimination."""
    nb = base_words.shape[0]
    west = max(1, (n + 63) >> 6)
    tail_bits = n & 63
    mask = _U64(_rng.MASK64) if tail_bits == 0 else _U64((1 << tail_bits) - 1)
    ranks = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        base = stream_base(seed, salt, stream_offset + t)
        mat = np.zeros((nb + k, west), dtype=np.uint64)
        if nb:
            mat[:nb] = base_words
        draws = rng_block(base, k * west)
        pos = 0
        for i in range(k):
            for w in range(west):
                v = draws[pos]
                pos += 1
                if w == west - 1:
                    v &= mask
                mat[nb + i, w] = v
        ranks[t] = ge_rank(mat, n)
    return ranks
