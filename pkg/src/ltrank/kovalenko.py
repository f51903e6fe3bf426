"""Exact rank distribution of random fair-coin GF(2) matrices.

Implements the conditional Kovalenko rank distribution: the
probability that k appended i.i.d. fair-coin rows raise the rank of a
deficiency-eta matrix by omega, together with the full-rank limit
(KFRL), its overhead (KFRO), and the finite rank pmf of a dense
(n + k) x n matrix.  Everything here is closed-form arithmetic in
double precision; the auxiliary chain-sum table is bounded by
prod (1 - 2^-i)^-1 ~ 3.4627, so no rescaling is needed.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

_LIMIT_CONST = float(np.prod(1.0 - 0.5 ** np.arange(1, 200)))  # ~0.288788


def chain_sums(max_gain: int, max_length: int) -> np.ndarray:
    """Table S of nested geometric sums.

    ``S[g, t]`` sums ``2^-(i_1 + ... + i_t)`` over nondecreasing chains
    ``0 <= i_1 <= ... <= i_t <= g`` and satisfies the recursion
    ``S[g, t] = 2^-t * S[g-1, t] + S[g, t-1]`` with unit boundaries.
    """
    if max_gain < 0 or max_length < 0:
        raise ValueError("table bounds must be nonnegative")
    S = np.ones((max_gain + 1, max_length + 1))
    pow2 = 0.5 ** np.arange(max_length + 1)
    for g in range(1, max_gain + 1):
        S[g, 1:] = 1.0 + np.cumsum(pow2[1:] * S[g - 1, 1:])
    return S


def _chain_sum(gain: int, length: int) -> float:
    return float(chain_sums(gain, length)[gain, length])


def _nonsingular_products(t_max: int) -> np.ndarray:
    """Prefix products Q[t] = prod_{j=1..t} (1 - 2^-j)."""
    out = np.empty(t_max + 1)
    out[0] = 1.0
    acc = 1.0
    for j in range(1, t_max + 1):
        acc *= 1.0 - 0.5 ** j
        out[j] = acc
    return out


def rank_gain_prob(deficiency: int, gain: int, added_rows: int,
                   table: np.ndarray | None = None) -> float:
    """P(rank grows by `gain`) after appending `added_rows` fair-coin rows
    to a matrix with nullity `deficiency` (closed form).
    """
    eta, omega, k = deficiency, gain, added_rows
    if not (0 <= omega <= min(eta, k)):
        raise ValueError(
            f"need 0 <= gain <= min(deficiency, added_rows); "
            f"got ({eta}, {omega}, {k})")
    length = k - omega
    s = _chain_sum(omega, length) if table is None \
        else float(table[omega, length])
    value = s * 2.0 ** (-length * (eta - omega))
    for i in range(1, omega + 1):
        value *= 1.0 - 2.0 ** -(eta + 1 - i)
    return value


def rank_gain_pmf(deficiency: int, added_rows: int) -> np.ndarray:
    """Vector of rank-gain probabilities for gain = 0..min(eta, k)."""
    top = min(deficiency, added_rows)
    table = chain_sums(top, added_rows)
    return np.array([rank_gain_prob(deficiency, w, added_rows, table)
                     for w in range(top + 1)])


def rank_gain_prob_recursive(deficiency: int, gain: int,
                             added_rows: int) -> float:
    """Same probability via the row-by-row recursion (cross-check path).

    Appending one more row either repairs one deficiency dimension
    (prob 1 - 2^-(eta-omega+1) coming from gain-1) or lands in the span
    (prob 2^-(eta-omega) keeping gain).
    """
    eta, omega, k = deficiency, gain, added_rows
    if not (0 <= omega <= min(eta, k)):
        raise ValueError(
            f"need 0 <= gain <= min(deficiency, added_rows); "
            f"got ({eta}, {omega}, {k})")
    prev = np.zeros(eta + 1)
    prev[0] = 1.0
    for rows in range(1, k + 1):
        cur = np.zeros(eta + 1)
        for w in range(0, min(eta, rows) + 1):
            stay = prev[w] * 2.0 ** -(eta - w)
            repair = prev[w - 1] * (1.0 - 2.0 ** -(eta - w + 1)) \
                if w >= 1 else 0.0
            cur[w] = stay + repair
        prev = cur
    return float(prev[omega])


def kfrl(extra_rows: int, n: int) -> float:
    """Full-rank limit: the smallest possible rank-deficiency probability
    of any (n + extra_rows) x n binary ensemble.

    Evaluated as -expm1(sum log1p(-2^-i)) so the deep tail (2^-k below
    machine epsilon) keeps full relative accuracy.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if extra_rows >= n:
        return 0.0
    k = max(extra_rows, 0)
    log_prod = np.log1p(-(0.5 ** np.arange(k + 1, n + 1))).sum()
    return float(-np.expm1(log_prod))


def kfro(delta: float, n: int) -> Fraction:
    """Smallest overhead k/n with kfrl(k, n) <= delta."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    for k in range(n + 1):
        if kfrl(k, n) <= delta:
            return Fraction(k, n)
    return Fraction(n, n)  # kfrl(n, n) == 0, so never reached


def dense_rank_pmf(n: int, extra_rows: int) -> np.ndarray:
    """pmf of the rank of an (n + extra_rows) x n fair-coin matrix.

    Entry s holds P(rank = n - s) for s = 0..n.
    """
    if n <= 0 or extra_rows < 0:
        raise ValueError("need n > 0 and extra_rows >= 0")
    k = extra_rows
    table = chain_sums(n, k + n)
    q = _nonsingular_products(n)
    pmf = np.empty(n + 1)
    for s in range(n + 1):
        tail = q[n] / q[s]  # prod_{i=s+1..n} (1 - 2^-i)
        pmf[s] = table[n - s, k + s] * 2.0 ** (-(k + s) * s) * tail
    return pmf


def dense_rank_upper_bound(n: int, extra_rows: int, s: int) -> float:
    """Closed-form upper bound on P(rank = n - s) from the limit of the
    chain-sum sequence; tight as n grows, exact at s = 0 minus kfrl.
    """
    k = extra_rows
    q = _nonsingular_products(max(n, k + s))
    return float(2.0 ** (-s * (k + s)) * (q[n] / q[s]) / q[k + s])
