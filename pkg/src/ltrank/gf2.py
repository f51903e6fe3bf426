"""Bit-packed GF(2) matrices, rank, triangulation, and the two-phase solve.

A received LT-code generator matrix is held as a :class:`BitMatrix`.
Rank can be computed two ways: :func:`rank` runs plain Gaussian
elimination (the reference oracle), while the decoding path
(:func:`triangulate` + residual elimination, as used by
:func:`smlda_solve` and all Monte-Carlo estimators) first peels an
approximate lower triangulation and only eliminates the small
residual block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _rng, backend


class BitMatrix:
    """An m x n matrix over GF(2), rows packed into uint64 words.

    Treat instances as immutable: operations never modify `words`, and
    callers must not either.  Column c of row i lives at bit ``c & 63``
    of ``words[i, c >> 6]``.
    """

    __slots__ = ("m", "n", "words")

    def __init__(self, m: int, n: int, words: np.ndarray):
        expected = (m, max(1, (n + 63) >> 6))
        if words.shape != expected or words.dtype != np.uint64:
            raise ValueError(f"words must be uint64 with shape {expected}")
        self.m = m
        self.n = n
        self.words = words

    @classmethod
    def from_dense(cls, array) -> "BitMatrix":
        a = np.asarray(array, dtype=np.uint8) & 1
        m, n = a.shape
        words = np.zeros((m, max(1, (n + 63) >> 6)), dtype=np.uint64)
        for c in range(n):
            bits = a[:, c].astype(np.uint64)
            words[:, c >> 6] |= bits << np.uint64(c & 63)
        return cls(m, n, words)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=np.uint8)
        for c in range(self.n):
            out[:, c] = (self.words[:, c >> 6] >> np.uint64(c & 63)) \
                & np.uint64(1)
        return out

    def row_support(self, i: int) -> tuple[int, ...]:
        cols = []
        for wi in range(self.words.shape[1]):
            w = int(self.words[i, wi])
            while w:
                cols.append((wi << 6) + (w & -w).bit_length() - 1)
                w &= w - 1
        return tuple(cols)

    def row_weights(self) -> np.ndarray:
        return np.array([len(self.row_support(i)) for i in range(self.m)],
                        dtype=np.int64)

    def _supports_flat(self):
        indices = []
        indptr = np.zeros(self.m + 1, dtype=np.int64)
        for i in range(self.m):
            sup = self.row_support(i)
            indices.extend(sup)
            indptr[i + 1] = len(indices)
        return np.asarray(indices, dtype=np.int64), indptr

    def __eq__(self, other) -> bool:
        return (isinstance(other, BitMatrix) and self.m == other.m
                and self.n == other.n
                and bool(np.array_equal(self.words, other.words)))

    def __hash__(self):  # pragma: no cover - identity semantics suffice
        return id(self)

    def __repr__(self) -> str:
        return f"BitMatrix({self.m}x{self.n})"


@dataclass(frozen=True)
class TriangulationResult:
    """Row/column permutations exposing the peeled triangular block.

    Reordering the matrix as ``M[row_perm][:, col_perm]`` puts a unit
    lower-triangular block of size `triangular_size` in the top-left
    corner; the remaining `residual_count` columns were inactivated (or
    never covered by any row).
    """

    row_perm: np.ndarray
    col_perm: np.ndarray
    triangular_size: int
    residual_count: int


@dataclass(frozen=True)
class SolveOutcome:
    """Result of a maximum-likelihood solve attempt.

    `deficiency` is n - rank (0 means full rank and `solution` holds
    the recovered payload symbols, one row per source symbol).
    """

    full_rank: bool
    deficiency: int
    solution: np.ndarray | None
    residual_fraction: float


def matrix_from_rows(row_supports, n: int) -> BitMatrix:
    """Build a BitMatrix from an iterable of column-index sets."""
    rows = [sorted(set(int(c) for c in sup)) for sup in row_supports]
    m = len(rows)
    words = np.zeros((m, max(1, (n + 63) >> 6)), dtype=np.uint64)
    for i, sup in enumerate(rows):
        for c in sup:
            if not 0 <= c < n:
                raise IndexError(f"column {c} out of range for n={n}")
            words[i, c >> 6] |= np.uint64(1 << (c & 63))
    return BitMatrix(m, n, words)


def rank(matrix: BitMatrix) -> int:
    """GF(2) rank via plain Gaussian elimination (reference oracle)."""
    return backend.get().ge_rank(matrix.words.copy(), matrix.n)


def triangulate(matrix: BitMatrix) -> TriangulationResult:
    """Approximate lower triangulation by peeling with inactivation."""
    indices, indptr = matrix._supports_flat()
    P, Q, l = backend.get().triangulate(indices, indptr, matrix.m, matrix.n)
    return TriangulationResult(row_perm=P, col_perm=Q, triangular_size=l,
                               residual_count=matrix.n - l)


def peel_rank(matrix: BitMatrix) -> tuple[int, int]:
    """Rank via the decoding path; returns (rank, residual columns)."""
    indices, indptr = matrix._supports_flat()
    return backend.get().peel_rank(matrix.words, indices, indptr,
                                   matrix.m, matrix.n)


def residual_fraction(matrix: BitMatrix) -> float:
    """Fraction of columns the triangulation leaves to dense elimination."""
    if matrix.n == 0:
        return 0.0
    return triangulate(matrix).residual_count / matrix.n


def reorder(matrix: BitMatrix, tri: TriangulationResult) -> BitMatrix:
    """Apply a triangulation's (P, Q) permutations to the matrix."""
    dense = matrix.to_dense()
    return BitMatrix.from_dense(dense[tri.row_perm][:, tri.col_perm])


def as_symbols(values, count: int, width: int | None = None) -> np.ndarray:
    """Normalize payload symbols to a (count, width) uint8 array."""
    if isinstance(values, np.ndarray):
        arr = values.astype(np.uint8, copy=False)
        if arr.ndim == 1:
            arr = arr[:, None]
    else:
        arr = np.array([list(bytes(v)) for v in values], dtype=np.uint8)
    if arr.shape[0] != count:
        raise ValueError(f"expected {count} symbols, got {arr.shape[0]}")
    if width is not None and arr.shape[1] != width:
        raise ValueError(f"expected symbol width {width}, got {arr.shape[1]}")
    return np.ascontiguousarray(arr)


def matvec(matrix: BitMatrix, symbols) -> np.ndarray:
    """Encode: XOR-combine payload symbols along each row's support."""
    x = as_symbols(symbols, matrix.n)
    return backend.get().matvec(matrix.words, x)


def smlda_solve(matrix: BitMatrix, syndromes) -> SolveOutcome:
    """Two-phase structured solve of ``M x = syndromes`` over GF(2).

    Back-substitutes through the peeled triangular block and runs
    conventional elimination only on the residual columns.  A full-rank
    system yields the unique payload vector; otherwise the outcome
    reports the rank deficiency and no solution.
    """
    syms = as_symbols(syndromes, matrix.m)
    indices, indptr = matrix._supports_flat()
    kern = backend.get()
    P, Q, l = kern.triangulate(indices, indptr, matrix.m, matrix.n)
    rk, x, full = kern.solve(matrix.words, P, Q, l, matrix.n, syms)
    frac = (matrix.n - l) / matrix.n if matrix.n else 0.0
    return SolveOutcome(full_rank=full, deficiency=matrix.n - rk,
                        solution=x if full else None,
                        residual_fraction=frac)


def sample_base(seed: int, stream: int = 0) -> int:
    """Stream base for single-matrix sampling (see ltrank._rng)."""
    return _rng.stream_base(seed, _rng.SALT_SAMPLE, stream)
