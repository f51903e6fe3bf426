"""Row-degree distributions: robust soliton, truncation, dense-row
supplementation, and matrix sampling.

A sparse distribution assigns fractions to small degrees (plus a few
spike degrees that keep the average row degree above the null-column
bound); supplementing it mixes in a fraction of dense rows of degree
floor(n/2), which is what pushes the decoder's error floor down to the
full-rank limit.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _rng, backend, gf2

_MASS_TOL = 1e-9


class DensityConstraintViolated(ValueError):
    """Average row degree too small for the requested null-column bound."""

    def __init__(self, average_degree: float, bound: float):
        self.average_degree = average_degree
        self.bound = bound
        super().__init__(
            f"average row degree {average_degree:.4f} below required "
            f"{bound:.4f}; add spike mass or relax gamma/eps")


@dataclass(frozen=True)
class DegreeDistribution:
    """Sparse row-degree distribution: degree -> fraction, summing to 1."""

    n: int
    entries: dict[int, float]
    soliton_s: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("block length must be >= 1")
        clean = {}
        for d, f in sorted(self.entries.items()):
            d = int(d)
            f = float(f)
            if not 1 <= d <= self.n:
                raise ValueError(f"degree {d} outside 1..{self.n}")
            if f <= 0.0:
                raise ValueError(f"fraction for degree {d} must be > 0")
            clean[d] = f
        total = math.fsum(clean.values())
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"fractions sum to {total!r}, not 1")
        object.__setattr__(self, "entries", clean)

    @property
    def degrees(self) -> np.ndarray:
        return np.fromiter(self.entries.keys(), dtype=np.int64)

    @property
    def fractions(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=np.float64)

    def dist_id(self) -> str:
        return _digest({"n": self.n, "entries": sorted(self.entries.items()),
                        "dense": 0.0})


@dataclass(frozen=True)
class SupplementedDistribution:
    """A sparse distribution mixed with a dense fraction of rows of
    degree floor(n/2); the sparse fractions keep their own
    normalization and are scaled by (1 - dense_fraction) at sampling.
    """

    sparse: DegreeDistribution
    dense_fraction: float
    dense_degree: int

    def __post_init__(self):
        if not 0.0 <= self.dense_fraction < 1.0:
            raise ValueError("dense fraction must be in [0, 1)")
        if not 1 <= self.dense_degree:
            raise ValueError("dense degree must be >= 1")
        total = ((1.0 - self.dense_fraction)
                 * math.fsum(self.sparse.entries.values())
                 + self.dense_fraction)
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError("total row-degree mass must be 1")

    def combined_entries(self) -> dict[int, float]:
        scale = 1.0 - self.dense_fraction
        out = {d: f * scale for d, f in self.sparse.entries.items()}
        if self.dense_fraction > 0.0:
            out[self.dense_degree] = (out.get(self.dense_degree, 0.0)
                                      + self.dense_fraction)
        return dict(sorted(out.items()))

    def dist_id(self) -> str:
        return _digest({"n": self.sparse.n,
                        "entries": sorted(self.sparse.entries.items()),
                        "dense": self.dense_fraction,
                        "dense_degree": self.dense_degree})


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


# Spiked truncation of the S=10, n=1000 soliton profile; the stock
# workload for docs, benchmarks, and tests.  Usable at any block
# length >= 35.
SPIKED_RSD_S10 = {
    1: 0.014, 2: 0.481, 3: 0.152, 4: 0.082, 5: 0.048,
    6: 0.034, 7: 0.024, 8: 0.024, 9: 0.012, 10: 0.012,
    25: 0.059, 35: 0.058,
}


def example_distribution(n: int = 100) -> DegreeDistribution:
    """The stock spiked soliton truncation, targeted at block length n."""
    return DegreeDistribution(n=n, entries=dict(SPIKED_RSD_S10),
                              soliton_s=10.0)


def rsd_expected_counts(n: int, s: float) -> dict[int, float]:
    """Expected per-degree row counts of the robust soliton profile:
    s + 1 rows of degree 1, n/(d(d-1)) + s/d of degree d >= 2.
    """
    if n < 2 or s < 1:
        raise ValueError("need n >= 2 and soliton parameter s >= 1")
    counts = {1: s + 1.0}
    for d in range(2, n + 1):
        counts[d] = n / (d * (d - 1)) + s / d
    return counts


def rsd_normalize(counts: dict[int, float],
                  n: int | None = None) -> DegreeDistribution:
    """Normalize expected counts into a degree distribution."""
    clean = {int(d): float(c) for d, c in counts.items() if c != 0.0}
    if any(c < 0 for c in clean.values()):
        raise ValueError("counts must be nonnegative")
    if not clean:
        raise ValueError("counts must not all be zero")
    total = math.fsum(clean.values())
    if n is None:
        n = max(clean)
    return DegreeDistribution(
        n=n, entries={d: c / total for d, c in sorted(clean.items())})


def average_row_degree(dist) -> float:
    """Mean row degree; for supplemented distributions this includes the
    dense rows."""
    entries = dist.combined_entries() \
        if isinstance(dist, SupplementedDistribution) else dist.entries
    return math.fsum(d * f for d, f in entries.items())


def truncate(dist: DegreeDistribution, max_small_degree: int,
             spikes, gamma: float, eps: float) -> DegreeDistribution:
    """Drop fractions above `max_small_degree`, moving their mass onto
    the spike degrees (split proportionally to the original fractions).

    Raises DensityConstraintViolated when the truncated average row
    degree falls below ln(n/eps) / (1 + gamma), the point where the
    expected number of never-covered columns exceeds eps.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    if gamma < 0.0:
        raise ValueError("gamma must be >= 0")
    spikes = sorted(set(int(d) for d in spikes))
    for d in spikes:
        if d not in dist.entries:
            raise ValueError(f"spike degree {d} not in the distribution")
        if d > dist.n:
            raise ValueError(f"spike degree {d} exceeds n={dist.n}")

    kept = {d: f for d, f in dist.entries.items() if d <= max_small_degree}
    residual = 1.0 - math.fsum(kept.values())
    if residual > _MASS_TOL:
        if not spikes:
            raise ValueError("spikes required: truncation moves mass")
        weights = {d: dist.entries[d] for d in spikes}
        wsum = math.fsum(weights.values())
        for d in spikes:
            kept[d] = kept.get(d, 0.0) + residual * weights[d] / wsum
        out = DegreeDistribution(n=dist.n, entries=kept,
                                 soliton_s=dist.soliton_s)
    else:
        out = dist

    a_r = average_row_degree(out)
    bound = math.log(dist.n / eps) / (1.0 + gamma)
    if a_r < bound:
        raise DensityConstraintViolated(a_r, bound)
    return out


@dataclass(frozen=True)
class ColumnNullStats:
    """Null-column diagnostics of an (1+gamma)n x n random matrix."""

    null_probability: float          # exact product form
    expected_null_columns: float     # n * null_probability
    expected_null_columns_approx: float  # n * exp(-(1+gamma) * a_r)


def column_null_stats(dist, n: int, gamma: float) -> ColumnNullStats:
    """Probability that a fixed column is never covered, exactly and via
    the exponential approximation."""
    entries = dist.combined_entries() \
        if isinstance(dist, SupplementedDistribution) else dist.entries
    log_p = 0.0
    zero = False
    for d, f in entries.items():
        if d > n:
            raise ValueError(f"degree {d} exceeds block length {n}")
        if d == n:
            zero = True
            continue
        log_p += (1.0 + gamma) * n * f * math.log1p(-d / n)
    lam0 = 0.0 if zero else math.exp(log_p)
    a_r = average_row_degree(dist)
    approx = n * math.exp(-(1.0 + gamma) * a_r)
    return ColumnNullStats(null_probability=lam0,
                           expected_null_columns=n * lam0,
                           expected_null_columns_approx=approx)


def supplement(dist: DegreeDistribution, dense_fraction: float,
               block_n: int | None = None) -> SupplementedDistribution:
    """Mix `dist` with a fraction of dense rows of degree floor(n/2)."""
    n = dist.n if block_n is None else block_n
    return SupplementedDistribution(sparse=dist,
                                    dense_fraction=float(dense_fraction),
                                    dense_degree=max(1, n // 2))


def sampling_tables(dist) -> tuple[np.ndarray, np.ndarray]:
    """(degrees, cumulative fractions) arrays for the samplers."""
    entries = dist.combined_entries() \
        if isinstance(dist, SupplementedDistribution) else dist.entries
    degrees = np.fromiter(entries.keys(), dtype=np.int64)
    cum = np.cumsum(np.fromiter(entries.values(), dtype=np.float64))
    cum[-1] = 1.0
    return degrees, cum


def sample_matrix(dist, n: int, m: int, seed: int,
                  stream: int = 0) -> gf2.BitMatrix:
    """Sample an m x n matrix: per row, a degree from `dist`, then that
    many distinct columns uniformly.  Deterministic in (seed, stream).
    """
    degrees, cum = sampling_tables(dist)
    if degrees.max(initial=1) > n:
        raise ValueError(f"distribution has degrees above block length {n}")
    if m < 0:
        raise ValueError("row count must be >= 0")
    kern = backend.get()
    base = _rng.stream_base(seed, _rng.SALT_SAMPLE, stream)
    words, _, _ = kern.sample_words(n, m, degrees, cum, base)
    return gf2.BitMatrix(m, n, words)


def save_distribution(path, dist) -> None:
    with open(path, "w") as fh:
        fh.write(distribution_to_json(dist))


def distribution_to_json(dist) -> str:
    if isinstance(dist, SupplementedDistribution):
        sparse = dist.sparse
        doc = {
            "n": sparse.n,
            "soliton_s": sparse.soliton_s,
            "entries": [{"degree": d, "fraction": f}
                        for d, f in sparse.entries.items()],
            "dense_fraction": dist.dense_fraction,
            "dense_degree": dist.dense_degree,
        }
    else:
        doc = {
            "n": dist.n,
            "soliton_s": dist.soliton_s,
            "entries": [{"degree": d, "fraction": f}
                        for d, f in dist.entries.items()],
            "dense_fraction": 0.0,
        }
    return json.dumps(doc, indent=2) + "\n"


def load_distribution(path):
    with open(path) as fh:
        doc = json.load(fh)
    sparse = DegreeDistribution(
        n=int(doc["n"]),
        entries={int(e["degree"]): float(e["fraction"])
                 for e in doc["entries"]},
        soliton_s=doc.get("soliton_s"))
    rho = float(doc.get("dense_fraction", 0.0))
    if rho == 0.0:
        return sparse
    return SupplementedDistribution(
        sparse=sparse, dense_fraction=rho,
        dense_degree=int(doc.get("dense_degree", max(1, sparse.n // 2))))
