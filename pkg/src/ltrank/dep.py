"""Decoding-error-probability estimators.

The workflow: estimate the deficiency spectrum of the sparse ensemble
once by Monte Carlo (:func:`estimate_spectrum`), then evaluate the
closed-form estimators for any dense fraction in microseconds --
:func:`edep` combines the spectrum with the exact conditional
rank-gain probabilities, :func:`ubdep` with the union bound.
:func:`simulate_dep` is the direct Gaussian-elimination reference, and
:func:`mso` extracts the minimum stable overhead from any curve.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import _rng, backend, kovalenko
from .degree import DegreeDistribution, SupplementedDistribution, \
    sampling_tables

CURVE_KINDS = ("EDEP", "UBDEP", "KFRL", "SIMULATED")

# Per-side binomial tail mass the full-mode estimators may leave
# uncovered (attributed to failure, so estimates stay conservative).
_TAIL_MASS = 5e-10


class SpectrumCoverageError(ValueError):
    """A required sparse-row count lies outside the spectrum grid."""

    def __init__(self, row_counts):
        self.row_counts = sorted(set(int(r) for r in row_counts))
        super().__init__(
            f"spectrum does not cover sparse-row counts {self.row_counts}")


@dataclass(frozen=True)
class SpectrumPoint:
    trials: int
    counts: np.ndarray  # deficiency histogram, length eta_max + 1
    tail: int           # trials with deficiency > eta_max

    def phi(self) -> np.ndarray:
        return self.counts / self.trials

    def tail_mass(self) -> float:
        return self.tail / self.trials


@dataclass
class DeficiencySpectrum:
    """Estimated P(deficiency = eta) per sparse-row count.

    phi_at() interpolates geometrically (linearly when a side is zero)
    between adjacent grid points, which is accurate because log phi is
    close to linear in the row count.  Below n the deficiency has a
    structural floor of n - rows (every missing row costs a rank), so
    the interpolation aligns the two neighbors on the excess deficiency
    above that floor before mixing.
    """

    n: int
    dist_id: str
    eta_max: int
    grid: dict[int, SpectrumPoint] = field(default_factory=dict)
    seed: int = 0

    def row_counts(self) -> list[int]:
        return sorted(self.grid)

    def covers(self, row_count: int) -> bool:
        rcs = self.row_counts()
        return bool(rcs) and rcs[0] <= row_count <= rcs[-1]

    def phi_at(self, row_count: int) -> np.ndarray:
        if row_count in self.grid:
            return self.grid[row_count].phi()
        rcs = self.row_counts()
        if not self.covers(row_count):
            raise SpectrumCoverageError([row_count])
        hi = next(r for r in rcs if r > row_count)
        lo = max(r for r in rcs if r < row_count)
        t = (row_count - lo) / (hi - lo)
        pa = self.grid[lo].phi()
        pb = self.grid[hi].phi()
        shift = max(0, self.n - row_count)
        sa = max(0, self.n - lo)
        sb = max(0, self.n - hi)
        out = np.zeros(self.eta_max + 1)
        for ep in range(self.eta_max + 1 - shift):
            ia = ep + sa
            ib = ep + sb
            fa = pa[ia] if ia <= self.eta_max else 0.0
            fb = pb[ib] if ib <= self.eta_max else 0.0
            if fa > 0.0 and fb > 0.0:
                out[ep + shift] = math.exp((1.0 - t) * math.log(fa)
                                           + t * math.log(fb))
            else:
                out[ep + shift] = (1.0 - t) * fa + t * fb
        return out


def estimate_spectrum(dist, n: int, row_counts, trials: int,
                      eta_max: int = 30, seed: int = 0,
                      progress=None) -> DeficiencySpectrum:
    """Monte-Carlo deficiency histogram of the sparse ensemble.

    Every grid point samples `trials` matrices of that many rows from
    `dist` and ranks them through the decoding path (triangulation plus
    residual elimination).  Streams are keyed by (seed, row count,
    trial), so the result is independent of grid composition and
    thread count.
    """
    if isinstance(dist, SupplementedDistribution):
        dist = dist.sparse
    if trials < 1 or eta_max < 1:
        raise ValueError("need trials >= 1 and eta_max >= 1")
    degrees, cum = sampling_tables(dist)
    if degrees.max(initial=1) > n:
        raise ValueError(f"distribution has degrees above block length {n}")
    kern = backend.get()
    spec = DeficiencySpectrum(n=n, dist_id=dist.dist_id(), eta_max=eta_max,
                              seed=seed)
    for m in sorted(set(int(r) for r in row_counts)):
        etas, _ = kern.mc_deficiency(n, m, trials, degrees, cum, seed,
                                     _rng.SALT_SPECTRUM, m << 32)
        counts = np.bincount(np.minimum(etas, eta_max + 1),
                             minlength=eta_max + 2)
        spec.grid[m] = SpectrumPoint(trials=trials,
                                     counts=counts[:eta_max + 1].copy(),
                                     tail=int(counts[eta_max + 1]))
        if progress is not None:
            progress(m, trials)
    return spec


def binomial_pmf(m: int, k: int, p: float) -> float:
    """C(m, k) p^k (1-p)^(m-k), stable via log-gamma for large m."""
    if not 0 <= k <= m:
        raise ValueError("need 0 <= k <= m")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == m else 0.0
    logc = (math.lgamma(m + 1) - math.lgamma(k + 1)
            - math.lgamma(m - k + 1))
    return math.exp(logc + k * math.log(p) + (m - k) * math.log1p(-p))


def _binomial_vector(m: int, p: float) -> np.ndarray:
    k = np.arange(m + 1)
    if p == 0.0:
        out = np.zeros(m + 1)
        out[0] = 1.0
        return out
    if p == 1.0:
        out = np.zeros(m + 1)
        out[m] = 1.0
        return out
    logc = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
    return np.exp(logc + k * math.log(p) + (m - k) * math.log1p(-p))


def row_total(n: int, gamma) -> int:
    """m = (1 + gamma) n, which must be integral."""
    m = (1.0 + float(gamma)) * n
    rounded = round(m)
    if abs(m - rounded) > 1e-6:
        raise ValueError(f"(1 + gamma) * n = {m} is not an integer")
    return int(rounded)


def _dense_fraction_of(dist) -> float:
    """Dense fraction of a distribution, or a bare fraction in [0, 1)."""
    if isinstance(dist, SupplementedDistribution):
        return dist.dense_fraction
    if isinstance(dist, (int, float)):
        value = float(dist)
        if not 0.0 <= value < 1.0:
            raise ValueError("dense fraction must be in [0, 1)")
        return value
    return 0.0


def _required_k_range(bins: np.ndarray) -> tuple[int, int, float]:
    """Central k-range holding all but ~1e-12 of the binomial mass.

    Returns (lo, hi, uncovered) where `uncovered` is the excluded mass.
    """
    m = bins.size - 1
    prefix = np.cumsum(bins)
    lo = 0
    while lo < m and prefix[lo] <= _TAIL_MASS:
        lo += 1
    hi = m
    while hi > lo and (prefix[-1] - prefix[hi - 1]) <= _TAIL_MASS:
        hi -= 1
    below = float(prefix[lo - 1]) if lo > 0 else 0.0
    above = float(prefix[-1] - prefix[hi]) if hi < m else 0.0
    return lo, hi, below + above


def _check_coverage(spectrum: DeficiencySpectrum, m: int, lo: int,
                    hi: int) -> None:
    missing = [m - k for k in range(lo, hi + 1)
               if not spectrum.covers(m - k)]
    if missing:
        raise SpectrumCoverageError(missing)


def _hull_window(spectrum: DeficiencySpectrum, m: int, bins: np.ndarray,
                 max_uncovered: float) -> tuple[int, int, float]:
    """Clip the required k-range to the spectrum hull.

    Binomial mass outside the clipped range is returned so callers can
    attribute it to failure (a conservative, bounded bias).  Raises
    when that mass is material enough to distort the estimate.
    """
    lo, hi, uncovered = _required_k_range(bins)
    rcs = spectrum.row_counts()
    if rcs:
        klo = max(lo, m - rcs[-1])
        khi = min(hi, m - rcs[0])
    else:
        klo, khi = 1, 0
    if klo > lo:
        uncovered += float(bins[lo:klo].sum())
    if khi < hi:
        uncovered += float(bins[khi + 1:hi + 1].sum())
    if klo > khi or uncovered > max_uncovered:
        missing = [m - k for k in range(lo, hi + 1)
                   if not spectrum.covers(m - k)]
        raise SpectrumCoverageError(missing if missing else [m])
    return klo, khi, uncovered


def _full_rank_factors(eta_max: int, k_max: int) -> np.ndarray:
    """zeta(eta, eta, k) table: probability that k fair-coin rows repair
    a deficiency of exactly eta."""
    table = kovalenko.chain_sums(eta_max, k_max)
    q = 1.0
    out = np.zeros((eta_max + 1, k_max + 1))
    for eta in range(eta_max + 1):
        if eta > 0:
            q *= 1.0 - 0.5 ** eta
        for k in range(eta, k_max + 1):
            out[eta, k] = table[eta, k - eta] * q
    return out


def edep(spectrum: DeficiencySpectrum, dist, gamma,
         window: int | None = None, max_uncovered: float = 0.02) -> float:
    """Estimated decoding-error probability from the spectrum and the
    exact conditional rank-gain probabilities.

    Sums, over the number k of dense rows, the binomial weight times
    the per-k failure probability 1 - sum_eta zeta(eta, eta, k) phi(eta).
    Spectrum mass beyond eta_max counts as failure (conservative), as
    does binomial mass whose sparse-row count the spectrum cannot
    cover (raising instead once it exceeds `max_uncovered`).
    `window` restricts k to floor(m rho) +/- window; the dropped
    binomial mass then contributes nothing, so the truncation error is
    bounded by that mass.
    """
    n = spectrum.n
    m = row_total(n, gamma)
    rho = _dense_fraction_of(dist)
    bins = _binomial_vector(m, rho)
    if window is None:
        lo, hi, fail = _hull_window(spectrum, m, bins, max_uncovered)
    else:
        if window < 0:
            raise ValueError("window must be >= 0")
        centre = int(m * rho)
        lo = max(0, centre - window)
        hi = min(m, centre + window)
        fail = 0.0
        _check_coverage(spectrum, m, lo, hi)
    zdiag = _full_rank_factors(spectrum.eta_max, hi)
    for k in range(lo, hi + 1):
        phi = spectrum.phi_at(m - k)
        top = min(k, spectrum.eta_max)
        pf = float(np.dot(zdiag[:top + 1, k], phi[:top + 1]))
        fail += bins[k] * (1.0 - pf)
    return float(fail)


def ubdep(spectrum: DeficiencySpectrum, dist, gamma,
          max_uncovered: float = 0.02) -> float:
    """Union-bound upper estimate of the decoding-error probability.

    Per k dense rows: repaired deficiencies eta <= k contribute
    phi(eta) 2^-(k - eta); everything deeper (including spectrum tail
    mass and uncovered binomial mass) contributes in full, which keeps
    the bound an upper bound.
    """
    n = spectrum.n
    m = row_total(n, gamma)
    rho = _dense_fraction_of(dist)
    bins = _binomial_vector(m, rho)
    lo, hi, fail = _hull_window(spectrum, m, bins, max_uncovered)
    for k in range(lo, hi + 1):
        phi = spectrum.phi_at(m - k)
        top = min(k, spectrum.eta_max)
        bound = 0.0
        for eta in range(1, top + 1):
            bound += phi[eta] * 2.0 ** -(k - eta)
        bound += max(0.0, 1.0 - float(phi[:top + 1].sum()))
        fail += bins[k] * min(1.0, bound)
    return float(fail)


def wilson_interval(successes: int, trials: int,
                    z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials
                         + z2 / (4.0 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class DepSample:
    """One simulated decoding-error estimate with its Wilson interval."""

    value: float
    ci_low: float
    ci_high: float
    failures: int
    trials: int
    mean_residual_fraction: float


def simulate_dep(dist, n: int, gamma, trials: int, seed: int) -> DepSample:
    """Direct Monte Carlo: fraction of sampled matrices with rank < n,
    ranked through the decoding path.  Deterministic in the seed."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m = row_total(n, gamma)
    degrees, cum = sampling_tables(dist)
    if degrees.max(initial=1) > n:
        raise ValueError(f"distribution has degrees above block length {n}")
    kern = backend.get()
    etas, rcols = kern.mc_deficiency(n, m, trials, degrees, cum, seed,
                                     _rng.SALT_DEP, m << 32)
    failures = int(np.count_nonzero(etas))
    lo, hi = wilson_interval(failures, trials)
    return DepSample(value=failures / trials, ci_low=lo, ci_high=hi,
                     failures=failures, trials=trials,
                     mean_residual_fraction=float(rcols.mean()) / n)


def mso(evaluator, delta: float, gamma_grid):
    """Minimum stable overhead: smallest grid gamma whose evaluated
    error probability is <= delta.  Returns None when the curve never
    reaches the bound on the grid."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must be in (0, 1]")
    for gamma in gamma_grid:
        if evaluator(gamma) <= delta:
            return gamma
    return None


@dataclass(frozen=True)
class CurvePoint:
    gamma: float
    value: float
    ci_low: float | None = None
    ci_high: float | None = None


@dataclass(frozen=True)
class DepCurve:
    """One error-probability curve, tagged by estimator kind."""

    kind: str
    points: tuple[CurvePoint, ...]

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"kind must be one of {CURVE_KINDS}")
        object.__setattr__(self, "points", tuple(self.points))
        gammas = [p.gamma for p in self.points]
        if any(g < 0 for g in gammas):
            raise ValueError("gamma values must be nonnegative")
        if any(b <= a for a, b in zip(gammas, gammas[1:])):
            raise ValueError("gamma values must be strictly increasing")
        if any(not 0.0 <= p.value <= 1.0 for p in self.points):
            raise ValueError("curve values must be in [0, 1]")

    def gammas(self) -> list[float]:
        return [p.gamma for p in self.points]

    def values(self) -> list[float]:
        return [p.value for p in self.points]


CURVE_CSV_HEADER = "gamma,value,ci_low,ci_high,kind"


def curves_to_csv(curves) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CURVE_CSV_HEADER.split(","))
    for curve in curves:
        for p in curve.points:
            writer.writerow([repr(p.gamma), repr(p.value),
                             "" if p.ci_low is None else repr(p.ci_low),
                             "" if p.ci_high is None else repr(p.ci_high),
                             curve.kind])
    return out.getvalue()


def curves_from_csv(text: str) -> list[DepCurve]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CURVE_CSV_HEADER.split(","):
        raise ValueError("bad curve CSV header")
    by_kind: dict[str, list[CurvePoint]] = {}
    for gamma, value, lo, hi, kind in rows[1:]:
        by_kind.setdefault(kind, []).append(CurvePoint(
            gamma=float(gamma), value=float(value),
            ci_low=float(lo) if lo else None,
            ci_high=float(hi) if hi else None))
    return [DepCurve(kind=k, points=tuple(pts))
            for k, pts in by_kind.items()]


SPECTRUM_CSV_HEADER = "row_count,eta,phi,trials"


def spectrum_to_csv(spectrum: DeficiencySpectrum) -> str:
    """Per-(row count, eta) phi rows; the final row of each grid point
    (eta = eta_max + 1) aggregates all deeper deficiencies so the phi
    column sums to exactly 1."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SPECTRUM_CSV_HEADER.split(","))
    for m in spectrum.row_counts():
        point = spectrum.grid[m]
        for eta in range(spectrum.eta_max + 1):
            writer.writerow([m, eta, repr(point.counts[eta] / point.trials),
                             point.trials])
        writer.writerow([m, spectrum.eta_max + 1,
                         repr(point.tail / point.trials), point.trials])
    return out.getvalue()


def spectrum_to_json(spectrum: DeficiencySpectrum) -> str:
    doc = {
        "n": spectrum.n,
        "dist_id": spectrum.dist_id,
        "eta_max": spectrum.eta_max,
        "seed": spectrum.seed,
        "grid": [
            {
                "row_count": m,
                "trials": point.trials,
                "counts": [int(c) for c in point.counts],
                "tail": point.tail,
            }
            for m, point in sorted(spectrum.grid.items())
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def spectrum_from_json(text: str) -> DeficiencySpectrum:
    doc = json.loads(text)
    spec = DeficiencySpectrum(n=int(doc["n"]), dist_id=doc["dist_id"],
                              eta_max=int(doc["eta_max"]),
                              seed=int(doc.get("seed", 0)))
    for entry in doc["grid"]:
        counts = np.asarray(entry["counts"], dtype=np.int64)
        if counts.size != spec.eta_max + 1:
            raise ValueError("counts length does not match eta_max")
        point = SpectrumPoint(trials=int(entry["trials"]), counts=counts,
                              tail=int(entry["tail"]))
        if int(point.counts.sum()) + point.tail != point.trials:
            raise ValueError("spectrum counts do not sum to trials")
        spec.grid[int(entry["row_count"])] = point
    return spec


def save_spectrum(path, spectrum: DeficiencySpectrum) -> None:
    with open(path, "w") as fh:
        fh.write(spectrum_to_json(spectrum))


def load_spectrum(path) -> DeficiencySpectrum:
    with open(path) as fh:
        return spectrum_from_json(fh.read())
