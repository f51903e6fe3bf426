"""Dense-fraction optimization.

Searches an ascending grid of candidate dense fractions for the
smallest one whose estimated-DEP curve reaches a target error bound
within a stated overhead window just above the full-rank-limit
overhead.  Evaluation is pure arithmetic over a previously estimated
deficiency spectrum, so scanning the whole candidate grid is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import dep, kovalenko

VERDICT_ACCEPTED = "accepted"
VERDICT_TOO_SMALL = "too_small"


class NoCandidateSufficient(RuntimeError):
    """Even the largest candidate fraction misses the overhead window."""


@dataclass(frozen=True)
class OptimizationSpec:
    """Parameters of one dense-fraction search.

    The overhead window defaults to one starting at the full-rank-limit
    overhead for (delta, n); a candidate is accepted when its minimum
    stable overhead lands at or below gamma_hi.  The evaluation grid
    runs over integer excess-row counts k = 0..k_max (overhead k/n).
    """

    n: int
    delta: float
    gamma_hi: float
    gamma_lo: float | None = None
    candidates: tuple[float, ...] = tuple(round(0.025 * i, 3)
                                          for i in range(1, 9))
    k_max: int | None = None
    include_ubdep: bool = False

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must be in (0, 1]")
        cands = tuple(float(c) for c in self.candidates)
        if not cands or any(b <= a for a, b in zip(cands, cands[1:])):
            raise ValueError("candidates must be strictly increasing")
        if any(not 0.0 <= c < 1.0 for c in cands):
            raise ValueError("candidate fractions must be in [0, 1)")
        object.__setattr__(self, "candidates", cands)
        lo = self.gamma_lo
        if lo is None:
            lo = float(kovalenko.kfro(self.delta, self.n)) \
                if self.delta < 1.0 else 0.0
            object.__setattr__(self, "gamma_lo", lo)
        if self.gamma_hi < lo:
            raise ValueError("gamma_hi must be >= gamma_lo")
        if self.k_max is None:
            object.__setattr__(self, "k_max",
                               int(-(-self.gamma_hi * self.n // 1)))

    def gamma_grid(self) -> list[Fraction]:
        return [Fraction(k, self.n) for k in range(self.k_max + 1)]


@dataclass(frozen=True)
class CandidateReport:
    fraction: float
    verdict: str
    overhead: Fraction | None  # minimum stable overhead, None if unreached
    curve: dep.DepCurve
    ubdep_curve: dep.DepCurve | None = None


@dataclass(frozen=True)
class OptimizationResult:
    chosen_fraction: float
    achieved_overhead: Fraction
    reports: tuple[CandidateReport, ...]
    warnings: tuple[str, ...] = field(default=())


def _edep_curve(spectrum, rho, grid):
    points = [dep.CurvePoint(gamma=float(g),
                             value=dep.edep(spectrum, rho, g))
              for g in grid]
    return dep.DepCurve(kind="EDEP", points=tuple(points))


def optimize_dense_fraction(spec: OptimizationSpec,
                            spectrum: dep.DeficiencySpectrum
                            ) -> OptimizationResult:
    """Evaluate candidates in ascending order; the first whose minimum
    stable overhead is <= gamma_hi wins.  All candidate curves are
    reported either way."""
    if spectrum.n != spec.n:
        raise ValueError("spectrum block length does not match spec")
    grid = spec.gamma_grid()
    reports = []
    warnings = []
    chosen = None
    for rho in spec.candidates:
        curve = _edep_curve(spectrum, rho, grid)
        by_gamma = dict(zip(grid, curve.values()))
        overhead = dep.mso(lambda g: by_gamma[g], spec.delta, grid)
        accepted = overhead is not None and float(overhead) <= spec.gamma_hi
        ub = None
        if spec.include_ubdep:
            ub = dep.DepCurve(kind="UBDEP", points=tuple(
                dep.CurvePoint(gamma=float(g),
                               value=dep.ubdep(spectrum, rho, g))
                for g in grid))
        reports.append(CandidateReport(
            fraction=rho,
            verdict=VERDICT_ACCEPTED if accepted else VERDICT_TOO_SMALL,
            overhead=overhead, curve=curve, ubdep_curve=ub))
        if accepted and chosen is None:
            chosen = reports[-1]

    # Larger fractions should never estimate worse than smaller ones;
    # a material violation means the spectrum is too noisy.
    for prev, cur in zip(reports, reports[1:]):
        for a, b in zip(prev.curve.points, cur.curve.points):
            if b.value > a.value + 1e-10:
                warnings.append(
                    f"EDEP not monotone in the dense fraction at gamma="
                    f"{a.gamma:g}: {prev.fraction:g} -> {a.value:.3e}, "
                    f"{cur.fraction:g} -> {b.value:.3e}")

    if chosen is None:
        details = ", ".join(
            f"{r.fraction:g}:{'-' if r.overhead is None else float(r.overhead)}"
            for r in reports)
        raise NoCandidateSufficient(
            f"no candidate reaches delta={spec.delta:g} by gamma="
            f"{spec.gamma_hi:g} (per-candidate overheads: {details})")
    return OptimizationResult(chosen_fraction=chosen.fraction,
                              achieved_overhead=chosen.overhead,
                              reports=tuple(reports),
                              warnings=tuple(warnings))
