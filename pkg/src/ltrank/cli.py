"""Command-line front end.

Subcommands: `dist` (build / truncate / supplement degree
distributions), `spectrum` (Monte-Carlo deficiency spectra), `curves`
(error-probability curves as CSV), `optimize` (dense-fraction search),
and `roundtrip` (end-to-end encode/decode checks).  Data goes to
stdout or files, progress to stderr.  Every command echoes its seed
and is byte-stable given it.

Exit codes: 0 success, 2 constraint violation, 3 coverage or
insufficiency, 4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import _rng, backend, degree, dep, gf2, kovalenko, optimize

EXIT_CONSTRAINT = 2
EXIT_COVERAGE = 3
EXIT_INVARIANT = 4


class InvariantBreach(RuntimeError):
    pass


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _parse_span(text: str) -> list[int]:
    """'lo:hi[:step]' inclusive integer span."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"bad span {text!r}, expected lo:hi[:step]")
    lo, hi = int(parts[0]), int(parts[1])
    step = int(parts[2]) if len(parts) == 3 else 1
    if step < 1 or hi < lo:
        raise ValueError(f"bad span {text!r}")
    return list(range(lo, hi + 1, step))


def _parse_floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p]


def _load_sparse(path) -> degree.DegreeDistribution:
    dist = degree.load_distribution(path)
    if isinstance(dist, degree.SupplementedDistribution):
        return dist.sparse
    return dist


def _print_dist_diagnostics(dist, n: int, gamma: float) -> None:
    a_r = degree.average_row_degree(dist)
    stats = degree.column_null_stats(dist, n, gamma)
    print(f"average_row_degree={a_r!r}")
    print(f"expected_null_columns={stats.expected_null_columns!r}")
    print(f"expected_null_columns_approx="
          f"{stats.expected_null_columns_approx!r}")


def _cmd_dist(args) -> int:
    if args.action == "build":
        counts = degree.rsd_expected_counts(args.n, args.soliton)
        full = degree.rsd_normalize(counts, n=args.n)
        spikes = [int(s) for s in args.spikes.split(",")] if args.spikes \
            else []
        dist = degree.truncate(full, args.max_small_degree, spikes,
                               args.gamma, args.eps)
    elif args.action == "truncate":
        src = _load_sparse(args.input)
        spikes = [int(s) for s in args.spikes.split(",")] if args.spikes \
            else []
        dist = degree.truncate(src, args.max_small_degree, spikes,
                               args.gamma, args.eps)
    else:  # supplement
        src = _load_sparse(args.input)
        dist = degree.supplement(src, args.rho, block_n=args.block_n)
    degree.save_distribution(args.output, dist)
    n = dist.sparse.n if isinstance(dist, degree.SupplementedDistribution) \
        else dist.n
    _print_dist_diagnostics(dist, n, args.gamma)
    print(f"wrote {args.output}")
    return 0


def _cmd_spectrum(args) -> int:
    dist = _load_sparse(args.dist)
    rows = _parse_span(args.rows)
    print(f"seed={args.seed}")
    _progress(f"estimating spectrum: n={args.n}, {len(rows)} row counts, "
              f"{args.trials} trials each [{backend.active_name()}]")
    spec = dep.estimate_spectrum(
        dist, args.n, rows, args.trials, eta_max=args.eta_max,
        seed=args.seed,
        progress=lambda m, t: _progress(f"  row_count={m} done"))
    dep.save_spectrum(args.output, spec)
    print(f"wrote {args.output}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(dep.spectrum_to_csv(spec))
        print(f"wrote {args.csv}")
    return 0


def _curve_for(kind, spectrum, dist, n, ks, args):
    pts = []
    for k in ks:
        gamma = Fraction(k, n)
        if kind == "kfrl":
            pts.append(dep.CurvePoint(float(gamma), kovalenko.kfrl(k, n)))
        elif kind == "edep":
            pts.append(dep.CurvePoint(float(gamma),
                                      dep.edep(spectrum, dist, gamma)))
        elif kind == "ubdep":
            pts.append(dep.CurvePoint(float(gamma),
                                      dep.ubdep(spectrum, dist, gamma)))
        else:  # simulate
            s = dep.simulate_dep(dist, n, gamma, args.trials, args.seed)
            pts.append(dep.CurvePoint(float(gamma), s.value,
                                      ci_low=s.ci_low, ci_high=s.ci_high))
    kind_tag = "SIMULATED" if kind == "simulate" else kind.upper()
    return dep.DepCurve(kind=kind_tag, points=tuple(pts))


def _cmd_curves(args) -> int:
    spectrum = dep.load_spectrum(args.spectrum)
    dist = degree.load_distribution(args.dist)
    n = spectrum.n
    sparse_id = dist.sparse.dist_id() \
        if isinstance(dist, degree.SupplementedDistribution) \
        else dist.dist_id()
    if sparse_id != spectrum.dist_id:
        _progress(f"warning: spectrum was estimated for distribution "
                  f"{spectrum.dist_id}, got {sparse_id}")
    ks = _parse_span(args.k_range)
    kinds = [w.strip().lower() for w in args.which.split(",") if w.strip()]
    bad = [w for w in kinds if w not in ("edep", "ubdep", "kfrl", "simulate")]
    if bad:
        raise ValueError(f"unknown curve kinds {bad}")
    print(f"seed={args.seed}")
    curves = []
    for kind in kinds:
        _progress(f"computing {kind} over {len(ks)} overhead points")
        curve = _curve_for(kind, spectrum, dist, n, ks, args)
        curves.append(curve)
        path = f"{args.output}{kind}.csv"
        with open(path, "w") as fh:
            fh.write(dep.curves_to_csv([curve]))
        print(f"wrote {path}")
    combined = f"{args.output}all.csv"
    with open(combined, "w") as fh:
        fh.write(dep.curves_to_csv(curves))
    print(f"wrote {combined}")

    gamma_k = kovalenko.kfro(args.delta, n)
    print(f"gamma_K={float(gamma_k)!r} ({gamma_k})")
    grid = [Fraction(k, n) for k in ks]
    for curve in curves:
        values = dict(zip(grid, curve.values()))
        got = dep.mso(lambda g: values[g], args.delta, grid)
        shown = "not-reached" if got is None else repr(float(got))
        print(f"gamma_min[{curve.kind}]={shown}")
    return 0


def _cmd_optimize(args) -> int:
    with open(args.spec) as fh:
        doc = json.load(fh)
    spectrum = dep.load_spectrum(doc["spectrum"])
    spec = optimize.OptimizationSpec(
        n=int(doc["n"]),
        delta=float(doc["delta"]),
        gamma_hi=float(doc["gamma_hi"]),
        gamma_lo=doc.get("gamma_lo"),
        candidates=tuple(doc["candidates"]) if "candidates" in doc
        else optimize.OptimizationSpec.__dataclass_fields__[
            "candidates"].default,
        k_max=doc.get("k_max"),
        include_ubdep=bool(doc.get("include_ubdep", False)))
    result = optimize.optimize_dense_fraction(spec, spectrum)
    for rep in result.reports:
        shown = "not-reached" if rep.overhead is None \
            else f"{float(rep.overhead)!r} ({rep.overhead})"
        print(f"candidate rho={rep.fraction:g}: {rep.verdict}, "
              f"gamma_min={shown}")
    print(f"chosen rho={result.chosen_fraction:g} at "
          f"gamma_min={float(result.achieved_overhead)!r}")
    for w in result.warnings:
        _progress(f"warning: {w}")
    out = {
        "chosen_fraction": result.chosen_fraction,
        "achieved_overhead": [result.achieved_overhead.numerator,
                              result.achieved_overhead.denominator],
        "candidates": [
            {
                "fraction": rep.fraction,
                "verdict": rep.verdict,
                "overhead": None if rep.overhead is None
                else [rep.overhead.numerator, rep.overhead.denominator],
            }
            for rep in result.reports
        ],
        "warnings": list(result.warnings),
    }
    with open(args.output, "w") as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.output}")
    if args.curves:
        for rep in result.reports:
            path = f"{args.curves}rho{rep.fraction:g}.csv"
            curves = [rep.curve]
            if rep.ubdep_curve is not None:
                curves.append(rep.ubdep_curve)
            with open(path, "w") as fh:
                fh.write(dep.curves_to_csv(curves))
            print(f"wrote {path}")
    return 0


ROUNDTRIP_CSV_HEADER = ("trials,successes,success_rate,ci_low,ci_high,"
                        "mean_residual_fraction,residual_fraction_std")


def _cmd_roundtrip(args) -> int:
    dist = degree.load_distribution(args.dist)
    n = args.n
    m = n + args.k
    width = args.width
    degrees, cum = degree.sampling_tables(dist)
    if int(degrees.max(initial=1)) > n:
        raise ValueError(f"distribution has degrees above block length {n}")
    kern = backend.get()
    print(f"seed={args.seed}")
    successes = 0
    fractions = []
    for t in range(args.trials):
        base_alpha = _rng.stream_base(args.seed, _rng.SALT_ROUNDTRIP, 2 * t)
        base_mat = _rng.stream_base(args.seed, _rng.SALT_ROUNDTRIP,
                                    2 * t + 1)
        alpha = (kern.rng_block(base_alpha, n * width)
                 & np.uint64(0xFF)).astype(np.uint8).reshape(n, width)
        words, indices, indptr = kern.sample_words(n, m, degrees, cum,
                                                   base_mat)
        beta = kern.matvec(words, alpha)
        P, Q, l = kern.triangulate(indices, indptr, m, n)
        rank, x, full = kern.solve(words, P, Q, l, n, beta)
        fractions.append((n - l) / n)
        if full:
            if not np.array_equal(x, alpha):
                raise InvariantBreach(
                    f"trial {t}: full-rank solve did not recover the "
                    f"payload")
            successes += 1
        if args.trials >= 10 and (t + 1) % max(1, args.trials // 10) == 0:
            _progress(f"  {t + 1}/{args.trials} trials")
    lo, hi = dep.wilson_interval(successes, args.trials)
    fr = np.asarray(fractions)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(ROUNDTRIP_CSV_HEADER.split(","))
    writer.writerow([args.trials, successes,
                     repr(successes / args.trials), repr(lo), repr(hi),
                     repr(float(fr.mean())), repr(float(fr.std()))])
    text = out.getvalue()
    with open(args.output, "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltrank",
        description="LT-code decoding-error analysis over GF(2)")
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads for Monte Carlo (0 = auto)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("dist", help="degree-distribution tools")
    dist_sub = p_dist.add_subparsers(dest="action", required=True)

    p_build = dist_sub.add_parser("build",
                                  help="soliton profile + truncation")
    p_build.add_argument("--n", type=int, required=True)
    p_build.add_argument("--soliton", "--S", type=float, default=10.0,
                         dest="soliton")
    p_build.add_argument("--ds", dest="max_small_degree", type=int,
                         required=True)
    p_build.add_argument("--spikes", type=str, default="")
    p_build.add_argument("--gamma", type=float, default=0.1)
    p_build.add_argument("--eps", type=float, default=0.9)
    p_build.add_argument("-o", "--output", required=True)

    p_trunc = dist_sub.add_parser("truncate", help="re-truncate a file")
    p_trunc.add_argument("--in", dest="input", required=True)
    p_trunc.add_argument("--ds", dest="max_small_degree", type=int,
                         required=True)
    p_trunc.add_argument("--spikes", type=str, default="")
    p_trunc.add_argument("--gamma", type=float, default=0.1)
    p_trunc.add_argument("--eps", type=float, default=0.9)
    p_trunc.add_argument("-o", "--output", required=True)

    p_supp = dist_sub.add_parser("supplement", help="add dense rows")
    p_supp.add_argument("--in", dest="input", required=True)
    p_supp.add_argument("--rho", type=float, required=True)
    p_supp.add_argument("--block-n", type=int, default=None)
    p_supp.add_argument("--gamma", type=float, default=0.1)
    p_supp.add_argument("-o", "--output", required=True)

    p_spec = sub.add_parser("spectrum", help="deficiency spectrum MC")
    p_spec.add_argument("--dist", required=True)
    p_spec.add_argument("--n", type=int, required=True)
    p_spec.add_argument("--rows", required=True,
                        help="sparse-row counts lo:hi[:step]")
    p_spec.add_argument("--trials", type=int, required=True)
    p_spec.add_argument("--eta-max", type=int, default=30)
    p_spec.add_argument("--seed", type=int, default=0)
    p_spec.add_argument("--csv", default=None)
    p_spec.add_argument("-o", "--output", required=True)

    p_curves = sub.add_parser("curves", help="error-probability curves")
    p_curves.add_argument("--spectrum", required=True)
    p_curves.add_argument("--dist", required=True)
    p_curves.add_argument("--delta", type=float, required=True)
    p_curves.add_argument("--k-range", required=True,
                          help="excess-row counts lo:hi[:step]")
    p_curves.add_argument("--which", default="edep,ubdep,kfrl")
    p_curves.add_argument("--trials", type=int, default=10000)
    p_curves.add_argument("--seed", type=int, default=0)
    p_curves.add_argument("-o", "--output", required=True,
                          help="output path prefix")

    p_opt = sub.add_parser("optimize", help="dense-fraction search")
    p_opt.add_argument("--spec", required=True)
    p_opt.add_argument("--curves", default=None,
                       help="per-candidate curve CSV prefix")
    p_opt.add_argument("-o", "--output", required=True)

    p_rt = sub.add_parser("roundtrip", help="encode/decode round trips")
    p_rt.add_argument("--dist", required=True)
    p_rt.add_argument("--n", type=int, required=True)
    p_rt.add_argument("--k", type=int, required=True,
                      help="excess rows (overhead k/n)")
    p_rt.add_argument("--width", type=int, default=1,
                      help="payload symbol width in bytes")
    p_rt.add_argument("--trials", type=int, default=1000)
    p_rt.add_argument("--seed", type=int, default=0)
    p_rt.add_argument("-o", "--output", required=True)

    return parser


_COMMANDS = {
    "dist": _cmd_dist,
    "spectrum": _cmd_spectrum,
    "curves": _cmd_curves,
    "optimize": _cmd_optimize,
    "roundtrip": _cmd_roundtrip,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    backend.set_threads(args.threads)
    try:
        return _COMMANDS[args.command](args)
    except degree.DensityConstraintViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except (dep.SpectrumCoverageError, optimize.NoCandidateSufficient) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except InvariantBreach as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    sys.exit(main())
