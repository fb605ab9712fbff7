"""Command-line interface: inspect a family, sample batches, run verification
suites, solve tilts.

Exit codes: 0 success, 2 configuration error, 3 infeasible conditioning,
4 budget exhausted, 5 tilt solver failure. All randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analysis import (
    FlatMomentTargets,
    concentration_report,
    crt_height_gof,
    feasible_sizes,
    largest_blob_and_outdegree,
    rescaled_contour,
    tail_curve,
)
from .batch import read_manifest, write_batch, write_manifest
from .errors import (
    BienaymeError,
    BudgetExhausted,
    ConfigError,
    Infeasible,
    InsufficientData,
    NoConvergence,
    NotCritical,
    Overflow,
    TruncationTooCoarse,
)
from .families import load_family, load_preset, save_family, PRESET_NAMES
from .flatlaw import materialize_flat_law
from .rng import RngStream, SampleBudget
from .samplers import (
    AttemptStats,
    ExactConditionedSampler,
    TreeStats,
    sample_by_type,
    sample_conditioned_rejection,
    sample_spine_tree,
    sample_unconditioned,
)
from .spectral import (
    family_sigma2,
    flattened_moments,
    mean_matrix,
    scaling_constant,
    spectral_profile,
)
from .tilting import TiltParams, solve_tilt, tilt
from .trees import contour_function, reduce_tree

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_BUDGET = 4
EXIT_SOLVER = 5


def _csv_ints(text):
    return [int(x) for x in text.split(",") if x.strip() != ""]


def _csv_floats(text):
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _load(args):
    if args.family in PRESET_NAMES:
        fam = load_preset(args.family)
    else:
        fam = load_family(args.family)
    if getattr(args, "lam", None):
        fam = fam.with_lambda(_csv_ints(args.lam))
    return fam


def _budget(args):
    return SampleBudget(
        max_vertices=getattr(args, "max_vertices", None) or 1_000_000,
        max_attempts=getattr(args, "max_attempts", None) or 10_000_000,
    )


def cmd_inspect(args):
    fam = _load(args)
    A = mean_matrix(fam)
    prof = spectral_profile(fam, require_irreducible=True)
    out = {
        "K": fam.num_critical_types,
        "Kprime": fam.num_subcritical_types,
        "lambda": [int(x) for x in fam.lam],
        "mean_matrix": A.tolist(),
        "radius": prof.radius,
        "classification": prof.classification,
        "irreducible_on_critical_block": prof.irreducible_on_critical_block,
        "subcritical_block_ok": prof.subcritical_block_ok,
        "family_hash": fam.family_hash(),
    }
    if prof.classification != "critical":
        print(json.dumps(out, indent=2))
        print(f"error: family is {prof.classification}, not critical", file=sys.stderr)
        raise NotCritical(prof.classification)
    means, c1 = flattened_moments(fam, prof)
    out.update(
        {
            "left_vector": prof.left_vec.tolist(),
            "right_vector": prof.right_vec.tolist(),
            "sigma2": family_sigma2(fam, prof),
            "c_scal_linear_combination": scaling_constant(fam, "linear-combination", prof),
            "c_scal_by_type": scaling_constant(fam, "by-type", prof),
            "flat_offspring_means": means.tolist(),
            "c1": c1,
        }
    )
    print(json.dumps(out, indent=2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(out, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def _check_feasible(fam, lam, n, force):
    feas = feasible_sizes(fam, lam=lam, limit=min(max(n, 1), 256))
    if n <= max(feas.values, default=-1):
        ok = n in feas.values
    else:
        ok = feas.lattice_contains(n)
    if not ok and not force:
        raise Infeasible(
            f"weighted size {n} is off the feasible lattice "
            f"(offset {feas.offset}, period {feas.period}); use --force to override"
        )


def cmd_sample(args):
    fam = _load(args)
    budget = _budget(args)
    os.makedirs(args.out, exist_ok=True)
    seed = args.seed
    stats = AttemptStats()
    conditioning = {"method": args.method, "n": args.n, "lambda": [int(x) for x in fam.lam]}
    trees = []
    if args.method in ("rejection", "exact"):
        if args.n is None:
            raise ConfigError("--n is required for conditioned sampling")
        _check_feasible(fam, fam.lam, args.n, args.force)
    if args.method == "rejection":
        for i in range(args.replicates):
            trees.append(
                sample_conditioned_rejection(
                    fam, args.n, RngStream(seed, i), budget=budget, stats=stats
                )
            )
    elif args.method == "exact":
        sampler = ExactConditionedSampler(fam, args.n)
        for i in range(args.replicates):
            trees.append(sampler.sample(RngStream(seed, i)))
    elif args.method == "by-type":
        if not args.types or not args.targets:
            raise ConfigError("--types and --targets are required for by-type sampling")
        types = _csv_ints(args.types)
        targets = _csv_ints(args.targets)
        conditioning.update({"types": types, "targets": targets})
        for i in range(args.replicates):
            trees.append(
                sample_by_type(fam, types, targets, RngStream(seed, i), budget=budget,
                               stats=stats)
            )
    elif args.method == "unconditioned":
        for i in range(args.replicates):
            trees.append(sample_unconditioned(fam, RngStream(seed, i), budget=budget))
    elif args.method == "spine":
        conditioning["ell"] = args.ell
        law = materialize_flat_law(fam)
        for i in range(args.replicates):
            marked = sample_spine_tree(fam, args.ell, RngStream(seed, i), budget=budget,
                                       flat_law=law)
            trees.append(marked.tree.tree)
    else:
        raise ConfigError(f"unknown method {args.method!r}")
    bin_path = os.path.join(args.out, "trees.bin")
    write_batch(bin_path, trees)
    write_manifest(
        os.path.join(args.out, "manifest.json"),
        family=fam,
        seed=seed,
        stream_lo=0,
        stream_hi=args.replicates - 1,
        conditioning=conditioning,
        outputs={"trees": "trees.bin"},
        attempts=stats.attempts,
        overflows=stats.overflows,
    )
    print(f"wrote {len(trees)} trees to {bin_path}")
    return EXIT_OK


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(x) for x in row) + "\n")


def _collect_stats(fam, n, replicates, seed, method, budget):
    if method == "exact":
        sampler = ExactConditionedSampler(fam, n)
        return [sampler.sample_stats(RngStream(seed, i)) for i in range(replicates)]
    stats = []
    for i in range(replicates):
        t = sample_conditioned_rejection(fam, n, RngStream(seed, i), budget=budget)
        stats.append(TreeStats.from_tree(t, fam.lam))
    return stats


def cmd_verify(args):
    fam = _load(args)
    budget = _budget(args)
    os.makedirs(args.out, exist_ok=True)
    prof = spectral_profile(fam)
    if prof.classification != "critical":
        raise NotCritical(prof.classification)
    means, c1 = flattened_moments(fam, prof)
    cs = scaling_constant(fam, "linear-combination", prof)
    n = args.n
    _check_feasible(fam, fam.lam, n, args.force)
    suites = ("concentration", "tail", "gof", "blobs") if args.suite == "all" else (args.suite,)
    stats = _collect_stats(fam, n, args.replicates, args.seed, args.method, budget)
    all_pass = True
    outputs = {}
    law = materialize_flat_law(fam)
    if "concentration" in suites:
        if law.complete:
            targets = FlatMomentTargets.from_flat_law(law)
        else:
            targets = FlatMomentTargets.from_monte_carlo(
                fam, RngStream(args.seed, 1_000_003).generator()
            )
        reports = concentration_report(stats, c1, targets)
        _write_csv(
            os.path.join(args.out, "concentration.csv"),
            ("statistic", "estimate", "std_error", "target", "passed", "note"),
            [r.row() for r in reports],
        )
        outputs["concentration"] = "concentration.csv"
        all_pass &= all(r.passed for r in reports)
        for r in reports:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.estimate:.5g}")
    if "tail" in suites:
        curve = tail_curve(
            stats, all_weights_positive=bool(np.all(fam.lam > 0)),
            min_replicates=min(1000, args.replicates),
        )
        _write_csv(
            os.path.join(args.out, "tail.csv"),
            ("x", "survival", "lo", "hi", "envelope"),
            list(curve.rows()),
        )
        outputs["tail"] = "tail.csv"
        ok = curve.dominates and (curve.height_le_n_rate in (None, 1.0))
        all_pass &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] tail envelope dominates={curve.dominates} "
              f"C={curve.envelope_C:.3g} c={curve.envelope_c:.3g} "
              f"H<=n rate={curve.height_le_n_rate}")
    if "gof" in suites:
        heights = np.array([s.height for s in stats])
        gof = crt_height_gof(heights, cs, n, threshold=args.ks_threshold,
                             min_replicates=min(10_000, max(args.replicates, 1)))
        all_pass &= gof.passed
        print(f"[{'PASS' if gof.passed else 'FAIL'}] height KS={gof.ks:.4f} "
              f"(threshold {gof.threshold})")
        outputs["gof"] = "gof.json"
        with open(os.path.join(args.out, "gof.json"), "w") as fh:
            json.dump({"ks": gof.ks, "threshold": gof.threshold,
                       "replicates": gof.replicates, "passed": gof.passed}, fh, indent=2)
    if "blobs" in suites:
        reports = largest_blob_and_outdegree(stats)
        _write_csv(
            os.path.join(args.out, "blobs.csv"),
            ("statistic", "estimate", "std_error", "target", "passed", "note"),
            [r.row() for r in reports],
        )
        outputs["blobs"] = "blobs.csv"
        all_pass &= all(r.passed for r in reports)
        for r in reports:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.estimate:.5g}")
    if args.contours:
        conts = []
        sampler = ExactConditionedSampler(fam, n) if args.method == "exact" else None
        reps = min(args.contours, args.replicates)
        for i in range(reps):
            if sampler is not None:
                tree = sampler.sample(RngStream(args.seed, 500_000 + i))
            else:
                tree = sample_conditioned_rejection(
                    fam, n, RngStream(args.seed, 500_000 + i), budget=budget
                )
            conts.append(contour_function(tree))
        grid = rescaled_contour(conts, 2.0 * cs / math.sqrt(n))
        rows = []
        for rep in range(grid.shape[0]):
            for j in range(grid.shape[1]):
                rows.append((j, grid[rep, j], rep))
        _write_csv(os.path.join(args.out, "contours.csv"),
                   ("grid_index", "value", "replicate_id"), rows)
        outputs["contours"] = "contours.csv"
    write_manifest(
        os.path.join(args.out, "manifest.json"),
        family=fam,
        seed=args.seed,
        stream_lo=0,
        stream_hi=args.replicates - 1,
        conditioning={"method": args.method, "n": n,
                      "lambda": [int(x) for x in fam.lam]},
        outputs=outputs,
        extra={"suite": args.suite, "all_pass": bool(all_pass)},
    )
    print("verify:", "PASS" if all_pass else "FAIL")
    return EXIT_OK if all_pass else 1


def cmd_tilt(args):
    fam = _load(args)
    direction = np.array(_csv_floats(args.direction))
    cond = _csv_ints(args.types) if args.types else None
    params = solve_tilt(fam, direction, cond_types=cond)
    tilted = tilt(fam, params)
    prof = spectral_profile(tilted)
    out = {
        "theta": params.theta.tolist(),
        "tilted_radius": prof.radius,
        "tilted_left_vector": prof.left_vec.tolist() if prof.left_vec is not None else None,
    }
    print(json.dumps(out, indent=2))
    if args.out:
        save_family(tilted, args.out)
        print(f"wrote tilted family to {args.out}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="bienayme",
        description="Critical multitype branching-tree simulation and verification",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(q):
        q.add_argument("--family", required=True,
                       help="family JSON path or preset name "
                            f"({', '.join(PRESET_NAMES)})")
        q.add_argument("--lambda", dest="lam", default=None,
                       help="override conditioning weights, CSV of ints")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--max-vertices", type=int, default=None)
        q.add_argument("--max-attempts", type=int, default=None)

    q = sub.add_parser("inspect", help="spectral profile and scaling constants")
    add_common(q)
    q.add_argument("--out", default=None, help="also write the JSON report here")
    q.set_defaults(fn=cmd_inspect)

    q = sub.add_parser("sample", help="write a tree batch and manifest")
    add_common(q)
    q.add_argument("--method", default="rejection",
                   choices=("rejection", "exact", "by-type", "unconditioned", "spine"))
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--replicates", type=int, default=1)
    q.add_argument("--out", required=True)
    q.add_argument("--types", default=None, help="CSV of conditioned types (by-type)")
    q.add_argument("--targets", default=None, help="CSV of exact counts (by-type)")
    q.add_argument("--ell", type=int, default=0, help="spine length (spine method)")
    q.add_argument("--force", action="store_true",
                   help="skip the feasibility pre-check")
    q.set_defaults(fn=cmd_sample)

    q = sub.add_parser("verify", help="run verification suites and emit CSVs")
    add_common(q)
    q.add_argument("--suite", default="all",
                   choices=("concentration", "tail", "gof", "blobs", "all"))
    q.add_argument("--method", default="exact", choices=("exact", "rejection"))
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--replicates", type=int, default=1000)
    q.add_argument("--out", required=True)
    q.add_argument("--ks-threshold", type=float, default=0.05)
    q.add_argument("--contours", type=int, default=0,
                   help="also export this many rescaled contour profiles")
    q.add_argument("--force", action="store_true")
    q.set_defaults(fn=cmd_verify)

    q = sub.add_parser("tilt", help="solve for criticality-restoring tilt parameters")
    add_common(q)
    q.add_argument("--direction", required=True,
                   help="CSV target for the left eigenvector direction")
    q.add_argument("--types", default=None,
                   help="CSV of conditioned types the direction refers to")
    q.add_argument("--out", default=None, help="write the tilted family JSON here")
    q.set_defaults(fn=cmd_tilt)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, NotCritical, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BudgetExhausted, Overflow, TruncationTooCoarse) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NoConvergence as exc:
        print(f"error: {exc} (residual {exc.residual})", file=sys.stderr)
        return EXIT_SOLVER
    except BienaymeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
