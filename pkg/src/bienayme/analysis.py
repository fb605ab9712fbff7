"""Empirical verification engine: feasibility lattice, concentration reports,
height tail curves, rescaled contour exports, and goodness of fit against the
continuum height reference.

Every pass/fail band is fixed by the caller before sampling (function
defaults are the pre-registered values); nothing is tuned after the data is
seen except the tail envelope's (C, c), which are explicitly fit parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import InsufficientData, MixedConditioning
from .excursion import height_reference_cdf, ks_statistic
from .flatlaw import blob_vector_sample

WILSON_Z = 1.959963984540054  # 95% band


# -- feasibility -----------------------------------------------------------------


@dataclass(frozen=True)
class FeasibleSizes:
    values: tuple  # feasible weighted sizes <= limit, ascending
    offset: int
    period: int
    provisional: bool  # reachable sets had not stabilized at the size cap

    def lattice_contains(self, n):
        """Whether n lies on the detected lattice at or above the first value."""
        if not self.values:
            return False
        if n in self.values:
            return True
        if n < self.values[0]:
            return False
        if self.period == 0:
            return False
        return (n - self.offset) % self.period == 0


def feasible_sizes(family, lam=None, limit=64, max_tree_size=None):
    """Weighted sizes achievable by positive-probability trees, up to `limit`.

    Dynamic programming on reachable weighted-size sets per root type,
    iterating a tree-size bound upward (default cap 4 * limit). If the sets
    are still growing at the cap the result is flagged provisional. The
    lattice (offset, period) is the gcd of pairwise differences.
    """
    lam = np.asarray(family.lam if lam is None else lam, dtype=np.int64)
    m = family.num_types
    if max_tree_size is None:
        max_tree_size = 4 * max(int(limit), 1)
    full_mask = (1 << (int(limit) + 1)) - 1
    reach = [0] * (m + 1)  # bitmask per type, 1-based; bit w = weight w reachable
    stabilized = False
    for _ in range(max_tree_size):
        prev = list(reach)
        for t in range(1, m + 1):
            law = family.law(t)
            acc_total = reach[t]
            for w, p in zip(law.words, law.probs):
                if p <= 0.0:
                    continue
                acc = 1 << int(lam[t - 1])
                dead = False
                for s in w:
                    child = prev[s]
                    if child == 0:
                        dead = True
                        break
                    combined = 0
                    rem = acc
                    shift = 0
                    while rem:
                        if rem & 1:
                            combined |= child << shift
                        rem >>= 1
                        shift += 1
                    acc = combined & full_mask
                    if acc == 0:
                        dead = True
                        break
                if not dead:
                    acc_total |= acc
            reach[t] = acc_total & full_mask
        if reach == prev:
            stabilized = True
            break
    mask = reach[1]
    values = tuple(w for w in range(int(limit) + 1) if (mask >> w) & 1)
    if not values:
        return FeasibleSizes((), 0, 0, not stabilized)
    if len(values) == 1:
        return FeasibleSizes(values, values[0], 0, not stabilized)
    diffs = [v - values[0] for v in values[1:]]
    period = 0
    for d in diffs:
        period = math.gcd(period, d)
    offset = values[0] % period if period else values[0]
    return FeasibleSizes(values, offset, period, not stabilized)


# -- report containers -------------------------------------------------------------


@dataclass(frozen=True)
class StatReport:
    name: str
    estimate: float
    std_error: float
    replicates: int
    target: float | None
    target_se: float = 0.0
    band: float = 4.0
    passed: bool = False
    note: str = ""

    def row(self):
        return (
            self.name,
            self.estimate,
            self.std_error,
            "" if self.target is None else self.target,
            int(self.passed),
            self.note,
        )


def _band_report(name, values, target, target_se=0.0, band=4.0, note=""):
    values = np.asarray(values, dtype=float)
    est = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(values.shape[0])) if values.shape[0] > 1 else 0.0
    tol = band * math.sqrt(se**2 + target_se**2)
    passed = abs(est - target) <= tol if tol > 0 else est == target
    return StatReport(name, est, se, values.shape[0], target, target_se, band, passed, note)


# -- flattened-law moment targets ----------------------------------------------------


@dataclass(frozen=True)
class FlatMomentTargets:
    """Monte-Carlo (or exact-table) targets for the flattened offspring law."""

    p_first: dict  # d -> (estimate, std error) of P(first coordinate = d)
    second_moment: tuple  # (estimate, std error) of E[first coordinate ^ 2]
    mean_vec: np.ndarray
    replicates: int

    @staticmethod
    def from_monte_carlo(family, gen, reps=100_000):
        vecs = blob_vector_sample(family, gen, reps)
        d = vecs[:, 0]
        p_first = {}
        for val in np.unique(d):
            ind = (d == val).astype(float)
            p_first[int(val)] = (
                float(ind.mean()),
                float(ind.std(ddof=1) / np.sqrt(reps)),
            )
        sq = d.astype(float) ** 2
        second = (float(sq.mean()), float(sq.std(ddof=1) / np.sqrt(reps)))
        return FlatMomentTargets(p_first, second, vecs.mean(axis=0), reps)

    @staticmethod
    def from_flat_law(law):
        """Exact targets from a completely materialized flattened law."""
        p = law.probs / law.probs.sum()
        d = law.vectors[:, 0]
        p_first = {}
        for val in np.unique(d):
            p_first[int(val)] = (float(p[d == val].sum()), 0.0)
        second = (float((p * d.astype(float) ** 2).sum()), 0.0)
        return FlatMomentTargets(p_first, second, (p[:, None] * law.vectors).sum(axis=0), 0)


# -- concentration -------------------------------------------------------------------


def _require_same_n(stats):
    ns = {s.n for s in stats}
    if len(ns) != 1:
        raise MixedConditioning(f"replicates mix conditioning sizes {sorted(ns)}")
    return ns.pop()


def concentration_report(
    stats,
    c1,
    targets,
    delta=0.1,
    min_rate=0.99,
    outdeg_factor=20.0,
    band=4.0,
):
    """Concentration checks on conditioned replicates.

    (i)   fraction of replicates with |#type-1 - n/c1| <= n^(1/2+delta);
    (ii)  per-d averages of N_d/n against P(first flat coordinate = d)/c1;
    (iii) largest flat outdegree <= outdeg_factor * ln n in every replicate;
    (iv)  c1 * sum_d d^2 N_d / n against the flat second moment;
    plus the blob-size coupling: largest blob <= largest outdegree + 1 always.
    """
    n = _require_same_n(stats)
    reps = len(stats)
    reports = []

    dev = np.array([abs(s.num_type1 - n / c1) for s in stats])
    rate = float((dev <= n ** (0.5 + delta)).mean())
    reports.append(
        StatReport(
            "type1_concentration_rate", rate, 0.0, reps, 1.0, 0.0, 0.0,
            rate >= min_rate, f"delta={delta}, min_rate={min_rate}",
        )
    )

    max_d = max(s.n_d.shape[0] for s in stats)
    nd = np.zeros((reps, max_d))
    for i, s in enumerate(stats):
        nd[i, : s.n_d.shape[0]] = s.n_d
    for d, (p_est, p_se) in sorted(targets.p_first.items()):
        if d >= max_d and p_est == 0.0:
            continue
        vals = nd[:, d] / n if d < max_d else np.zeros(reps)
        reports.append(
            _band_report(
                f"N_{d}_over_n", vals, p_est / c1, p_se / c1, band,
                note="flat offspring frequency / c1",
            )
        )

    max_out = np.array([s.max_outdeg_flat for s in stats])
    bound = outdeg_factor * math.log(n)
    reports.append(
        StatReport(
            "max_outdegree_rate", float((max_out <= bound).mean()), 0.0, reps,
            1.0, 0.0, 0.0, bool(np.all(max_out <= bound)),
            f"bound {outdeg_factor}*ln(n)={bound:.1f}",
        )
    )

    ds = np.arange(max_d, dtype=float)
    m2_vals = c1 * (nd * ds**2).sum(axis=1) / n
    m2_t, m2_se = targets.second_moment
    reports.append(
        _band_report("c1_sum_d2_Nd_over_n", m2_vals, m2_t, m2_se, band,
                     note="second moment of the flat offspring law")
    )

    blob_ok = all(s.max_blob_size <= s.max_outdeg_flat + 1 for s in stats)
    reports.append(
        StatReport(
            "blob_le_outdeg_plus_1", float(blob_ok), 0.0, reps, 1.0, 0.0, 0.0,
            blob_ok, "largest blob <= largest outdegree + 1 on every replicate",
        )
    )
    return reports


# -- height tails ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TailCurve:
    grid: np.ndarray
    survival: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    envelope_C: float
    envelope_c: float
    envelope: np.ndarray
    dominates: bool
    height_le_n_rate: float | None
    replicates: int

    def rows(self):
        for i in range(self.grid.shape[0]):
            yield (
                float(self.grid[i]), float(self.survival[i]), float(self.lo[i]),
                float(self.hi[i]), float(self.envelope[i]),
            )


def wilson_interval(k, n, z=WILSON_Z):
    """95% Wilson score interval for a binomial proportion."""
    k = np.asarray(k, dtype=float)
    p = k / n
    denom = 1.0 + z**2 / n
    center = (p + z**2 / (2 * n)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2))
    return np.clip(center - half, 0.0, 1.0), np.clip(center + half, 0.0, 1.0)


def tail_curve(
    stats,
    grid=None,
    min_exceedances=20,
    min_replicates=1000,
    all_weights_positive=False,
    undershoot_weight=2.0,
):
    """Empirical height survival with Wilson bands and a fitted tail envelope.

    Fits C (exp(-c x^2/n) + exp(-c x)) to the log-survival over the grid
    portion with at least min_exceedances exceedances; undershooting
    residuals are penalized (factor undershoot_weight) so the fit hugs the
    curve from above. Reports whether the envelope dominates the lower
    Wilson band everywhere on the grid.
    """
    if len(stats) < min_replicates:
        raise InsufficientData(f"need >= {min_replicates} replicates")
    n = _require_same_n(stats)
    h = np.array([s.height for s in stats], dtype=float)
    reps = h.shape[0]
    if grid is None:
        grid = np.linspace(0.0, max(h.max() * 1.1, 1.0), 64)
    grid = np.asarray(grid, dtype=float)
    exceed = (h[None, :] > grid[:, None]).sum(axis=1)
    surv = exceed / reps
    lo, hi = wilson_interval(exceed, reps)

    fit_sel = exceed >= min_exceedances
    x = grid[fit_sel]
    y = np.log(surv[fit_sel])

    def model(params, xs):
        logC, logc = params
        c = np.exp(logc)
        return logC + np.log(np.exp(-c * xs**2 / n) + np.exp(-c * xs))

    def resid(params):
        r = model(params, x) - y
        return r * np.where(r < 0, undershoot_weight, 1.0)

    fit = least_squares(resid, x0=np.array([0.0, 0.0]), max_nfev=2000)
    logC, logc = fit.x
    C, c = float(np.exp(logC)), float(np.exp(logc))
    envelope = np.minimum(C * (np.exp(-c * grid**2 / n) + np.exp(-c * grid)), 1.0)
    dominates = bool(np.all(envelope >= lo - 1e-12))
    frac = float((h <= n).mean()) if all_weights_positive else None
    return TailCurve(grid, surv, lo, hi, C, c, envelope, dominates, frac, reps)


# -- contour exports ----------------------------------------------------------------


def rescaled_contour(contours, scale, grid_points=1024):
    """Normalized contour profiles on a uniform grid.

    contours: sequence of integer contour arrays (lengths 2|t|-1); scale:
    multiplier applied to heights (e.g. 2 c_scal / sqrt(n) for the original
    tree, sqrt(c1 / n) for the reduced tree). Returns (reps, grid_points).
    """
    xs = np.linspace(0.0, 1.0, grid_points)
    out = np.empty((len(contours), grid_points))
    for i, cont in enumerate(contours):
        src = np.linspace(0.0, 1.0, len(cont))
        out[i] = np.interp(xs, src, cont) * scale
    return out


# -- goodness of fit -----------------------------------------------------------------


@dataclass(frozen=True)
class GofReport:
    ks: float
    replicates: int
    threshold: float
    passed: bool


def crt_height_gof(heights, c_scal, n, threshold, min_replicates=10_000):
    """KS distance between rescaled heights and the continuum height reference.

    The comparison uses the empirical law of (2 c_scal / sqrt(n)) * height
    against the CDF of twice the excursion maximum. The threshold is a fixed
    numeric band, not an asymptotic p-value: replicates are exchangeable but
    n is finite and the reference is only the limit law.
    """
    heights = np.asarray(heights, dtype=float)
    if heights.shape[0] < min_replicates:
        raise InsufficientData(f"need >= {min_replicates} replicates")
    vals = 2.0 * c_scal / math.sqrt(n) * heights
    ks = ks_statistic(vals, height_reference_cdf)
    return GofReport(ks, heights.shape[0], threshold, ks < threshold)


# -- extremes --------------------------------------------------------------------------


def largest_blob_and_outdegree(stats):
    """Per-replicate largest outdegree and largest blob, with the coupling check."""
    n = _require_same_n(stats)
    reps = len(stats)
    delta = np.array([s.max_outdeg_flat for s in stats], dtype=float)
    delta_blob = np.array([s.max_blob_size for s in stats], dtype=float)
    logn = math.log(max(n, 2))
    coupling = bool(np.all(delta_blob <= delta + 1))
    return [
        StatReport("max_outdegree_over_log_n", float((delta / logn).mean()),
                   float(delta.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0,
                   reps, None, 0.0, 0.0, True, "diagnostic"),
        StatReport("max_blob_over_log_n", float((delta_blob / logn).mean()),
                   float(delta_blob.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0,
                   reps, None, 0.0, 0.0, True, "diagnostic"),
        StatReport("blob_le_outdeg_plus_1", float(coupling), 0.0, reps, 1.0,
                   0.0, 0.0, coupling, "exact coupling bound"),
    ]
