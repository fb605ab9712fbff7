"""Exponential tilting of offspring families and the criticality tilt solver.

Tilting reweights every word w of type i by exp(sum_j theta_j #_j w) and
renormalizes per type. It commutes with the mean matrix: the tilted mean
matrix equals e^{theta_j} d(log phi_i)/d(z_j) evaluated at e^theta, where
phi_i is the type-i generating function. Conditioning on exact type counts
over a set I is invariant under tilts whose parameters satisfy
e^{theta_j} = phi_j(e^theta) for every type j outside I.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection, NoConvergence, NotCritical
from .families import OffspringFamily, OffspringLaw, count_vector
from .spectral import classify, mean_matrix, perron_vectors

TILT_RADIUS_TOL = 1e-10
TILT_DIRECTION_TOL = 1e-8
FD_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class TiltParams:
    """Tilt exponents, one per type."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)


def _word_counts_matrix(law, num_types):
    return np.array([count_vector(w, num_types) for w in law.words], dtype=float)


def tilt(family, params):
    """Reweight each word by exp(theta . counts) and renormalize per type."""
    theta = params.theta if isinstance(params, TiltParams) else np.asarray(params, float)
    m = family.num_types
    if theta.shape != (m,):
        raise ValueError(f"theta must have length {m}")
    laws = []
    for law in family.laws:
        counts = _word_counts_matrix(law, m)
        logw = np.log(law.probs, where=law.probs > 0, out=np.full(len(law.words), -np.inf))
        logw = logw + counts @ theta
        logw -= logw.max()
        w = np.exp(logw)
        probs = w / w.sum()
        laws.append(
            OffspringLaw(
                law.words,
                probs,
                tail_mass_bound=law.tail_mass_bound,
                renormalized=True,
            )
        )
    return OffspringFamily(
        family.num_critical_types,
        family.num_subcritical_types,
        tuple(laws),
        family.lam,
        name=family.name,
    )


def tilted_mean_matrix(family, theta):
    """Mean matrix of the tilted family via the generating-function formula.

    Evaluates e^{theta_j} (d phi_i / d z_j)(e^theta) / phi_i(e^theta) directly
    on the word support, without constructing the tilted family.
    """
    theta = np.asarray(theta, dtype=float)
    m = family.num_types
    A = np.zeros((m, m))
    for i, law in enumerate(family.laws):
        counts = _word_counts_matrix(law, m)
        logw = np.log(law.probs, where=law.probs > 0, out=np.full(len(law.words), -np.inf))
        logw = logw + counts @ theta
        shift = logw.max()
        w = np.exp(logw - shift)
        phi = w.sum()
        A[i, :] = (w @ counts) / phi
    return A


def log_phi(family, theta):
    """log phi_i(e^theta) for every type i (vector of per-type normalizers)."""
    theta = np.asarray(theta, dtype=float)
    m = family.num_types
    out = np.empty(m)
    for i, law in enumerate(family.laws):
        counts = _word_counts_matrix(law, m)
        logw = np.log(law.probs, where=law.probs > 0, out=np.full(len(law.words), -np.inf))
        logw = logw + counts @ theta
        shift = logw.max()
        out[i] = shift + np.log(np.exp(logw - shift).sum())
    return out


def _dominant_left_direction(A):
    """Dominant left eigenvector of A, made nonnegative (solver internal)."""
    vals, vecs = np.linalg.eig(A.T)
    v = np.abs(np.real(vecs[:, int(np.argmax(np.real(vals)))]))
    return v


def _residual(family, theta, target, cond_types):
    """Residual vector of the tilt equations.

    Components: rho(A^theta) - 1; direction mismatch of the left eigenvector
    restricted to cond_types against the target (one redundant component
    dropped); and, for types outside cond_types, the conditional-law
    invariance constraints theta_j - log phi_j(e^theta) = 0.
    """
    A = tilted_mean_matrix(family, theta)
    K = family.num_critical_types
    prof = classify(A, K)
    parts = [prof.radius - 1.0]
    if len(cond_types) > 1:
        v = _dominant_left_direction(A)
        sub = np.array([v[t - 1] for t in cond_types])
        s = sub.sum()
        sub = sub / s if s > 0 else np.full(len(cond_types), 1.0 / len(cond_types))
        tgt = target / target.sum()
        parts.extend((sub - tgt)[:-1])
    free = [j for j in range(1, family.num_types + 1) if j not in cond_types]
    if free:
        lp = log_phi(family, theta)
        parts.extend(theta[j - 1] - lp[j - 1] for j in free)
    return np.array(parts, dtype=float)


def solve_tilt(family, target, cond_types=None, max_iters=120, restarts=6, seed=0):
    """Find tilt parameters making the family critical with a prescribed direction.

    target is a strictly positive vector over cond_types (default: all types);
    on success the tilted family has |rho - 1| < 1e-10 and its normalized left
    eigenvector restricted to cond_types is collinear with target within
    relative error 1e-8. Damped Newton with a central finite-difference
    Jacobian and multi-start fallback; raises NoConvergence with the best
    residual otherwise.
    """
    m = family.num_types
    if cond_types is None:
        cond_types = tuple(range(1, m + 1))
    cond_types = tuple(cond_types)
    target = np.asarray(target, dtype=float)
    if target.shape != (len(cond_types),):
        raise ValueError("target length must match the conditioned type set")
    if np.any(target <= 0):
        raise DegenerateDirection("target direction must be strictly positive")

    rng = np.random.default_rng(seed)
    best = (np.inf, None)
    starts = [np.zeros(m)]
    starts += [rng.normal(scale=0.5 * (1 + k // 2), size=m) for k in range(restarts)]
    for theta0 in starts:
        theta, res_norm = _newton(family, theta0, target, cond_types, max_iters)
        if res_norm < best[0]:
            best = (res_norm, theta)
        if theta is not None and _accepts(family, theta, target, cond_types):
            return TiltParams(theta)
    raise NoConvergence(
        f"tilt solver residual {best[0]:.3e}; target direction may be unreachable",
        residual=best[0],
        theta=best[1],
    )


def _newton(family, theta0, target, cond_types, max_iters):
    theta = np.asarray(theta0, dtype=float).copy()
    r = _residual(family, theta, target, cond_types)
    norm = float(np.linalg.norm(r))
    for _ in range(max_iters):
        if norm < 1e-13:
            break
        J = _fd_jacobian(family, theta, target, cond_types)
        try:
            step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        except np.linalg.LinAlgError:
            break
        # damping: halve until the residual decreases
        t = 1.0
        improved = False
        for _ in range(30):
            cand = theta + t * step
            rc = _residual(family, cand, target, cond_types)
            nc = float(np.linalg.norm(rc))
            if nc < norm:
                theta, r, norm = cand, rc, nc
                improved = True
                break
            t *= 0.5
        if not improved:
            break
    return theta, norm


def _fd_jacobian(family, theta, target, cond_types):
    r0 = _residual(family, theta, target, cond_types)
    J = np.zeros((r0.shape[0], theta.shape[0]))
    for j in range(theta.shape[0]):
        hp = theta.copy()
        hm = theta.copy()
        hp[j] += FD_STEP
        hm[j] -= FD_STEP
        J[:, j] = (
            _residual(family, hp, target, cond_types)
            - _residual(family, hm, target, cond_types)
        ) / (2 * FD_STEP)
    return J


def _accepts(family, theta, target, cond_types):
    A = tilted_mean_matrix(family, theta)
    K = family.num_critical_types
    prof = classify(A, K)
    if abs(prof.radius - 1.0) >= TILT_RADIUS_TOL:
        return False
    if prof.classification != "critical":
        return False
    try:
        a, _ = perron_vectors(prof)
    except NotCritical:
        return False
    sub = np.array([a[t - 1] for t in cond_types])
    sub = sub / sub.sum()
    tgt = target / target.sum()
    if np.max(np.abs(sub - tgt) / tgt) >= TILT_DIRECTION_TOL:
        return False
    free = [j for j in range(1, family.num_types + 1) if j not in cond_types]
    if free:
        lp = log_phi(family, theta)
        if any(abs(theta[j - 1] - lp[j - 1]) >= 1e-9 for j in free):
            return False
    return True
