"""Spectral analysis of the mean matrix: criticality, Perron vectors, scaling constants.

The mean matrix of a family with K critical and K' subcritical types has block
upper-triangular form [[M, S], [0, M']]. Criticality means rho(M) = 1; the
left eigenvector is extended onto the subcritical block by a' = a S (I - M')^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NonConvergence,
    NotCritical,
    ReducibleCriticalBlock,
    SingularSubcriticalBlock,
)
from .families import projection

CLASSIFY_TOL = 1e-9
SUBCRIT_TOL = 1e-10
RESIDUAL_TOL = 1e-10
POWER_TOL = 1e-12
POWER_MAX_ITERS = 200


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Spectral summary of a family's mean matrix."""

    mean_matrix: np.ndarray
    num_critical_types: int
    radius: float
    classification: str  # subcritical | critical | supercritical
    irreducible_on_critical_block: bool
    subcritical_block_ok: bool
    left_vec: np.ndarray | None = None  # length K + K'
    right_vec: np.ndarray | None = None  # length K

    @property
    def num_types(self):
        return self.mean_matrix.shape[0]

    def critical_block(self):
        K = self.num_critical_types
        return self.mean_matrix[:K, :K]

    def subcritical_block(self):
        K = self.num_critical_types
        return self.mean_matrix[K:, K:]

    def coupling_block(self):
        K = self.num_critical_types
        return self.mean_matrix[:K, K:]


def mean_matrix(family):
    """A[i, j] = expected number of type-(j+1) children of a type-(i+1) vertex."""
    m = family.num_types
    A = np.zeros((m, m))
    for i, law in enumerate(family.laws):
        for w, p in zip(law.words, law.probs):
            for s in w:
                A[i, s - 1] += p
    return A


def spectral_radius(A, max_iters=POWER_MAX_ITERS, tol=POWER_TOL):
    """Spectral radius of a nonnegative matrix by shifted power iteration.

    Iterating on A + I removes periodicity (rho(A + I) = rho(A) + 1 for
    nonnegative A), so the Rayleigh quotient converges for permutation-like
    matrices too. Raises NonConvergence if the quotient has not stabilized
    within the iteration cap, which also catches nilpotent matrices.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if np.any(A < 0):
        raise ValueError("matrix must be nonnegative")
    B = A + np.eye(n)
    v = np.ones(n) / np.sqrt(n)
    prev = np.inf
    for _ in range(max_iters):
        w = B @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise NonConvergence("power iteration collapsed (nilpotent or zero matrix)")
        v = w / norm
        rho = float(v @ (B @ v))
        if abs(rho - prev) < tol:
            return rho - 1.0
        prev = rho
    raise NonConvergence(f"power iteration did not stabilize in {max_iters} iterations")


def _strongly_connected(pattern):
    """Whether the boolean positivity pattern is strongly connected (transitive closure)."""
    n = pattern.shape[0]
    reach = pattern.astype(bool).copy()
    np.fill_diagonal(reach, True)
    for _ in range(max(1, int(np.ceil(np.log2(max(n, 2)))))):
        reach = reach | (reach.astype(np.int64) @ reach.astype(np.int64) > 0)
    return bool(reach.all())


def classify(A, K, require_irreducible=False):
    """Classify a mean matrix and check its block structure.

    The K x K critical block's irreducibility is decided exactly on the
    positivity pattern. Raises ReducibleCriticalBlock only if the caller
    required irreducibility.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    if A.shape != (m, m):
        raise ValueError("mean matrix must be square")
    irr = _strongly_connected(A[:K, :K] > 0.0)
    if require_irreducible and not irr:
        raise ReducibleCriticalBlock("critical block positivity pattern is reducible")
    rho = spectral_radius(A)
    if m > K:
        rho_sub = spectral_radius_or_zero(A[K:, K:])
        sub_ok = rho_sub < 1.0 - SUBCRIT_TOL
    else:
        sub_ok = True
    if abs(rho - 1.0) <= CLASSIFY_TOL:
        cls = "critical"
    elif rho < 1.0:
        cls = "subcritical"
    else:
        cls = "supercritical"
    A = A.copy()
    A.setflags(write=False)
    return SpectralProfile(A, K, rho, cls, irr, sub_ok)


def spectral_radius_or_zero(A):
    """spectral_radius, but a structurally nilpotent block reports 0 instead of raising."""
    try:
        return spectral_radius(A)
    except NonConvergence:
        return 0.0


def perron_vectors(profile):
    """Left and right 1-eigenvectors of a critical profile.

    Returns (a, b): a has length K + K' with sum(a[:K]) = 1 and
    a[K:] = a[:K] S (I - M')^{-1}; b has length K with sum(a[:K] * b) = 1.
    Residuals ||aA - a||_inf and ||Mb - b||_inf must be below 1e-10, which
    only holds for families critical to working precision.
    """
    if profile.classification != "critical":
        raise NotCritical(f"classification is {profile.classification}")
    if not profile.irreducible_on_critical_block:
        raise ReducibleCriticalBlock("Perron vectors need an irreducible critical block")
    K = profile.num_critical_types
    A = profile.mean_matrix
    M = profile.critical_block()
    a_crit = _unit_eigvec(M.T)
    a_crit = a_crit / a_crit.sum()
    b = _unit_eigvec(M)
    b = b / float(a_crit @ b)
    if profile.num_types > K:
        if not profile.subcritical_block_ok:
            raise SingularSubcriticalBlock("rho(M') is not below 1")
        Mp = profile.subcritical_block()
        S = profile.coupling_block()
        eye = np.eye(Mp.shape[0])
        try:
            a_sub = np.linalg.solve((eye - Mp).T, (a_crit @ S))
        except np.linalg.LinAlgError as exc:
            raise SingularSubcriticalBlock(str(exc)) from exc
        a = np.concatenate([a_crit, a_sub])
    else:
        a = a_crit
    res_a = float(np.max(np.abs(a @ A - a)))
    res_b = float(np.max(np.abs(M @ b - b)))
    if res_a > RESIDUAL_TOL or res_b > RESIDUAL_TOL:
        raise NotCritical(
            f"eigen residuals {res_a:.2e}/{res_b:.2e} exceed {RESIDUAL_TOL}; "
            "the family is not critical to working precision"
        )
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def _unit_eigvec(M):
    """Eigenvector of the eigenvalue closest to 1, made real and positive."""
    vals, vecs = np.linalg.eig(M)
    idx = int(np.argmin(np.abs(vals - 1.0)))
    v = np.real(vecs[:, idx])
    if v.sum() < 0:
        v = -v
    if np.any(v <= 0):
        # numerical dust on an irreducible block; clamp only true noise
        if np.min(v) < -1e-8 * np.max(np.abs(v)):
            raise NotCritical("Perron eigenvector has a significantly negative entry")
        v = np.maximum(v, 0.0)
    return v


def spectral_profile(family, require_irreducible=True):
    """Full profile of a family: classification plus Perron vectors."""
    A = mean_matrix(family)
    prof = classify(A, family.num_critical_types, require_irreducible=require_irreducible)
    if prof.classification != "critical":
        return prof
    a, b = perron_vectors(prof)
    return SpectralProfile(
        prof.mean_matrix,
        prof.num_critical_types,
        prof.radius,
        prof.classification,
        prof.irreducible_on_critical_block,
        prof.subcritical_block_ok,
        a,
        b,
    )


def q_matrices(projected, K):
    """Second factorial-moment matrices Q^(i) over the critical block.

    Q^(i)[j, j] = E[z_j (z_j - 1)] and Q^(i)[j, k] = E[z_j z_k] for j != k,
    where z is distributed as the projected law of type i+1, restricted to
    coordinates j, k <= K.
    """
    out = []
    for i in range(K):
        Q = np.zeros((K, K))
        for counts, p in projected.table(i + 1).items():
            z = counts[:K]
            for j in range(K):
                Q[j, j] += p * z[j] * (z[j] - 1)
                for k in range(K):
                    if k != j:
                        Q[j, k] += p * z[j] * z[k]
        Q.setflags(write=False)
        out.append(Q)
    return tuple(out)


def sigma2(a, b, Q):
    """Variance constant: sum over i,j,k <= K of a_i b_j b_k Q^(i)[j, k]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    K = b.shape[0]
    total = 0.0
    for i in range(K):
        total += a[i] * float(b @ Q[i] @ b)
    return total


def family_sigma2(family, profile=None):
    if profile is None:
        profile = spectral_profile(family)
    mu = projection(family)
    K = family.num_critical_types
    Q = q_matrices(mu, K)
    return sigma2(profile.left_vec[:K], profile.right_vec, Q)


def scaling_constant(family, mode="linear-combination", profile=None):
    """Distance-rescaling constant of the size-conditioned tree.

    linear-combination mode: (sigma/2) sqrt(sum_i lambda_i a_i), the constant
    for conditioning on the lambda-weighted size. by-type mode: sigma/2, the
    constant for conditioning on exact type counts; independent of lambda.
    """
    if profile is None:
        profile = spectral_profile(family)
    if profile.classification != "critical":
        raise NotCritical(f"classification is {profile.classification}")
    sig = np.sqrt(family_sigma2(family, profile))
    if mode == "by-type":
        return float(sig / 2.0)
    if mode != "linear-combination":
        raise ValueError(f"unknown mode {mode!r}")
    lam = np.asarray(family.lam, dtype=float)
    return float(sig / 2.0 * np.sqrt(float(lam @ profile.left_vec)))


def flattened_moments(family, profile=None):
    """Means of the flattened offspring counts and the weighted-size rate.

    Returns (means, c1) where means[i] = a_{i+1} / a_1 (so means[0] = 1) and
    c1 = sum_i lambda_i means[i]. Computed from the eigenvector identity, not
    from the flattened law itself.
    """
    if profile is None:
        profile = spectral_profile(family)
    if profile.classification != "critical":
        raise NotCritical(f"classification is {profile.classification}")
    a = profile.left_vec
    means = a / a[0]
    c1 = float(np.asarray(family.lam, dtype=float) @ means)
    means.setflags(write=False)
    return means, c1
