"""Exception hierarchy shared by all modules."""


class BienaymeError(Exception):
    """Base class for all package errors."""


class ConfigError(BienaymeError):
    """Malformed family file or run configuration; message carries the field path."""


class NotCritical(BienaymeError):
    """Operation requires a critical family (spectral radius 1 to working precision)."""


class NonConvergence(BienaymeError):
    """Power iteration failed to converge (pathological or nilpotent matrix)."""


class ReducibleCriticalBlock(BienaymeError):
    """The K x K critical block is reducible but the caller required irreducibility."""


class SingularSubcriticalBlock(BienaymeError):
    """I - M' is numerically singular; rho(M') is too close to 1."""


class DegenerateDirection(BienaymeError):
    """Tilt target direction has a zero coordinate."""


class NoConvergence(BienaymeError):
    """Tilt solver did not converge; the target direction may be unreachable."""

    def __init__(self, message, residual=None, theta=None):
        super().__init__(message)
        self.residual = residual
        self.theta = theta


class RootTypeError(BienaymeError):
    """Tree operation requires the root to have type 1."""


class DecorationMismatch(BienaymeError):
    """A decoration tree is not compatible with its vertex's child-type counts."""


class Inadmissible(BienaymeError):
    """Degree sequence fails the admissibility balance condition."""


class Infeasible(BienaymeError):
    """Requested conditioning event has probability zero (size not on the feasible lattice)."""


class BudgetExhausted(BienaymeError):
    """Attempt or vertex budget exhausted before producing a sample."""


class Overflow(BienaymeError):
    """Unconditioned growth exceeded the vertex budget; reported, never silently resampled."""


class TruncationTooCoarse(BienaymeError):
    """Stage-1 tables cannot cover the requested size at the configured expansion budget."""


class MixedConditioning(BienaymeError):
    """Replicates disagree on the conditioning they were generated under."""


class InsufficientData(BienaymeError):
    """Not enough replicates for the requested statistic."""
