"""Simulation and verification toolkit for critical multitype branching trees.

Computes spectral scaling constants exactly, samples size-conditioned trees
exactly (cycle-lemma construction) and by rejection, implements the
flatten/reduce/blow-up operations, and statistically verifies concentration,
height-tail, and continuum-limit predictions at desk scale.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BienaymeError,
    BudgetExhausted,
    ConfigError,
    DecorationMismatch,
    DegenerateDirection,
    Inadmissible,
    Infeasible,
    InsufficientData,
    MixedConditioning,
    NoConvergence,
    NonConvergence,
    NotCritical,
    Overflow,
    ReducibleCriticalBlock,
    RootTypeError,
    SingularSubcriticalBlock,
    TruncationTooCoarse,
)
from .families import (  # noqa: F401
    OffspringFamily,
    OffspringLaw,
    ProjectedLaw,
    load_family,
    load_preset,
    projection,
    save_family,
)
from .flatlaw import FlatLaw, materialize_flat_law  # noqa: F401
from .rng import RngStream, SampleBudget  # noqa: F401
from .samplers import (  # noqa: F401
    ExactConditionedSampler,
    MarkedFlatTree,
    TreeStats,
    sample_by_type,
    sample_conditioned_exact,
    sample_conditioned_rejection,
    sample_decoration,
    sample_degree_sequence_tree,
    sample_spine_tree,
    sample_unconditioned,
)
from .spectral import (  # noqa: F401
    SpectralProfile,
    classify,
    family_sigma2,
    flattened_moments,
    mean_matrix,
    perron_vectors,
    q_matrices,
    scaling_constant,
    sigma2,
    spectral_profile,
)
from .tilting import TiltParams, solve_tilt, tilt, tilted_mean_matrix  # noqa: F401
from .trees import (  # noqa: F401
    Blobs,
    Decoration,
    DegreeSequence,
    DistanceIndex,
    FlatTree,
    MultitypeTree,
    PlaneTree,
    blobs,
    blow_up,
    contour_function,
    degree_sequence,
    flatten,
    height_function,
    induced_decoration,
    n_d_counts,
    reduce_tree,
    type_counts,
    weighted_size,
)
