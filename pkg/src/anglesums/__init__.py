"""Expected angle sums of Gaussian polytopes, random-walk hulls and Gaussian projections.

Closed forms live in :mod:`anglesums.theory`; Monte Carlo counterparts are
built from :mod:`anglesums.geometry`, :mod:`anglesums.cones` and
:mod:`anglesums.models`, and compared in :mod:`anglesums.harness`.
"""

from .combinatorics import binomial, harmonic, lah, stirling_first, stirling_second
from .cones import (
    AngleEstimate,
    conic_intrinsic_volumes_mc,
    crofton_consistency,
    grassmann_angle_mc,
    solid_angle_mc,
)
from .errors import (
    AngleSumsError,
    DegenerateInput,
    GeneralPositionViolation,
    GPViolation,
    InternalInconsistency,
    PhiOverflow,
    ToleranceNotMet,
)
from .geometry import Polytope, PolyCone, convex_hull, f_vector, face_lattice, normal_cone, tangent_cone
from .harness import (
    ComparisonRow,
    ExperimentConfig,
    emit_tables,
    run_affine_invariance,
    run_experiment,
    run_projection_theorem,
    verify_identities,
)
from .simplex_angles import external_angle_sum, internal_angle_sum
from .theory import TheoryValue

__version__ = "0.1.0"
