"""Constructions of function pairs with prescribed growth near the unit circle.

The package builds lacunary Bloch and VMOA pairs and envelope-based growth
pairs for log-convex radial weights, evaluates them stably for radii
extremely close to 1, and certifies the two-sided bounds on grids.
"""

from growthbound.certify import (
    CertGrid,
    CertRecord,
    CertReport,
    Profile,
    certify_bloch,
    certify_growth,
    constants_check,
    little_o_profile,
)
from growthbound.coefficients import (
    CoeffSeq,
    NuSeq,
    hat_w_at_x,
    hat_w_eval,
    nu_coefficients,
    ru_coefficients,
    sequence_violations,
)
from growthbound.envelope import Envelope, EnvelopeReport, Segment, build_envelope, verify_envelope
from growthbound.errors import (
    ArgumentError,
    ConfigError,
    ConstructionError,
    DomainError,
    GrowthboundError,
    NumericalInstabilityError,
    PreconditionError,
)
from growthbound.series import (
    FunctionPair,
    SparseSeries,
    build_bloch_pair,
    build_growth_pair,
    build_vmoa_pair,
    eval_series,
    evaluate,
    evaluate_grid,
    log_abs_grid,
)
from growthbound.weights import (
    ConvexityReport,
    DecayFunction,
    RadialWeight,
    check_log_convex,
    eval_log_weight,
    eval_weight,
    normalize_decay,
)
from growthbound.zeros import ZeroReport, dominance_map, find_zeros, remove_common_zeros

__version__ = "0.1.0"
