"""Weighted composition operators on Bloch-type spaces of the disk, ball and polydisk.

Evaluates and classifies operators f -> psi * (f o phi): boundedness and
compactness on the Bloch space, two-sided operator-norm bounds, and the
corresponding questions for the operator viewed into the bounded holomorphic
functions.  Hot expression kernels run in a compiled extension when available,
with a vectorised numpy fallback selected at import time.
"""

from .backends import active_backend, compiled_available
from .blochspace import OmegaValue, beta_sup, bloch_norm, hinf_sup, little_bloch_decay, omega, q_f
from .domains import (
    DomainError,
    DomainSpec,
    ball,
    bergman_distance_origin,
    boundary_gap,
    disk,
    metric_form,
    polydisk,
    sample,
)
from .engine import EngineError, LimsupEstimate, SupConfig, SupEstimate, shell_limsup, sup_estimate
from .expr import (
    Jet,
    ParseError,
    ScalarMap,
    SelfMap,
    SingularityError,
    eval_jet,
    jacobian,
    parse,
    self_map_check,
    to_source,
)
from .operators import (
    Classification,
    HinfReport,
    NormBounds,
    PointwiseFields,
    SymbolPair,
    b_phi,
    classify_bounded,
    classify_compact,
    direct_norm_lower,
    hinf_target_report,
    norm_bounds,
    pointwise_fields,
    t_phi_lower,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "DomainSpec",
    "disk",
    "ball",
    "polydisk",
    "metric_form",
    "bergman_distance_origin",
    "boundary_gap",
    "sample",
    "ParseError",
    "SingularityError",
    "ScalarMap",
    "SelfMap",
    "Jet",
    "parse",
    "to_source",
    "eval_jet",
    "jacobian",
    "self_map_check",
    "SupConfig",
    "SupEstimate",
    "LimsupEstimate",
    "EngineError",
    "sup_estimate",
    "shell_limsup",
    "OmegaValue",
    "q_f",
    "beta_sup",
    "bloch_norm",
    "hinf_sup",
    "omega",
    "little_bloch_decay",
    "SymbolPair",
    "PointwiseFields",
    "Classification",
    "NormBounds",
    "HinfReport",
    "b_phi",
    "t_phi_lower",
    "pointwise_fields",
    "classify_bounded",
    "classify_compact",
    "norm_bounds",
    "direct_norm_lower",
    "hinf_target_report",
    "active_backend",
    "compiled_available",
    "__version__",
]
