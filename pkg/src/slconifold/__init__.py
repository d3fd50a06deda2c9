"""Spectral and deformation-theoretic invariants of special Lagrangian conifolds."""

from .errors import (
    CompletenessWarning,
    ConifoldError,
    ConvergenceError,
    CrossCheckError,
    CutoffInsufficientError,
    ExceptionalRateError,
    InconsistentTopologyError,
    InvalidInputError,
    StabilityViolationError,
)
from .moduli import (
    ConeData,
    ModuliReport,
    cross_check,
    moduli_dim_AC,
    moduli_dim_compact,
    moduli_dim_CS,
    moduli_dim_CSAC,
    obstruction_dim_stable,
    slice_dim,
    stability_check,
)
from .scenario import parse_config, render, run
from .spectra import (
    Explicit,
    FlatTorus,
    LinkDescriptor,
    MeshLink,
    RoundSphere,
    Spectrum,
    resolve_link,
    sphere_spectrum,
    torus_spectrum,
)
from .topology import ConifoldTopology, decomposition_block_dims, validate
from .weights import (
    ConeEnd,
    exceptional_set,
    fredholm_data,
    index_jump,
    is_exceptional,
)

__version__ = "0.1.0"

__all__ = [
    "parse_config",
    "render",
    "run",
    "ConifoldTopology",
    "decomposition_block_dims",
    "validate",
    "CompletenessWarning",
    "ConifoldError",
    "ConvergenceError",
    "CrossCheckError",
    "CutoffInsufficientError",
    "ExceptionalRateError",
    "InconsistentTopologyError",
    "InvalidInputError",
    "StabilityViolationError",
    "ConeData",
    "ModuliReport",
    "cross_check",
    "moduli_dim_AC",
    "moduli_dim_compact",
    "moduli_dim_CS",
    "moduli_dim_CSAC",
    "obstruction_dim_stable",
    "slice_dim",
    "stability_check",
    "Explicit",
    "FlatTorus",
    "LinkDescriptor",
    "MeshLink",
    "RoundSphere",
    "Spectrum",
    "resolve_link",
    "sphere_spectrum",
    "torus_spectrum",
    "ConeEnd",
    "exceptional_set",
    "fredholm_data",
    "index_jump",
    "is_exceptional",
]
