"""Numerics for the three-mode heteronuclear atom-molecule condensate model."""
from .exceptions import (
    BetheError,
    CouplingError,
    DegenerateGroundStateError,
    DomainError,
    MolbecError,
    SectorError,
)
from .model import (
    AbcCoefficients,
    ModelParams,
    Sector,
    SemiclassicalCouplings,
    abc_coefficients,
    hopping,
    sector_new,
    semiclassical_couplings,
    u_diag,
)
from .spectral import (
    QuantumState,
    SpectralDecomposition,
    TridiagonalOperator,
    build_tridiagonal,
    char_poly_eval,
    eigendecompose,
    ground_state,
)

__version__ = "0.1.0"

__all__ = [
    "AbcCoefficients",
    "BetheError",
    "CouplingError",
    "DegenerateGroundStateError",
    "DomainError",
    "ModelParams",
    "MolbecError",
    "QuantumState",
    "Sector",
    "SectorError",
    "SemiclassicalCouplings",
    "SpectralDecomposition",
    "TridiagonalOperator",
    "abc_coefficients",
    "build_tridiagonal",
    "char_poly_eval",
    "eigendecompose",
    "ground_state",
    "hopping",
    "sector_new",
    "semiclassical_couplings",
    "u_diag",
    "__version__",
]
