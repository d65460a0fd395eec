"""Flat portions on the boundary of the numerical range of small matrices."""

__version__ = "0.1.0"

from .boundary import (
    BoundarySample,
    BoundaryTrace,
    check_symmetry,
    extract_flats_geometric,
    sample_boundary,
)
from .family import (
    DomainError,
    FamilyParams,
    build_Ak,
    build_family_matrix,
    build_M,
    predicted_flats,
)
from .flatdetect import FlatPortion, FlatReport, analyze, flats_via_rotation_sweep
from .linalg import eig_hermitian, hermitian_parts, trace_words
from .nrpoly import TernaryQuartic, nr_poly_general, nr_poly_nilpotent
from .singularity import Singularity, find_real_singularities

__all__ = [
    "BoundarySample",
    "BoundaryTrace",
    "DomainError",
    "FamilyParams",
    "FlatPortion",
    "FlatReport",
    "Singularity",
    "TernaryQuartic",
    "analyze",
    "build_Ak",
    "build_M",
    "build_family_matrix",
    "check_symmetry",
    "eig_hermitian",
    "extract_flats_geometric",
    "find_real_singularities",
    "flats_via_rotation_sweep",
    "hermitian_parts",
    "nr_poly_general",
    "nr_poly_nilpotent",
    "predicted_flats",
    "sample_boundary",
    "trace_words",
]
