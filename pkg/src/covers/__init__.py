"""Admissible double covers of trees, sum-over-graphs Euler characteristics and graph complexes."""

__version__ = "0.1.0"

from .abelian import AbelianGroup
from .errors import CacheMismatch, CoversError, InputError, InvariantViolation
from .eulersum import compute_hG, compute_hg, tree_contribution
from .graphs import HalfEdgeGraph, canonical_code
from .symfunc import SymLaurent, egf_values, expand_to_degree, interpolate_Fn, specialize_egf
from .trees import TreeFamilySpec, enumerate_trees

__all__ = [
    "AbelianGroup",
    "CacheMismatch",
    "CoversError",
    "HalfEdgeGraph",
    "InputError",
    "InvariantViolation",
    "SymLaurent",
    "TreeFamilySpec",
    "canonical_code",
    "compute_hG",
    "compute_hg",
    "egf_values",
    "enumerate_trees",
    "expand_to_degree",
    "interpolate_Fn",
    "specialize_egf",
    "tree_contribution",
]
