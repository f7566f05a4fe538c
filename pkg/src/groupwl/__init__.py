"""Weisfeiler-Leman experiments on finite groups given by Cayley tables."""

from .constructors import (AbelianGroup, abelian, alternating, cyclic, dicyclic, dihedral,
                           direct_product, quaternion, scalar_action, semidirect, symmetric,
                           theorem_family)
from .errors import GroupWLError
from .group_core import Group, marked_equivalent, permuted_copy, validate_cayley
from .iso import IsoResult, abelian_isomorphic, oracle_isomorphic, wl_pipeline

__version__ = "0.1.0"

__all__ = [
    "AbelianGroup", "Group", "GroupWLError", "IsoResult", "abelian", "abelian_isomorphic",
    "alternating", "cyclic", "dicyclic", "dihedral", "direct_product", "marked_equivalent",
    "oracle_isomorphic", "permuted_copy", "quaternion", "scalar_action", "semidirect",
    "symmetric", "theorem_family", "validate_cayley", "wl_pipeline",
]
