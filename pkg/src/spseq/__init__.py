"""Exact computations with spectral sequences over F_p and Q."""

from .bigraded import BigradedMap, BigradedModule, RComplex, Report, homology
from .errors import (
    DimensionMismatch,
    DocumentSyntaxError,
    InternalInvariantViolation,
    InvalidObject,
    NonChainMap,
    NotAMorphism,
    NotASurjection,
    RelationViolation,
    SpseqError,
    UnsupportedGenerator,
)
from .linalg import Field, get_field, use_field
from .spectral import (
    SpectralMorphism,
    SpectralSequence,
    derive_morphism,
    find_isomorphism,
    hom_space,
    is_acyclic_r_fibration,
    is_Er_quasi_iso,
    is_r_fibration,
    is_surjection,
    product,
    pullback_surjection,
    ring,
    validate_spectral_sequence,
)
from .paths import (
    RHomotopy,
    find_r_homotopy,
    is_r_homotopy,
    lambda_,
    mapping_path_space,
    path,
    path_contraction,
)
from .representables import acyclic_rfib_via_rlp, disk, has_rlp, rfib_via_rlp, sphere, varphi
from .filtered import FilteredComplex, FilteredMorphism, e_of_morphism, spectral_sequence
from .multicomplex import MultiMorphism, Multicomplex, eprime, mc_path, tot
from .document import dumps, loads

__version__ = "0.1.0"
