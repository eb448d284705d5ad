"""Operator quantum error correction toolkit.

Interaction algebras and their block structure, generalised noiseless
subsystems, standard and unified correctability conditions, recovery
construction and conversion of correctable triples into standard codes.
"""

from .algebra import (
    AlgebraStructure,
    OperatorAlgebra,
    commutant,
    decompose_structure,
    fixed_points,
    generate_interaction_algebra,
    noise_commutant_blocks,
)
from .correction import (
    CorrectableTriple,
    LambdaTensor,
    build_standard_recovery,
    check_correctable_triple,
    check_standard_condition,
    check_unified_condition,
    convert_to_standard,
    theorem2_necessity_audit,
    transform_lambda,
)
from .matrix_core import (
    DEFAULT_ATOL,
    QuantumChannel,
    apply_channel,
    compose,
    is_unital,
    kraus_equivalence,
    random_channel,
    validate_channel,
)
from .subsystems import (
    MatrixUnitFamily,
    SubsystemDecomposition,
    build_decomposition,
    check_ns,
    check_theorem1,
    find_noiseless_subsystems,
    gamma_map,
    partial_trace_a,
)
from .zoo import Fixture, fixture

__version__ = "0.1.0"
