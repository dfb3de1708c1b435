"""Phaseless sampling in spline spaces with arbitrary knots.

Decide whether a finite point set determines spline functions (linearly, or
from unsigned samples), recover ``|f|^2`` linearly from its samples, and
construct pairs of functions with equal moduli when the conditions fail.
"""

from .config import default_rtol
from .errors import (
    ConditionsViolated,
    DegenerateChoice,
    IllConditioned,
    IndexOutOfRange,
    InvalidMultiplicity,
    KnotSystemError,
    NonIncreasingKnots,
    OutOfWindow,
    PaddingInsufficient,
    PreconditionViolated,
    RankDeficient,
    SizeMismatch,
    SplinePhaseError,
    UnknownPair,
    WitnessNotFound,
)
from .knot_core import (
    BasisAtlas,
    IndexPair,
    KnotSystem,
    Window,
    bspline_basis,
    bspline_value,
    build_atlas,
    format_rational,
    pad_system,
    to_rational,
    uniform_system,
)
from .reconstruction import (
    CollocationMatrix,
    ReconstructionOperator,
    build_reconstructor,
    collocation_matrix,
    kernel_values,
    reconstruct,
    sw_invertible,
)
from .sampling_conditions import (
    ConditionReport,
    SampleSet,
    Violation,
    cardinality_bound,
    check_linear_squared,
    check_linear_V,
    check_phaseless_V,
    find_sampled_subwindow,
    minimal_sequence,
)
from .spline_space import SeparabilityReport, SplineFunction, evaluate, separability_split, space_dimension
from .squared_space import SquaredBasis, evaluate_product, product_basis, square_function, squared_dimension, tilde_system
from .witnesses import Verification, WitnessPair, complex_counterexample, real_ambiguity_witness, verify_witness

__version__ = "0.1.0"
