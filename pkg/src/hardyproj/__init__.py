"""Numerical toolkit for contractive projections on Hardy spaces of the
unit circle: boundary-function FFT machinery, finite Blaschke products,
inner-outer factorization, conditional expectations by fiber averaging,
validated projection pairs with their isometries and projections, a
finite probability-space laboratory, and a deterministic scenario
runner."""

from .blaschke import (
    BlaschkeProduct,
    boundary_derivative_modulus,
    compose_zeros,
    divides,
    fibers,
    gcd,
)
from .circlefft import (
    DEFAULT_GRID,
    Exponent,
    GridFunction,
    SpectralFunction,
    analyze,
    eval_at_points,
    grid_points,
    hilbert,
    negative_energy,
    pnorm,
    riesz,
    synthesize,
)
from .condexp import (
    averaging_residual,
    condexp,
    fiber_sum_defect,
    measurability_residual,
    weighted_condexp,
    weighted_pnorm,
)
from .errors import (
    AliasingWarning,
    ConfigurationError,
    ConsistencyError,
    ContractViolation,
    DegenerateDivisionError,
    DegenerateWeightError,
    ModulusGuardError,
    NumericError,
    PairValidationError,
    ToolkitError,
)
from .factorize import OuterSpec, inner_outer_split, outer_from_modulus, outer_power
from .finitespace import (
    FinitePartition,
    FiniteSpace,
    condexp_matrix,
    lemma32_check,
    oracle_pnorm,
    sigma_from_functions,
    theorem31_probe,
)
from .pairs import (
    PairReport,
    ProjectionPair,
    canonical_inner_divisor,
    canonicalize,
    generator_from_spec,
    lift,
    make_pair,
    orthonormality_defect,
    validate_pair,
)
from .projector import (
    Certificate,
    Projection,
    aleksandrov_check,
    apply_P,
    apply_Pext,
    certify_contractive,
    counterexample_even,
    estimate_opnorm,
)

__version__ = "0.1.0"
