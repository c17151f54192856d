"""Workbench for vectors of multiple Wiener-Ito integrals on R^N.

Exact kernel calculus (contractions, products, squared covariances),
reproducible simulation, and asymptotic-independence diagnostics for
chaotic vectors, with deterministic kernel sequence families to exercise
the vanishing-contraction criterion at desk scale.
"""

from .chaos import (
    ChaosElement,
    ChaosExpansion,
    contraction_norms,
    cov_squares,
    evaluate,
    isserlis_moment,
    multiply,
    normalize,
    variance,
)
from .exceptions import (
    DegenerateInputError,
    InvalidKernelError,
    ResourceLimitError,
    ValidationError,
    WienerChaosError,
)
from .hermite import HermiteEvaluator, hermite, hermite_all
from .independence import (
    ChaosVector,
    IndependenceReport,
    TestFunction,
    bound_ratio,
    criterion_check,
    default_dictionary,
    empirical_dependence,
    squared_cov_matrix,
)
from .montecarlo import GENERATOR_TAG, SampleBatch, estimate, sample
from .sequences import (
    FamilySpec,
    generate,
    load_kernel,
    load_vector,
    save_kernel,
    save_vector,
)
from .tensor import (
    HilbertSpace,
    RawTensor,
    SymmetricTensor,
    contract,
    contract_sym,
    inner,
    multiplicity,
    symmetrize,
)

__version__ = "0.1.0"

__all__ = [
    "ChaosElement",
    "ChaosExpansion",
    "ChaosVector",
    "DegenerateInputError",
    "FamilySpec",
    "GENERATOR_TAG",
    "HermiteEvaluator",
    "HilbertSpace",
    "IndependenceReport",
    "InvalidKernelError",
    "RawTensor",
    "ResourceLimitError",
    "SampleBatch",
    "SymmetricTensor",
    "TestFunction",
    "ValidationError",
    "WienerChaosError",
    "bound_ratio",
    "contract",
    "contract_sym",
    "contraction_norms",
    "cov_squares",
    "criterion_check",
    "default_dictionary",
    "empirical_dependence",
    "estimate",
    "evaluate",
    "generate",
    "hermite",
    "hermite_all",
    "inner",
    "isserlis_moment",
    "load_kernel",
    "load_vector",
    "multiplicity",
    "multiply",
    "normalize",
    "sample",
    "save_kernel",
    "save_vector",
    "squared_cov_matrix",
    "symmetrize",
    "variance",
    "__version__",
]
