"""Lab for 2-isometries and Brownian unitaries on sequence spaces.

Operators are lazy band operators on countable orthonormal bases; every
identity check is an exact column evaluation over the first ``depth``
basis vectors.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .basis import BasisLabel, SparseVector, basis_vector, gram_schmidt, inner, label
from .certify import (
    Certificate,
    CovarianceInterval,
    NormInterval,
    brownian_certificate,
    covariance_bounds,
    norm_bound,
    two_isometry_residual,
)
from .converge import ConvergenceReport, covariance_track, default_probes, deviation_profile
from .families import (
    FamilyHandle,
    bishop_approximant,
    brownian_extension,
    canonical_brownian,
    clidr_two_isometry,
    js01_shift,
    power_envelope,
    prz1_family,
    przew2_family,
    sslnv_family,
)
from .operators import (
    Operator,
    adjoint,
    block_upper,
    compose,
    compress,
    identity,
    oplus,
    restrict,
    shift,
    weighted_shift,
)
from .spaces import LeafSpace, Subspace, SumSpace

__all__ = [
    "BasisLabel", "SparseVector", "basis_vector", "gram_schmidt", "inner", "label",
    "Certificate", "CovarianceInterval", "NormInterval", "brownian_certificate",
    "covariance_bounds", "norm_bound", "two_isometry_residual",
    "ConvergenceReport", "covariance_track", "default_probes", "deviation_profile",
    "FamilyHandle", "bishop_approximant", "brownian_extension", "canonical_brownian",
    "clidr_two_isometry", "js01_shift", "power_envelope", "prz1_family", "przew2_family",
    "sslnv_family", "Operator", "adjoint", "block_upper", "compose", "compress", "identity",
    "oplus", "restrict", "shift", "weighted_shift", "LeafSpace", "Subspace", "SumSpace",
    "__version__",
]
