"""Finite-dimensional Hilbert-space operator toolkit."""

from .basis import BasisSet, ExpansionResult, expand, gram_schmidt, reconstruct, to_cartesian_coords
from .kernels import (DiscretizedOperator, GridSpec, Helmholtz1D, Tabulated, discretize,
                      helmholtz1d, load_kernel_samples, make_weighted_space, write_kernel_samples)
from .operators import (OperatorMatrix, TruncationCertificate, adjoint, apply, assemble, compose,
                        hs_norm, identity_op, is_hermitian, outer, sup_norm_estimate, truncate)
from .spaces import (Cartesian, DiagonalWeighted, OperatorWeighted, SpaceHandle, Transformed,
                     inner, metric, norm, validate_space)
from .spectral import (EigenDecomposition, hermitian_eig, spectral_reconstruct,
                       verify_eigen_properties)
from .svd import (SvdResult, sum_rule_check, svd, svd_reconstruct, to_factored_form,
                  verify_svd_properties)

__version__ = "0.1.0"
