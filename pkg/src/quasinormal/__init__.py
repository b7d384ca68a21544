"""Quasinormality classes, spherical polar decomposition, Koszul complexes and
normal extensions for tuples of commuting matrices.

The classifier itself lives at ``quasinormal.classify.classify``."""

from .classify import (ClassificationReport, hyponormal_check,
                       is_pure, is_spherically_qn, kernel_inclusion_residual,
                       normal_part_subspace, spherically_quasinormal_via)
from .core import (DEFAULT_TOL, OperatorTuple, SubspaceBasis, Tolerance,
                   adjoint_tuple, circ_product, is_commuting, pointwise_product,
                   power_circ, power_pointwise)
from .extension import (dual_tuple, extension_report,
                        invertibility_equivalence_check, split_extension,
                        theta_block_check)
from .koszul import (build_koszul, homology, joint_eigenvalues,
                     taylor_invertible, taylor_spectrum_grid)
from .models import gallery, gallery_entry, truncated_multishift
from .polar import spherical_polar
from .theta import spectral_resolution, theta_apply, theta_identity

__version__ = "0.1.0"
