"""Ellipticity and coercivity analysis of laminated linear-elastic composites."""

from .tensors import (DegenerateLayerError, ElasticTensor, InvalidInputError, IsotropicPhase,
                      LaminateProfile, iso_tensor, two_phase_profile)
from .ellipticity import EllipticityReport, alpha_se_numeric, alpha_vse_numeric
from .lamination import LaminateModuli, laminate_general, laminate_isotropic_pair
from .translation import TranslationCertificate, certify_weak_coercivity, search_diagonal_D
from .cell_oracle import homogenize_numeric, solve_cell_1d
from .coercivity import lambda_per_sufficient, rank1_loss_certificate
from .gutierrez import GutierrezParameters, refine, select_parameters, verify_construction

__version__ = "0.1.0"
