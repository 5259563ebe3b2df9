"""Direct sampling and certification of nonclassicality quasiprobability
matrices for hybrid CV/DV optical states from two-mode homodyne data."""

from .analysis import (NqpMatrixField, SignificanceReport, assemble_field,
                       conditional_distribution, eigenvalue_error,
                       load_field, min_eigenpair, save_field,
                       significance_report)
from .core import (Binning, DataError, NumericalError, PhaseGroup,
                   PhaseGroupedEnsemble, PhaseSpaceGrid, build_ensemble,
                   projection_vector, read_samples, write_samples)
from .estimator import (WeightAssignment, compute_field, compute_weights,
                        sample_dv_density, sample_integrated_nqp,
                        sample_nqp_element, weighted_moments)
from .filters import FilterKernel, build_kernel
from .oracle import (nqp_field_analytic, nqp_matrix_analytic, wigner,
                     wigner_field, wigner_filtered_p_comparison)
from .pattern_cv import CvPatternEvaluator
from .pattern_dv import DvPatternEvaluator
from .simulator import (apply_loss, coherent_state, dephased_tmsv,
                        experimental, fock_state, hybrid_cat, make_model,
                        product, sample_ensemble, spacs, tmsv, vacuum)

__version__ = "0.1.0"
