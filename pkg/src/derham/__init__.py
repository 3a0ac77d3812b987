"""Weighted de Rham complex on R^n: exact exterior calculus, harmonic
expansions, potential operators, weighted norm estimators and explicit
cohomology representatives."""
from .exterior import (Form, QuadratureSpec, basis_form, codifferential, d, form_from_json,
                       form_to_json, hodge_star, l2_inner, volume_form, wedge)
from .fields import Field, SampledField
from .harmonics import HarmonicBasis, harmonic_basis, harmonic_dim, harmonic_qform_space
from .kernels import (fundamental_solution, kernel_phi, mollified_identity, truncated_kernel,
                      expansion_partial_sum)
from .potentials import (hodge_decompose, lemma_check, moment_functional, potential,
                         solve_system)
from .spaces import (WeightWindow, aniso_norm, classify_delta, gamma_norm, isotropic_norm,
                     make_grid, verify_time_class)
from .cohomology import (aniso_representative_basis, class_projection, project_class,
                         representative_basis, solvability_check)
from .report import Check, Report
from .suite import SuiteConfig, load_config, run_suite

__version__ = "0.1.0"
