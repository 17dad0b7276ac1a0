"""Compositional fusion of speaker-verification and spoofing-countermeasure scores."""

from .calibration import (
    AffineCalibration,
    GaussianBackend,
    LlrPair,
    backend_llrs,
    fit_affine_asv,
    fit_affine_cm,
    fit_affine_logistic,
    fit_gaussian_backend,
)
from .classes import CLASS_NAMES, NONBF, SPF, TARBF, UNLABELED
from .composition import closure, ilr, ilr_inv, likelihood_ilr_from_llrs, perturb
from .decision import (
    CostMatrix,
    Priors,
    average_cost,
    decide_linear,
    decide_optimal_llr,
    decide_optimal_posterior,
    decide_ternary_cost,
    decide_utility_argmax,
    posterior_from_llrs,
)
from .errors import DomainError, FitError, MetricError, SasvError
from .fusion import FusionKind, FusionRule, fuse, fuse_llr_sum, fuse_nonlinear, fuse_sum, grid_search_rho
from .metrics import MetricsReport, compute_cllr, compute_cllr_min, compute_eer, compute_t_eer, metrics_report
from .simulation import SimulationSpec, default_spec, empirical_risk, export_boundary_grid, sample_trials, true_llrs
from .systems import FittedModels, evaluate_system, fit_system_models, fuse_system
from .trials import Trials, read_tsv, write_tsv

__version__ = "0.1.0"
