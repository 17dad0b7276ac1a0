"""
The eight evaluated systems: fitting their models on development trials and
scoring evaluation trials.

=======  ===========================  =========================================
system   per-stream inputs            fused score
=======  ===========================  =========================================
b1       raw s_asv, s_cm              (s_asv + s_cm)/sqrt(6)
b1c      affine-calibrated scores     (f_asv(s_asv) + f_cm(s_cm))/sqrt(6)
l2       backend LLRs                 (llr_asv + llr_cm)/sqrt(6)
l2c      affine-calibrated LLRs       same, on calibrated LLRs
l3       backend LLRs                 non-linear fusion with rho
l3c      affine-calibrated LLRs       same, on calibrated LLRs
b1v2     s_asv, sigmoid(s_cm)         sigmoid(s_cm) + s_asv
post     sigmoid(s_asv), sigmoid(s_cm) sigmoid(s_asv) * sigmoid(s_cm)
=======  ===========================  =========================================

For l2c/l3c the two LLR streams are calibrated by independent affine maps
using the same class pairings as the raw-score maps.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from .calibration import (
    AffineCalibration,
    GaussianBackend,
    backend_llrs,
    fit_affine_asv,
    fit_affine_cm,
    fit_gaussian_backend,
)
from .errors import DomainError, FitError
from .fusion import SYSTEMS, FusionKind, FusionRule, fuse, grid_search_rho
from .metrics import metrics_report


@dataclass(frozen=True)
class FittedModels:
    """Everything a system needs at scoring time; unused entries stay ``None``."""

    affine_asv: Optional[AffineCalibration] = None
    affine_cm: Optional[AffineCalibration] = None
    backend: Optional[GaussianBackend] = None
    rho: Optional[float] = None


def system_spec(system):
    try:
        return SYSTEMS[system.lower()]
    except KeyError:
        raise DomainError(f"unknown system {system!r}; choose from {', '.join(SYSTEMS)}") from None


def _require(models, spec):
    if spec.uses_backend and models.backend is None:
        raise DomainError(f"system {spec.name} needs a Gaussian backend")
    if spec.calibrated and (models.affine_asv is None or models.affine_cm is None):
        raise DomainError(f"system {spec.name} needs ASV and CM affine calibrations")
    if spec.kind is FusionKind.LLR_NONLINEAR and models.rho is None:
        raise DomainError(f"system {spec.name} needs rho")


def system_streams(system, models, s_asv, s_cm):
    """The two per-stream values a system feeds into fusion.

    These are also the inputs on which its t-EER is measured.
    """
    spec = system_spec(system)
    _require(models, spec)
    s_asv = np.asarray(s_asv, dtype=float)
    s_cm = np.asarray(s_cm, dtype=float)
    if spec.uses_backend:
        a, c = backend_llrs(models.backend, s_asv, s_cm)
    elif spec.kind is FusionKind.SIGMOID_SUM:
        return s_asv, expit(s_cm)
    elif spec.kind is FusionKind.SIGMOID_PRODUCT:
        return expit(s_asv), expit(s_cm)
    else:
        a, c = s_asv, s_cm
    if spec.calibrated:
        a, c = models.affine_asv(a), models.affine_cm(c)
    return a, c


def fuse_system(system, models, s_asv, s_cm):
    """Fused SASV scores of a system."""
    spec = system_spec(system)
    if spec.kind in (FusionKind.SIGMOID_SUM, FusionKind.SIGMOID_PRODUCT):
        return fuse(FusionRule(spec.kind), s_asv, s_cm)
    a, c = system_streams(system, models, s_asv, s_cm)
    return fuse(FusionRule(spec.kind, models.rho), a, c)


def fit_system_models(system, dev, rho=None, objective="min_sasv_eer", priors=None, costs=None):
    """Fit the models a system needs on labeled development trials.

    Parameters
    ----------
    system : str
        One of ``b1, b1c, l2, l2c, l3, l3c, b1v2, post``.
    dev : Trials
    rho : float, optional
        Fixed rho for l3/l3c; when omitted it is grid-searched on ``dev``
        with ``objective`` (and ``priors``/``costs`` for ``min_risk``).
    """
    spec = system_spec(system)
    if not dev.is_labeled:
        raise FitError("development trials must be labeled")
    backend = affine_asv = affine_cm = None
    a, c = dev.s_asv, dev.s_cm
    if spec.uses_backend:
        backend = fit_gaussian_backend(dev.s_asv, dev.s_cm, dev.label)
        a, c = backend_llrs(backend, dev.s_asv, dev.s_cm)
    if spec.calibrated:
        affine_asv = fit_affine_asv(a, dev.label)
        affine_cm = fit_affine_cm(c, dev.label)
        a, c = affine_asv(a), affine_cm(c)
    if spec.kind is FusionKind.LLR_NONLINEAR and rho is None:
        rho = grid_search_rho(a, c, dev.label, objective=objective, costs=costs, priors=priors)
    return FittedModels(affine_asv, affine_cm, backend, rho)


def evaluate_system(trials, system, models, priors=None, costs=None):
    """Metrics of one system on labeled evaluation trials.

    When ``models.rho`` is missing for l3/l3c, ``priors.rho`` is used.
    """
    spec = system_spec(system)
    if len(trials) == 0:
        raise DomainError("no evaluation trials")
    if not trials.is_labeled:
        raise DomainError("evaluation trials must be labeled")
    if spec.kind is FusionKind.LLR_NONLINEAR and models.rho is None and priors is not None:
        models = FittedModels(models.affine_asv, models.affine_cm, models.backend, float(priors.rho))
    a, c = system_streams(system, models, trials.s_asv, trials.s_cm)
    fused = fuse_system(system, models, trials.s_asv, trials.s_cm)
    return metrics_report(fused, a, c, trials.label)
