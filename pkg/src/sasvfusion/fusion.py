"""
Score fusion rules.

``fuse_sum`` and ``fuse_llr_sum`` are the second ILR coordinate of the
likelihood vector when their inputs are LLRs. ``fuse_nonlinear`` is the
score whose threshold at ``-log(beta)`` is the minimum-risk decision under
equal costs; with Gaussian class models it coincides with the Gaussian
back-end fusion ``log p_tar / ((1-rho) p_non + rho p_spf)``.
``fuse_sigmoid_sum`` and ``fuse_sigmoid_product`` are the posterior-style
reference rules.

The eight evaluated systems are described by :data:`SYSTEMS`.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import expit

from .classes import NONBF, SPF, TARBF
from .composition import SQRT6
from .errors import DomainError, FitError

RHO_GRID = np.arange(101) / 100.0


class FusionKind(str, Enum):
    SUM_RAW = "sum_raw"
    SUM_CALIBRATED = "sum_calibrated"
    LLR_SUM = "llr_sum"
    LLR_NONLINEAR = "llr_nonlinear"
    SIGMOID_SUM = "sigmoid_sum"
    SIGMOID_PRODUCT = "sigmoid_product"


@dataclass(frozen=True)
class FusionRule:
    kind: FusionKind
    rho: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FusionKind(self.kind))
        if self.rho is not None:
            _check_rho(self.rho)
        elif self.kind is FusionKind.LLR_NONLINEAR:
            raise DomainError("non-linear LLR fusion needs rho")


@dataclass(frozen=True)
class SystemSpec:
    """How one of the eight systems turns a trial into a fused score."""

    name: str
    kind: FusionKind
    uses_backend: bool
    calibrated: bool


SYSTEMS = {
    "b1": SystemSpec("b1", FusionKind.SUM_RAW, False, False),
    "b1c": SystemSpec("b1c", FusionKind.SUM_CALIBRATED, False, True),
    "l2": SystemSpec("l2", FusionKind.LLR_SUM, True, False),
    "l2c": SystemSpec("l2c", FusionKind.LLR_SUM, True, True),
    "l3": SystemSpec("l3", FusionKind.LLR_NONLINEAR, True, False),
    "l3c": SystemSpec("l3c", FusionKind.LLR_NONLINEAR, True, True),
    "b1v2": SystemSpec("b1v2", FusionKind.SIGMOID_SUM, False, False),
    "post": SystemSpec("post", FusionKind.SIGMOID_PRODUCT, False, False),
}


def _check_rho(rho):
    rho_arr = np.asarray(rho, dtype=float)
    if not np.all((rho_arr >= 0.0) & (rho_arr <= 1.0)):
        raise DomainError(f"rho must lie in [0, 1], got {rho!r}")
    return rho_arr


def _finite(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("scores must be finite")
    return x


def fuse_sum(s_asv, s_cm):
    """``(s_asv + s_cm) / sqrt(6)``."""
    return (_finite(s_asv) + _finite(s_cm)) / SQRT6


def fuse_llr_sum(llr_asv, llr_cm):
    """``(llr_asv + llr_cm) / sqrt(6)``, the r2 coordinate of the likelihood vector."""
    return (_finite(llr_asv) + _finite(llr_cm)) / SQRT6


def fuse_nonlinear(llr_asv, llr_cm, rho):
    """Non-linear LLR fusion ``-log[(1-rho) exp(-llr_asv) + rho exp(-llr_cm)]``.

    Evaluated as a weighted log-sum-exp, so it is overflow free for
    ``|LLR| <= 700`` and returns ``llr_asv`` exactly at ``rho = 0`` and
    ``llr_cm`` exactly at ``rho = 1``.
    """
    rho = _check_rho(rho)
    la = _finite(llr_asv)
    lc = _finite(llr_cm)
    with np.errstate(divide="ignore"):
        log_w_non = np.log1p(-rho)
        log_w_spf = np.log(rho)
    return -np.logaddexp(log_w_non - la, log_w_spf - lc)


def fuse_sigmoid_sum(s_asv, s_cm):
    """``sigmoid(s_cm) + s_asv``."""
    return expit(_finite(s_cm)) + _finite(s_asv)


def fuse_sigmoid_product(s_asv, s_cm):
    """``sigmoid(s_asv) * sigmoid(s_cm)``."""
    return expit(_finite(s_asv)) * expit(_finite(s_cm))


def fuse(rule, s_asv, s_cm):
    """Apply a :class:`FusionRule` to the two input streams.

    The inputs are raw or calibrated scores for the score-level rules and
    LLRs for the LLR rules; selecting the right inputs is the caller's job.
    """
    kind = rule.kind
    if kind in (FusionKind.SUM_RAW, FusionKind.SUM_CALIBRATED):
        return fuse_sum(s_asv, s_cm)
    if kind is FusionKind.LLR_SUM:
        return fuse_llr_sum(s_asv, s_cm)
    if kind is FusionKind.LLR_NONLINEAR:
        return fuse_nonlinear(s_asv, s_cm, rule.rho)
    if kind is FusionKind.SIGMOID_SUM:
        return fuse_sigmoid_sum(s_asv, s_cm)
    return fuse_sigmoid_product(s_asv, s_cm)


def grid_search_rho(llr_asv, llr_cm, labels, objective="min_sasv_eer", costs=None, priors=None, grid=None):
    """Pick rho for :func:`fuse_nonlinear` by exhaustive search on development data.

    Parameters
    ----------
    llr_asv, llr_cm : array_like
        Development LLRs.
    labels : array_like of int
        Class codes; all three classes must be present.
    objective : {"min_sasv_eer", "min_risk"}
        ``min_sasv_eer`` minimises the pooled SASV-EER of the fused scores.
        ``min_risk`` minimises the prior-weighted detection cost
        ``sum_y pi_y * C_y * P_err(y)`` of accepting when the cost-weighted
        fused score exceeds ``-log(beta)``; needs ``costs`` and ``priors``.
    grid : array_like, optional
        Candidate values, default ``0, 0.01, ..., 1``.

    Returns
    -------
    float
        The minimising rho; ties go to the smallest candidate.
    """
    from .decision import decide_optimal_llr
    from .metrics import compute_eer

    labels = np.asarray(labels)
    for k in (SPF, NONBF, TARBF):
        if not np.any(labels == k):
            raise FitError("grid search needs all three classes in the development set")
    grid = RHO_GRID if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("empty rho grid")
    _check_rho(grid)
    la = _finite(llr_asv)
    lc = _finite(llr_cm)
    is_target = labels == TARBF

    if objective == "min_sasv_eer":
        def evaluate(rho):
            return compute_eer(fuse_nonlinear(la, lc, rho), is_target)[0]
    elif objective == "min_risk":
        if costs is None or priors is None:
            raise DomainError("min_risk objective needs costs and priors")
        pi = priors.pi
        class_weight = {
            TARBF: pi[TARBF] * costs.c_miss_tarbf,
            NONBF: pi[NONBF] * costs.c_fa_nonbf,
            SPF: pi[SPF] * costs.c_fa_spf,
        }

        def evaluate(rho):
            accept = decide_optimal_llr((la, lc), priors, costs, rho=rho)
            risk = 0.0
            for k, weight in class_weight.items():
                in_class = labels == k
                errors = ~accept[in_class] if k == TARBF else accept[in_class]
                risk += weight * errors.mean()
            return risk
    else:
        raise DomainError(f"unknown objective {objective!r}")

    best_rho, best_value = None, np.inf
    for rho in grid:
        value = evaluate(float(rho))
        if value < best_value or best_rho is None:
            best_rho, best_value = float(rho), value
        elif value == best_value and rho < best_rho:
            best_rho = float(rho)
    return best_rho
