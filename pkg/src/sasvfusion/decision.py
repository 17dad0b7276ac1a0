"""
Bayes decisions for the two-action, three-class SASV task.

A decision is a boolean (``True`` means accept, ``False`` reject); every
policy is vectorised over a leading batch axis. Accept conditions are strict,
so ties reject.

Cost layout (class by action)::

                accept        reject
    tar.bf      0             c_miss_tarbf
    non.bf      c_fa_nonbf    0
    spf         c_fa_spf      0
"""

from dataclasses import dataclass

import numpy as np

from .classes import NONBF, PRIOR_KEYS, SPF, TARBF
from .errors import DomainError

ACCEPT = True
REJECT = False


@dataclass(frozen=True)
class CostMatrix:
    c_miss_tarbf: float = 1.0
    c_fa_nonbf: float = 1.0
    c_fa_spf: float = 1.0

    def __post_init__(self):
        values = np.array([self.c_miss_tarbf, self.c_fa_nonbf, self.c_fa_spf], dtype=float)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DomainError("costs must be finite and non-negative")
        if not np.any(values > 0):
            raise DomainError("at least one cost must be positive")

    def to_dict(self):
        return {"miss": self.c_miss_tarbf, "fa_non": self.c_fa_nonbf, "fa_spf": self.c_fa_spf}

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(float(doc["miss"]), float(doc["fa_non"]), float(doc["fa_spf"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed costs: {exc}") from None


@dataclass(frozen=True, eq=False)
class Priors:
    """Class priors in the order (spf, non.bf, tar.bf).

    ``rho`` (spoof share of the negative class) and ``beta`` (target versus
    negative prior odds) are always derived from ``pi``.
    """

    pi: np.ndarray

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        if pi.shape != (3,) or not np.all(np.isfinite(pi)) or np.any(pi < 0):
            raise DomainError("priors must be three finite non-negative numbers")
        if abs(pi.sum() - 1.0) > 1e-12:
            raise DomainError(f"priors must sum to 1, got {pi.sum()!r}")
        if not pi[TARBF] > 0 or not pi[SPF] + pi[NONBF] > 0:
            raise DomainError("both the target and the negative class need positive prior mass")
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)

    @classmethod
    def flat(cls):
        return cls(np.full(3, 1.0 / 3.0))

    @property
    def rho(self):
        return self.pi[SPF] / (self.pi[NONBF] + self.pi[SPF])

    @property
    def beta(self):
        return self.pi[TARBF] / (self.pi[NONBF] + self.pi[SPF])

    @property
    def linear_threshold(self):
        """Threshold on ``llr_asv + llr_cm`` of the linear policy."""
        with np.errstate(divide="ignore"):
            return np.log(self.pi[SPF] * self.pi[NONBF] / self.pi[TARBF] ** 2)

    def to_dict(self):
        return {key: float(v) for key, v in zip(PRIOR_KEYS, self.pi)}

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(np.array([float(doc[key]) for key in PRIOR_KEYS]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed priors: {exc}") from None

    def __eq__(self, other):
        return isinstance(other, Priors) and np.array_equal(self.pi, other.pi)

    def __repr__(self):
        return f"Priors(spf={self.pi[0]!r}, nonbf={self.pi[1]!r}, tarbf={self.pi[2]!r})"


def _posterior(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1:] != (3,):
        raise DomainError("posterior must have 3 components on the last axis")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise DomainError("posterior components must be finite and non-negative")
    return p


def _llrs(llrs):
    la, lc = llrs
    la = np.asarray(la, dtype=float)
    lc = np.asarray(lc, dtype=float)
    if not (np.all(np.isfinite(la)) and np.all(np.isfinite(lc))):
        raise DomainError("LLRs must be finite")
    return la, lc


def posterior_from_llrs(llrs, priors):
    """Posterior (spf, non.bf, tar.bf) from the two LLRs and the priors."""
    la, lc = _llrs(llrs)
    with np.errstate(divide="ignore"):
        log_pi = np.log(priors.pi)
    la, lc = np.broadcast_arrays(la, lc)
    # log likelihoods relative to tar.bf
    logits = np.stack([log_pi[SPF] - lc, log_pi[NONBF] - la, np.full_like(la, log_pi[TARBF])], axis=-1)
    logits = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=-1, keepdims=True)


def llrs_from_posterior(posterior, priors):
    """Inverse of :func:`posterior_from_llrs` for strictly positive inputs."""
    p = _posterior(posterior)
    log_ratio = np.log(p) - np.log(priors.pi)
    return (
        log_ratio[..., TARBF] - log_ratio[..., NONBF],
        log_ratio[..., TARBF] - log_ratio[..., SPF],
    )


def conditional_risk(action, posterior, costs):
    """Expected cost of taking ``action`` (True = accept) given the posterior."""
    p = _posterior(posterior)
    risk_accept = costs.c_fa_nonbf * p[..., NONBF] + costs.c_fa_spf * p[..., SPF]
    risk_reject = costs.c_miss_tarbf * p[..., TARBF]
    return np.where(action, risk_accept, risk_reject)


def decide_optimal_posterior(posterior, costs=CostMatrix()):
    """Minimum-risk decision from posteriors: accept iff R(reject) > R(accept)."""
    p = _posterior(posterior)
    return costs.c_miss_tarbf * p[..., TARBF] > costs.c_fa_nonbf * p[..., NONBF] + costs.c_fa_spf * p[..., SPF]


def optimal_llr_score(llrs, rho, costs=CostMatrix()):
    """Cost-weighted non-linear fusion score compared with ``-log(beta)``.

    ``-log[(c_fa_non/c_miss)(1-rho)e^{-llr_asv} + (c_fa_spf/c_miss) rho e^{-llr_cm}]``;
    with unit costs this is exactly :func:`sasvfusion.fusion.fuse_nonlinear`.
    """
    la, lc = _llrs(llrs)
    if not costs.c_miss_tarbf > 0:
        raise DomainError("the LLR form of the optimal policy needs c_miss > 0")
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise DomainError("rho must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        log_w_non = np.log1p(-rho) + np.log(costs.c_fa_nonbf / costs.c_miss_tarbf)
        log_w_spf = np.log(rho) + np.log(costs.c_fa_spf / costs.c_miss_tarbf)
    return -np.logaddexp(log_w_non - la, log_w_spf - lc)


def decide_optimal_llr(llrs, priors, costs=CostMatrix(), rho=None):
    """Minimum-risk decision from the two LLRs.

    Accept iff ``beta > (c_fa_non/c_miss) e^{-llr_asv} (1-rho)
    + (c_fa_spf/c_miss) e^{-llr_cm} rho``, compared after ``-log`` of both
    sides. ``rho`` defaults to the value implied by ``priors``; passing it
    explicitly models a deployed rho that differs from the true priors.

    Raises
    ------
    DomainError
        If ``c_miss`` is zero.
    """
    rho = priors.rho if rho is None else rho
    return optimal_llr_score(llrs, rho, costs) > -np.log(priors.beta)


def decide_linear(llrs, priors):
    """Accept iff ``llr_asv + llr_cm > log(pi_spf * pi_nonbf / pi_tarbf**2)``.

    Equivalent to ``P(tar.bf|x)**2 > P(non.bf|x) P(spf|x)``: necessary for the
    equal-cost optimal decision but not sufficient.
    """
    la, lc = _llrs(llrs)
    return la + lc > priors.linear_threshold


def decide_ternary_cost(posterior, costs):
    """Class index minimising ``sum_y C[y][a] P(y)``; ties go to the lowest index.

    ``costs`` is a 3x3 array indexed ``[true class, action]``.
    """
    p = _posterior(posterior)
    c = np.asarray(costs, dtype=float)
    if c.shape != (3, 3) or np.any(c < 0):
        raise DomainError("ternary costs must be a non-negative 3x3 matrix")
    return np.argmin(p @ c, axis=-1)


def decide_utility_argmax(posterior, utility):
    """Class index maximising ``sum_y U[y][a] P(y)``; ties go to the lowest index."""
    p = _posterior(posterior)
    u = np.asarray(utility, dtype=float)
    if u.shape != (3, 3) or np.any(u < 0):
        raise DomainError("utilities must be a non-negative 3x3 matrix")
    off_diag = u[~np.eye(3, dtype=bool)].reshape(3, 2)
    if not np.all(np.diag(u)[:, None] > off_diag):
        raise DomainError("each correct decision must earn strictly more utility than the wrong ones")
    return np.argmax(p @ u, axis=-1)


def average_cost(accept, labels, costs=CostMatrix()):
    """Mean realised cost of decisions against ground-truth labels."""
    accept = np.asarray(accept, dtype=bool)
    labels = np.asarray(labels)
    cost = np.where(
        labels == TARBF,
        np.where(accept, 0.0, costs.c_miss_tarbf),
        np.where(accept, np.where(labels == NONBF, costs.c_fa_nonbf, costs.c_fa_spf), 0.0),
    )
    return float(cost.mean())
