"""
Score-to-LLR calibration.

Two routes turn raw ASV/CM scores into log-likelihood ratios:

* discriminative: an affine map ``a*s + b`` per score stream, fit by
  prior-weighted logistic regression;
* generative: one full-covariance 2-D Gaussian per class over the score
  vector ``[s_asv, s_cm]``, from which both LLRs follow as log-density
  differences.

Pairing used when fitting the affine maps: the ASV map is trained on tar.bf
(positive) versus non.bf (negative) trials; the CM map on bona fide
(tar.bf and non.bf) versus spf.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .classes import CLASS_NAMES, NONBF, SPF, TARBF
from .errors import DomainError, FitError

_LOG_2PI = np.log(2.0 * np.pi)


class LlrPair(NamedTuple):
    """Natural-log LLRs of tar.bf against non.bf (ASV) and against spf (CM).

    Fields may be scalars or equally shaped arrays.
    """

    llr_asv: object
    llr_cm: object


@dataclass(frozen=True)
class AffineCalibration:
    scale_a: float = 1.0
    offset_b: float = 0.0

    def __call__(self, score):
        return apply_affine(self, score)

    def to_dict(self):
        return {"affine": {"a": float(self.scale_a), "b": float(self.offset_b)}}

    @classmethod
    def from_dict(cls, doc):
        try:
            a, b = float(doc["affine"]["a"]), float(doc["affine"]["b"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed affine calibration document: {exc}") from None
        if not (np.isfinite(a) and np.isfinite(b)):
            raise DomainError("affine parameters must be finite")
        return cls(a, b)


def _check_finite(x, what="scores"):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{what} must be finite")
    return x


def apply_affine(cal, score):
    """Return ``a*score + b``."""
    score = _check_finite(score, "score")
    return cal.scale_a * score + cal.offset_b


def _objective(params, s, y, w_pos, w_neg, offset):
    z = params[0] * s + params[1] + offset
    # softplus(-z) for positives, softplus(z) for negatives
    loss = w_pos * np.sum(np.logaddexp(0.0, -z[y])) + w_neg * np.sum(np.logaddexp(0.0, z[~y]))
    return loss


def fit_affine_logistic(scores, is_positive, prior=0.5, tol=1e-8, max_iter=10_000):
    """Fit ``a*s + b`` so that the output approximates an LLR.

    Minimises the prior-weighted binary cross-entropy

        prior * mean_pos softplus(-(z + logit(prior)))
        + (1 - prior) * mean_neg softplus(z + logit(prior)),   z = a*s + b

    with damped Newton steps from ``(a, b) = (1, 0)``. The prior log-odds are
    part of the logistic argument, not of ``(a, b)``, so ``a*s + b`` is an LLR.
    At the default ``prior=0.5`` the objective is Cllr (in nats).

    Parameters
    ----------
    scores : array_like of float
    is_positive : array_like of bool
    prior : float
        Effective target prior of the objective.
    tol : float
        Stop once the gradient infinity-norm is at or below this value.
    max_iter : int

    Returns
    -------
    AffineCalibration

    Raises
    ------
    FitError
        If only one class is present, or the fitted slope is not positive
        (scores anti-correlated with the labels).
    DomainError
        If a score is not finite.
    """
    s = _check_finite(scores).ravel()
    y = np.asarray(is_positive, dtype=bool).ravel()
    if s.shape != y.shape:
        raise DomainError("scores and labels differ in length")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise FitError("logistic calibration needs both positive and negative examples")
    if not 0.0 < prior < 1.0:
        raise DomainError("prior must lie in (0, 1)")

    w_pos = prior / n_pos
    w_neg = (1.0 - prior) / n_neg
    offset = np.log(prior) - np.log1p(-prior)
    weights = np.where(y, w_pos, w_neg)
    sign = np.where(y, -1.0, 1.0)

    params = np.array([1.0, 0.0])
    loss = _objective(params, s, y, w_pos, w_neg, offset)
    for _ in range(max_iter):
        z = params[0] * s + params[1] + offset
        # d loss / dz: -sigma(-z) for positives, sigma(z) for negatives
        g_z = weights * sign * expit(sign * z)
        grad = np.array([np.dot(g_z, s), g_z.sum()])
        if np.max(np.abs(grad)) <= tol:
            break
        h_z = weights * expit(z) * expit(-z)
        hess = np.array(
            [[np.dot(h_z, s * s), np.dot(h_z, s)], [np.dot(h_z, s), h_z.sum()]]
        )
        try:
            step = np.linalg.solve(hess + 1e-12 * np.eye(2) * max(np.trace(hess), 1e-300), grad)
        except np.linalg.LinAlgError:
            step = grad
        if not np.all(np.isfinite(step)) or np.dot(step, grad) <= 0:
            step = grad
        t = 1.0
        while True:
            trial = params - t * step
            trial_loss = _objective(trial, s, y, w_pos, w_neg, offset)
            if trial_loss <= loss - 1e-4 * t * np.dot(step, grad) or t < 1e-20:
                break
            t *= 0.5
        if t < 1e-20:
            # no further decrease representable
            break
        params, loss = trial, trial_loss

    a, b = float(params[0]), float(params[1])
    if not a > 0:
        raise FitError(f"fitted slope a={a:.6g} is not positive; scores rank the classes in reverse")
    return AffineCalibration(a, b)


def fit_affine_asv(scores, labels, **kwargs):
    """ASV calibration: tar.bf versus non.bf; spf trials are ignored."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    keep = (labels == TARBF) | (labels == NONBF)
    return fit_affine_logistic(scores[keep], labels[keep] == TARBF, **kwargs)


def fit_affine_cm(scores, labels, **kwargs):
    """CM calibration: bona fide (tar.bf and non.bf) versus spf."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    keep = (labels == TARBF) | (labels == NONBF) | (labels == SPF)
    return fit_affine_logistic(scores[keep], labels[keep] != SPF, **kwargs)


@dataclass(frozen=True)
class GaussianBackend:
    """Per-class 2-D Gaussians over ``[s_asv, s_cm]``, indexed (spf, non.bf, tar.bf).

    ``means`` has shape (3, 2) and ``covs`` shape (3, 2, 2).
    """

    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        covs = np.array(self.covs, dtype=float)
        if means.shape != (3, 2) or covs.shape != (3, 2, 2):
            raise DomainError("backend needs 3 means of length 2 and 3 covariances of shape 2x2")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(covs))):
            raise DomainError("backend parameters must be finite")
        for k in range(3):
            check_spd(covs[k], CLASS_NAMES[k])
        means.setflags(write=False)
        covs.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)

    def log_density(self, s_asv, s_cm):
        """Log densities, shape (..., 3) in class order."""
        s_asv = _check_finite(s_asv, "score")
        s_cm = _check_finite(s_cm, "score")
        return np.stack(
            [gaussian_logpdf(s_asv, s_cm, self.means[k], self.covs[k]) for k in range(3)], axis=-1
        )

    def to_dict(self):
        return {
            "backend": {
                CLASS_NAMES[k]: {
                    "mean": [float(v) for v in self.means[k]],
                    "cov": [[float(v) for v in row] for row in self.covs[k]],
                }
                for k in range(3)
            }
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            body = doc["backend"]
            means = [body[name]["mean"] for name in CLASS_NAMES]
            covs = [body[name]["cov"] for name in CLASS_NAMES]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed backend document: missing {exc}") from None
        return cls(np.asarray(means, dtype=float), np.asarray(covs, dtype=float))


def check_spd(cov, name="covariance"):
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (2, 2):
        raise DomainError(f"{name}: covariance must be 2x2")
    if abs(cov[0, 1] - cov[1, 0]) > 1e-12:
        raise DomainError(f"{name}: covariance is not symmetric")
    if not np.linalg.eigvalsh(cov)[0] > 0:
        raise DomainError(f"{name}: covariance is not positive definite")
    return cov


def gaussian_logpdf(s_asv, s_cm, mean, cov):
    """Log density of a bivariate normal evaluated without forming the density."""
    d0 = np.asarray(s_asv, dtype=float) - mean[0]
    d1 = np.asarray(s_cm, dtype=float) - mean[1]
    a, b, c = cov[0, 0], cov[0, 1], cov[1, 1]
    det = a * c - b * b
    quad = (c * d0 * d0 - 2.0 * b * d0 * d1 + a * d1 * d1) / det
    return -0.5 * (quad + np.log(det)) - _LOG_2PI


def ml_gaussian(samples):
    """Maximum-likelihood mean and (1/N) covariance of 2-D samples.

    When the smallest eigenvalue falls below 1e-12 the covariance is
    regularised by ``eps * I`` with ``eps = 1e-9 * trace / 2``.

    Raises
    ------
    FitError
        If the covariance is still not positive definite afterwards.
    """
    x = np.asarray(samples, dtype=float)
    mean = x.mean(axis=0)
    d = x - mean
    cov = d.T @ d / x.shape[0]
    cov = 0.5 * (cov + cov.T)
    if np.linalg.eigvalsh(cov)[0] < 1e-12:
        cov = cov + 1e-9 * np.trace(cov) / 2.0 * np.eye(2)
        if not np.linalg.eigvalsh(cov)[0] > 0:
            raise FitError("degenerate class covariance (all samples identical)")
    return mean, cov


def fit_gaussian_backend(s_asv, s_cm, labels, min_per_class=3):
    """Fit one full-covariance Gaussian per class by maximum likelihood.

    Parameters
    ----------
    s_asv, s_cm : array_like of float
        Score streams of the development trials.
    labels : array_like of int
        Class codes (see :mod:`sasvfusion.classes`); unlabeled rows are ignored.

    Returns
    -------
    GaussianBackend
    """
    s_asv = _check_finite(s_asv)
    s_cm = _check_finite(s_cm)
    labels = np.asarray(labels)
    x = np.column_stack([s_asv, s_cm])
    means, covs = [], []
    for k, name in enumerate(CLASS_NAMES):
        rows = x[labels == k]
        if rows.shape[0] < min_per_class:
            raise FitError(f"class {name} has {rows.shape[0]} trials; at least {min_per_class} needed")
        mean, cov = ml_gaussian(rows)
        means.append(mean)
        covs.append(cov)
    return GaussianBackend(np.array(means), np.array(covs))


def backend_llrs(backend, s_asv, s_cm):
    """LLRs of tar.bf against non.bf and against spf under the backend."""
    logp = backend.log_density(s_asv, s_cm)
    return LlrPair(logp[..., TARBF] - logp[..., NONBF], logp[..., TARBF] - logp[..., SPF])
