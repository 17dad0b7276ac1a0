"""
Three-part compositional data analysis.

Posteriors, priors and likelihood vectors over the hypotheses
``(spf, non.bf, tar.bf)`` live on the 3-part simplex. The isometric log-ratio
(ILR) transform with the bifurcating-tree basis maps them to the plane:

    r1 = ln(x2 / x1) / sqrt(2)              non.bf versus spf
    r2 = ln(x3 * x3 / (x1 * x2)) / sqrt(6)  tar.bf versus the other two

Because the transform is linear in log space, Bayes' rule becomes vector
addition: ``ilr(closure(prior * likelihood)) == ilr(prior) + ilr(likelihood)``.

All functions accept a single vector or a stack of vectors (components on the
last axis) and are pure.
"""

import numpy as np

from .errors import DomainError

SQRT2 = np.sqrt(2.0)
SQRT6 = np.sqrt(6.0)

# rows are the orthonormal basis vectors in clr space
_BASIS = np.array(
    [
        [-1.0 / SQRT2, 1.0 / SQRT2, 0.0],
        [-1.0 / SQRT6, -1.0 / SQRT6, 2.0 / SQRT6],
    ]
)


def _positive_parts(x, what="composition"):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (3,):
        raise DomainError(f"{what} must have 3 components on the last axis, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{what} has non-finite components")
    if np.any(x <= 0):
        raise DomainError(f"{what} has zero or negative components; ILR is undefined on the simplex boundary")
    return x


def closure(v):
    """Rescale strictly positive 3-vectors so that they sum to one.

    Parameters
    ----------
    v : array_like, shape (..., 3)
        Positive, finite components.

    Returns
    -------
    ndarray, shape (..., 3)

    Raises
    ------
    DomainError
        If a component is zero, negative or not finite.

    Examples
    --------
    >>> closure([2, 2, 4])
    array([0.25, 0.25, 0.5 ])
    """
    v = _positive_parts(v, "vector")
    return v / v.sum(axis=-1, keepdims=True)


def ilr(x):
    """ILR coordinates ``(r1, r2)`` of a composition or positive vector.

    The map is scale invariant, so likelihood vectors need not be normalised.
    Zero components are rejected rather than clamped.
    """
    x = _positive_parts(x)
    logx = np.log(x)
    r1 = (logx[..., 1] - logx[..., 0]) / SQRT2
    r2 = (2.0 * logx[..., 2] - logx[..., 0] - logx[..., 1]) / SQRT6
    return np.stack([r1, r2], axis=-1)


def ilr_inv(r):
    """Map ILR coordinates back onto the simplex."""
    r = np.asarray(r, dtype=float)
    if r.shape[-1:] != (2,):
        raise DomainError(f"ILR vector must have 2 components on the last axis, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise DomainError("ILR vector has non-finite components")
    clr = r @ _BASIS
    # softmax with max shift
    clr = clr - clr.max(axis=-1, keepdims=True)
    e = np.exp(clr)
    return e / e.sum(axis=-1, keepdims=True)


def likelihood_ilr_from_llrs(llr_asv, llr_cm):
    """ILR coordinates of the likelihood vector expressed through the two LLRs.

    Parameters
    ----------
    llr_asv : float or ndarray
        ``log p(x|tar.bf) - log p(x|non.bf)``.
    llr_cm : float or ndarray
        ``log p(x|tar.bf) - log p(x|spf)``.

    Returns
    -------
    ndarray, shape (..., 2)
        ``r1 = (llr_cm - llr_asv)/sqrt(2)`` and ``r2 = (llr_asv + llr_cm)/sqrt(6)``.
    """
    la = np.asarray(llr_asv, dtype=float)
    lc = np.asarray(llr_cm, dtype=float)
    if not (np.all(np.isfinite(la)) and np.all(np.isfinite(lc))):
        raise DomainError("LLRs must be finite")
    la, lc = np.broadcast_arrays(la, lc)
    return np.stack([(lc - la) / SQRT2, (la + lc) / SQRT6], axis=-1)


def perturb(x, y):
    """Aitchison perturbation: ``closure(x * y)``."""
    return closure(_positive_parts(x) * _positive_parts(y))
