"""
Synthetic Gaussian score worlds with exact LLRs.

Each class (spf, non.bf, tar.bf) draws its score vector ``[s_asv, s_cm]``
from its own 2-D Gaussian, so the true LLRs are known in closed form. That
makes it possible to compare decision policies against ground truth.

Random stream
-------------
Sampling is reproducible across implementations. The generator is
SplitMix64: the k-th 64-bit word (k = 1, 2, ...) is ``mix(seed + k*G)`` with
``G = 0x9E3779B97F4A7C15`` and the standard SplitMix64 finaliser. Trial ``t``
(0-based) consumes words ``3t+1, 3t+2, 3t+3``:

* word 1 -> ``u = (w >> 11) * 2**-53`` picks the class by inverse CDF over
  the priors in class order;
* words 2 and 3 -> Box-Muller: ``r = sqrt(-2 ln u1)`` with
  ``u1 = ((w2 >> 11) + 1) * 2**-53`` and angle ``2*pi*u2``, giving
  ``z = (r cos, r sin)``;
* the score is ``mean + L @ z`` with ``L`` the lower Cholesky factor.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calibration import GaussianBackend, LlrPair, backend_llrs, check_spd
from .classes import CLASS_NAMES
from .decision import CostMatrix, Priors, average_cost, decide_linear, decide_optimal_llr
from .errors import DomainError
from .trials import Trials

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_2POW_M53 = 2.0 ** -53


def splitmix64(seed, start, count):
    """Words ``start+1 .. start+count`` of the SplitMix64 stream for ``seed``."""
    k = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.full(count, seed, dtype=np.uint64) + k * _GAMMA
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniform01(words):
    """Uniforms on [0, 1) from the top 53 bits."""
    return (words >> np.uint64(11)).astype(np.float64) * _2POW_M53


@dataclass(frozen=True, eq=False)
class SimulationSpec:
    means: np.ndarray
    covs: np.ndarray
    priors: Priors = field(default_factory=Priors.flat)
    n_trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        covs = np.array(self.covs, dtype=float)
        if means.shape != (3, 2) or covs.shape != (3, 2, 2):
            raise DomainError("simulation needs 3 means of length 2 and 3 covariances of shape 2x2")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(covs))):
            raise DomainError("simulation parameters must be finite")
        for k in range(3):
            check_spd(covs[k], CLASS_NAMES[k])
        if not isinstance(self.priors, Priors):
            object.__setattr__(self, "priors", Priors(self.priors))
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise DomainError("n_trials must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)
        object.__setattr__(self, "n_trials", int(self.n_trials))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def backend(self):
        """The generating distributions as a :class:`GaussianBackend`."""
        return GaussianBackend(self.means, self.covs)

    def replace(self, **changes):
        fields = dict(means=self.means, covs=self.covs, priors=self.priors, n_trials=self.n_trials, seed=self.seed)
        fields.update(changes)
        return SimulationSpec(**fields)

    def to_dict(self):
        return {
            "classes": {
                CLASS_NAMES[k]: {
                    "mean": [float(v) for v in self.means[k]],
                    "cov": [[float(v) for v in row] for row in self.covs[k]],
                }
                for k in range(3)
            },
            "priors": self.priors.to_dict(),
            "n_trials": self.n_trials,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            classes = doc["classes"]
            means = [classes[name]["mean"] for name in CLASS_NAMES]
            covs = [classes[name]["cov"] for name in CLASS_NAMES]
            priors = Priors.from_dict(doc["priors"]) if "priors" in doc else Priors.flat()
            return cls(np.asarray(means, dtype=float), np.asarray(covs, dtype=float), priors, doc["n_trials"], doc.get("seed", 0))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed simulation spec: {exc!r}") from None


def default_spec(n_trials=100_000, seed=20240901):
    """Three overlapping Gaussian classes with a flat prior.

    tar.bf scores high on both axes, non.bf is bona fide (high CM) but scores
    low on ASV, and spf is rejected by CM yet partly fools ASV.
    """
    means = np.array([[1.0, -1.5], [-1.5, 1.0], [1.5, 1.5]])
    covs = np.array(
        [
            [[1.0, 0.2], [0.2, 1.0]],
            [[1.0, -0.1], [-0.1, 1.0]],
            [[0.8, 0.1], [0.1, 0.8]],
        ]
    )
    return SimulationSpec(means, covs, Priors.flat(), n_trials, seed)


def scale_mismatched_spec(spec, asv_scale=0.01):
    """Shrink the ASV axis of every class by ``asv_scale``."""
    scale = np.diag([asv_scale, 1.0])
    means = spec.means @ scale
    covs = np.einsum("ij,kjl,lm->kim", scale, spec.covs, scale)
    return spec.replace(means=means, covs=covs)


def sample_trials(spec, start=0):
    """Draw ``spec.n_trials`` labeled trials; fully determined by ``spec.seed``.

    ``start`` skips that many trials of the stream, so consecutive chunks of
    one seed can be drawn separately.
    """
    n = spec.n_trials
    words = splitmix64(spec.seed, 3 * start, 3 * n).reshape(n, 3)
    u_class = uniform01(words[:, 0])
    u1 = ((words[:, 1] >> np.uint64(11)).astype(np.float64) + 1.0) * _2POW_M53
    u2 = uniform01(words[:, 2])
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.column_stack([r * np.cos(theta), r * np.sin(theta)])

    cum = np.cumsum(spec.priors.pi)
    labels = np.minimum(np.searchsorted(cum, u_class, side="right"), 2)
    chol = np.linalg.cholesky(spec.covs)
    scores = spec.means[labels] + np.einsum("nij,nj->ni", chol[labels], z)
    ids = np.array([f"sim{start + t:09d}" for t in range(n)], dtype=object)
    return Trials(ids, scores[:, 0], scores[:, 1], labels)


def true_llrs(spec, s_asv, s_cm):
    """Exact LLRs (tar.bf vs non.bf, tar.bf vs spf) under the generating Gaussians."""
    return backend_llrs(spec.backend, s_asv, s_cm)


def policy_decisions(llrs, policy, priors, costs=CostMatrix()):
    """Accept/reject decisions of a named policy or a callable ``policy(llrs)``."""
    if callable(policy):
        return np.asarray(policy(llrs), dtype=bool)
    if policy == "optimal":
        return decide_optimal_llr(llrs, priors, costs)
    if policy == "linear":
        return decide_linear(llrs, priors)
    raise DomainError(f"unknown policy {policy!r}")


def empirical_risk(trials, spec, policy="optimal", priors=None, costs=CostMatrix()):
    """Average realised cost of a policy fed with the true LLRs of ``spec``.

    Parameters
    ----------
    trials : Trials
        Labeled trials, usually drawn from ``spec``.
    spec : SimulationSpec
        World providing the true LLRs.
    policy : {"optimal", "linear"} or callable
    priors : Priors, optional
        Priors assumed by the policy; defaults to ``spec.priors``. Passing other
        priors gives a mis-matched policy.
    costs : CostMatrix
    """
    priors = spec.priors if priors is None else priors
    llrs = true_llrs(spec, trials.s_asv, trials.s_cm)
    accept = policy_decisions(llrs, policy, priors, costs)
    return average_cost(accept, trials.label, costs)


def _axis(start, stop, step):
    if not step > 0:
        raise DomainError("grid step must be positive")
    if stop < start:
        raise DomainError("grid stop must not be below start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


@dataclass(frozen=True, eq=False)
class BoundaryGrid:
    """Policy decisions on a rectangular (llr_asv, llr_cm) grid.

    Decision arrays are indexed ``[i_asv, i_cm]``.
    """

    llr_asv: np.ndarray
    llr_cm: np.ndarray
    linear: np.ndarray
    optimal: np.ndarray
    mismatched: Optional[np.ndarray] = None

    def rows(self):
        for i, a in enumerate(self.llr_asv):
            for j, c in enumerate(self.llr_cm):
                row = [a, c, int(self.linear[i, j]), int(self.optimal[i, j])]
                if self.mismatched is not None:
                    row.append(int(self.mismatched[i, j]))
                yield row

    def csv_text(self):
        header = ["llr_asv", "llr_cm", "linear", "optimal"]
        if self.mismatched is not None:
            header.append("mismatched")
        lines = [",".join(header)]
        for row in self.rows():
            lines.append(",".join([format(float(row[0]), ".17g"), format(float(row[1]), ".17g")] + [str(v) for v in row[2:]]))
        return "\n".join(lines) + "\n"

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.csv_text())


def export_boundary_grid(asv_range, cm_range, priors=None, costs=CostMatrix(), mismatched_priors=None):
    """Evaluate the linear and optimal policies on an LLR grid.

    Parameters
    ----------
    asv_range, cm_range : (start, stop, step)
        Inclusive axis definitions.
    priors : Priors, optional
        Defaults to flat.
    mismatched_priors : Priors, optional
        When given, also records the optimal policy computed with these priors.
    """
    priors = Priors.flat() if priors is None else priors
    a_axis = _axis(*asv_range)
    c_axis = _axis(*cm_range)
    la, lc = np.meshgrid(a_axis, c_axis, indexing="ij")
    llrs = LlrPair(la, lc)
    mismatched = None
    if mismatched_priors is not None:
        mismatched = decide_optimal_llr(llrs, mismatched_priors, costs)
    return BoundaryGrid(
        a_axis,
        c_axis,
        decide_linear(llrs, priors),
        decide_optimal_llr(llrs, priors, costs),
        mismatched,
    )
