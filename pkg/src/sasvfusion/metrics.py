"""
Detection metrics: EER, Cllr with its PAV decomposition, and concurrent t-EER.

Every threshold rule here is "accept iff score > threshold", and error rates
are always computed as ``error_count / class_count``. The EER and the t-EER
depend only on the rank order of the scores. So strictly increasing
per-stream transforms leave them bit-identical.
"""

from dataclasses import dataclass

import numpy as np

from .classes import NONBF, SPF, TARBF
from .errors import MetricError

_LN2 = np.log(2.0)


def _scores_and_labels(scores, is_target):
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(is_target, dtype=bool).ravel()
    if s.shape != y.shape:
        raise MetricError("scores and labels differ in length")
    if not np.all(np.isfinite(s)):
        raise MetricError("scores must be finite")
    if not (np.any(y) and np.any(~y)):
        raise MetricError("both target and non-target trials are required")
    return s, y


def det_points(scores, is_target):
    """Operating points of the threshold sweep.

    Returns
    -------
    thresholds : ndarray
        ``-inf`` followed by every distinct score, ascending.
    p_miss, p_fa : ndarray
        Miss and false-acceptance rates when accepting ``score > threshold``.
    """
    s, y = _scores_and_labels(scores, is_target)
    tar = np.sort(s[y])
    non = np.sort(s[~y])
    values = np.unique(s)
    n_tar_le = np.searchsorted(tar, values, side="right")
    n_non_le = np.searchsorted(non, values, side="right")
    thresholds = np.concatenate([[-np.inf], values])
    p_miss = np.concatenate([[0], n_tar_le]) / tar.size
    p_fa = (non.size - np.concatenate([[0], n_non_le])) / non.size
    return thresholds, p_miss, p_fa


def _crossing(p_miss, p_fa, thresholds):
    """Interpolated crossing of a nondecreasing miss and nonincreasing FA curve."""
    k = int(np.argmax(p_miss >= p_fa))
    if p_miss[k] == p_fa[k]:
        return p_miss[k], thresholds[k]
    m0, f0, m1, f1 = p_miss[k - 1], p_fa[k - 1], p_miss[k], p_fa[k]
    t = (f0 - m0) / ((f0 - m0) + (m1 - f1))
    eer = m0 + t * (m1 - m0)
    lo, hi = thresholds[k - 1], thresholds[k]
    thr = hi if not np.isfinite(lo) else lo + t * (hi - lo)
    return eer, thr


def compute_eer(scores, is_target):
    """Equal error rate and its threshold.

    The miss and false-acceptance curves are swept over all distinct score
    thresholds; the crossing is interpolated linearly between the two
    adjacent operating points that bracket it.

    Parameters
    ----------
    scores : array_like of float
    is_target : array_like of bool

    Returns
    -------
    eer : float
    threshold : float

    Raises
    ------
    MetricError
        If either class is missing.

    Examples
    --------
    >>> compute_eer([0, 2, 1, 3], [True, True, False, False])[0]
    0.5
    """
    thresholds, p_miss, p_fa = det_points(scores, is_target)
    eer, thr = _crossing(p_miss, p_fa, thresholds)
    return float(eer), float(thr)


def compute_sasv_eer(scores, labels):
    """EER with tar.bf as targets and non.bf and spf pooled as non-targets."""
    return compute_eer(scores, np.asarray(labels) == TARBF)


def compute_cllr(llrs, is_target):
    """Log-likelihood-ratio cost in bits of natural-log LLRs."""
    llr = np.asarray(llrs, dtype=float).ravel()
    y = np.asarray(is_target, dtype=bool).ravel()
    if llr.shape != y.shape:
        raise MetricError("scores and labels differ in length")
    if not (np.any(y) and np.any(~y)):
        raise MetricError("both target and non-target trials are required")
    if np.any(np.isnan(llr)):
        raise MetricError("LLRs must not be NaN")
    # work in base 2 so that zero LLRs cost exactly one bit
    bits = llr / _LN2
    c_tar = np.mean(np.logaddexp2(0.0, -bits[y]))
    c_non = np.mean(np.logaddexp2(0.0, bits[~y]))
    return float(0.5 * (c_tar + c_non))


def pav(values, weights=None):
    """Weighted isotonic (nondecreasing) least-squares fit by pool-adjacent-violators.

    Parameters
    ----------
    values : array_like
        Observations in the order of the independent variable.
    weights : array_like, optional
        Positive weights, default all ones.

    Returns
    -------
    ndarray
        Fitted nondecreasing sequence, same length as ``values``.
    """
    v = np.asarray(values, dtype=float).ravel()
    w = np.ones_like(v) if weights is None else np.asarray(weights, dtype=float).ravel()
    # stack of pooled blocks: (mean, weight, length)
    means, wsum, length = [], [], []
    for vi, wi in zip(v.tolist(), w.tolist()):
        m, ww, ln = vi, wi, 1
        while means and means[-1] >= m:
            pm, pw, pl = means.pop(), wsum.pop(), length.pop()
            m = (pm * pw + m * ww) / (pw + ww)
            ww += pw
            ln += pl
        means.append(m)
        wsum.append(ww)
        length.append(ln)
    return np.repeat(means, length)


def pav_llrs(scores, is_target):
    """Optimal monotone recalibration of scores into LLRs.

    Tied scores are pooled first, PAV maps the sorted scores to target
    posteriors, and the empirical prior log-odds are removed. Entries may be
    infinite where a block is pure.
    """
    s, y = _scores_and_labels(scores, is_target)
    values, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    n_tar_at = np.bincount(inverse, weights=y.astype(float), minlength=values.size)
    posterior = pav(n_tar_at / counts, counts)
    posterior = np.clip(posterior, 0.0, 1.0)
    n_tar = y.sum()
    prior_log_odds = np.log(n_tar) - np.log(y.size - n_tar)
    with np.errstate(divide="ignore"):
        llr = np.log(posterior) - np.log1p(-posterior) - prior_log_odds
    return llr[inverse]


def compute_cllr_min(llrs, is_target):
    """Cllr after optimal monotone (PAV) recalibration, in bits."""
    return compute_cllr(pav_llrs(llrs, is_target), is_target)


class _Fenwick:
    __slots__ = ("n", "tree")

    def __init__(self, n):
        self.n = n
        self.tree = [0] * (n + 1)

    def add(self, i, v):
        tree, n = self.tree, self.n
        while i <= n:
            tree[i] += v
            i += i & -i

    def prefix(self, i):
        tree, s = self.tree, 0
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s

    def lower_bound(self, target):
        """Smallest i with prefix(i) >= target (prefix sums are nondecreasing)."""
        if target <= 0:
            return 0
        tree, n = self.tree, self.n
        pos, step = 0, 1 << n.bit_length()
        while step:
            nxt = pos + step
            if nxt <= n and tree[nxt] < target:
                pos = nxt
                target -= tree[nxt]
            step >>= 1
        return pos + 1


def _dense_rank(x):
    values, inverse = np.unique(x, return_inverse=True)
    return inverse + 1, values.size


def t_eer_path(s_asv, s_cm, labels):
    """Concurrent t-EER path of the tandem ``s_asv > t_asv and s_cm > t_cm``.

    For each CM threshold (``-inf`` then every distinct CM score) the ASV
    threshold is chosen where P_miss and P_fa,non cross, interpolated as in
    :func:`compute_eer`; P_fa,spf is interpolated at the same point. When the
    CM threshold alone already forces P_miss >= P_fa,non at an accept-all ASV
    threshold, that endpoint is used.

    Returns
    -------
    eer_bona : ndarray
        Common value of P_miss and P_fa,non along the path.
    p_fa_spf : ndarray
        Spoof false-acceptance rate along the path.
    """
    s_asv = np.asarray(s_asv, dtype=float).ravel()
    s_cm = np.asarray(s_cm, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if not (s_asv.shape == s_cm.shape == labels.shape):
        raise MetricError("score streams and labels differ in length")
    if not (np.all(np.isfinite(s_asv)) and np.all(np.isfinite(s_cm))):
        raise MetricError("scores must be finite")
    n_tar = int(np.sum(labels == TARBF))
    n_non = int(np.sum(labels == NONBF))
    n_spf = int(np.sum(labels == SPF))
    if min(n_tar, n_non, n_spf) == 0:
        raise MetricError("t-EER needs tar.bf, non.bf and spf trials")
    keep = (labels == TARBF) | (labels == NONBF) | (labels == SPF)
    s_asv, s_cm, labels = s_asv[keep], s_cm[keep], labels[keep]

    r_asv, d_asv = _dense_rank(s_asv)
    r_cm, d_cm = _dense_rank(s_cm)

    # weighted tree whose prefix decides P_miss >= P_fa,non with exact integers
    combined = _Fenwick(d_asv)
    trees = {TARBF: _Fenwick(d_asv), NONBF: _Fenwick(d_asv), SPF: _Fenwick(d_asv)}
    weight = {TARBF: n_non, NONBF: n_tar, SPF: 0}
    in_set = {TARBF: 0, NONBF: 0, SPF: 0}

    order = np.argsort(-r_cm, kind="stable")
    r_cm_sorted = r_cm[order].tolist()
    r_asv_sorted = r_asv[order].tolist()
    lab_sorted = labels[order].tolist()
    ptr, n_rows = 0, len(order)

    eer_bona = np.empty(d_cm + 1)
    p_fa_spf = np.empty(d_cm + 1)
    t_tree, n_tree, s_tree = trees[TARBF], trees[NONBF], trees[SPF]

    for j in range(d_cm, -1, -1):
        # accepted on CM: rank > j
        while ptr < n_rows and r_cm_sorted[ptr] > j:
            lab, ra = lab_sorted[ptr], r_asv_sorted[ptr]
            trees[lab].add(ra, 1)
            if weight[lab]:
                combined.add(ra, weight[lab])
            in_set[lab] += 1
            ptr += 1
        st, sn, ss = in_set[TARBF], in_set[NONBF], in_set[SPF]
        target = n_tar * sn + n_non * st - n_tar * n_non
        k = combined.lower_bound(target)

        def rates(i):
            pt, pn, ps = t_tree.prefix(i), n_tree.prefix(i), s_tree.prefix(i)
            return (n_tar - st + pt) / n_tar, (sn - pn) / n_non, (ss - ps) / n_spf

        m1, f1, q1 = rates(k)
        if k == 0 or m1 == f1:
            eer_bona[j], p_fa_spf[j] = m1, q1
            if k == 0:
                eer_bona[j] = max(m1, f1)
            continue
        m0, f0, q0 = rates(k - 1)
        t = (f0 - m0) / ((f0 - m0) + (m1 - f1))
        eer_bona[j] = m0 + t * (m1 - m0)
        p_fa_spf[j] = q0 + t * (q1 - q0)
    return eer_bona, p_fa_spf


def _min_max_along_path(e, s):
    """Minimum over the piecewise-linear path of max(e, s)."""
    best = np.min(np.maximum(e, s))
    g = e - s
    g0, g1 = g[:-1], g[1:]
    crosses = (g0 * g1 < 0)
    if np.any(crosses):
        u = g0[crosses] / (g0[crosses] - g1[crosses])
        e0, e1 = e[:-1][crosses], e[1:][crosses]
        best = min(best, np.min(e0 + u * (e1 - e0)))
    return float(best)


def compute_t_eer(s_asv, s_cm, labels):
    """Concurrent tandem EER: the rate where P_miss = P_fa,non = P_fa,spf.

    Defined as the minimum of ``max(P_miss, P_fa,spf)`` along the
    interpolated t-EER path (see :func:`t_eer_path`); when the path crosses
    the spoof-FA curve this is the interpolated common error rate.
    """
    e, s = t_eer_path(s_asv, s_cm, labels)
    return _min_max_along_path(e, s)


@dataclass(frozen=True)
class MetricsReport:
    sasv_eer: float
    eer_threshold: float
    cllr: float
    cllr_min: float
    cllr_calib: float
    t_eer: float

    def to_dict(self):
        return {
            "sasv_eer": self.sasv_eer,
            "eer_threshold": self.eer_threshold,
            "cllr": self.cllr,
            "cllr_min": self.cllr_min,
            "cllr_calib": self.cllr_calib,
            "t_eer": self.t_eer,
        }


def metrics_report(fused, s_asv_in, s_cm_in, labels):
    """Full report for fused scores plus the per-stream inputs the fusion consumed."""
    labels = np.asarray(labels)
    is_target = labels == TARBF
    eer, thr = compute_eer(fused, is_target)
    cllr = compute_cllr(fused, is_target)
    cllr_min = compute_cllr_min(fused, is_target)
    return MetricsReport(
        sasv_eer=eer,
        eer_threshold=thr,
        cllr=cllr,
        cllr_min=cllr_min,
        cllr_calib=cllr - cllr_min,
        t_eer=compute_t_eer(s_asv_in, s_cm_in, labels),
    )
