"""Evaluation metrics for a ranked candidate list.

Seven threshold-dependent metrics are read off the confusion matrix of the
top-``k`` cut; five threshold-free metrics integrate over every cut.  All
functions take a :class:`~linkeval.predictors.RankedCandidates` and return a
plain float.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import rankdata

from .errors import DomainError, UndefinedMetricError
from .graph import round_half_up

__all__ = [
    "THRESHOLD_METRICS",
    "THRESHOLD_FREE_METRICS",
    "METRICS",
    "canonical_metric",
    "ConfusionCounts",
    "ThresholdRule",
    "MetricSpec",
    "MetricScore",
    "parse_metric",
    "confusion_at_k",
    "threshold_metric",
    "threshold_metric_array",
    "auc_exact",
    "auc_sampled",
    "aupr",
    "auc_precision",
    "ndcg",
    "auc_mroc",
    "mroc_curve",
    "evaluate",
    "evaluate_many",
]

THRESHOLD_METRICS = ("Precision", "Recall", "Accuracy", "Specificity", "F1", "Youden", "MCC")
THRESHOLD_FREE_METRICS = ("AUC", "AUPR", "AUC-Precision", "NDCG", "AUC-mROC")
METRICS = THRESHOLD_METRICS + THRESHOLD_FREE_METRICS

_BY_LOWER = {m.lower(): m for m in METRICS}
_BY_LOWER.update({"f1-measure": "F1", "auc-pr": "AUPR", "aucprecision": "AUC-Precision",
                  "aucmroc": "AUC-mROC", "mroc": "AUC-mROC"})


def canonical_metric(name):
    try:
        return _BY_LOWER[name.strip().lower()]
    except KeyError:
        raise DomainError(f"unknown metric {name!r}; known: {', '.join(METRICS)}") from None


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int
    k: int
    n_pos: int
    n_neg: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise DomainError(f"negative confusion count in {self}")
        if self.tp + self.fp != self.k or self.tp + self.fn != self.n_pos \
                or self.tn + self.fp != self.n_neg:
            raise DomainError(f"inconsistent confusion counts {self}")

    @property
    def n_cand(self):
        return self.n_pos + self.n_neg

    @classmethod
    def from_tp(cls, tp, k, n_pos, n_neg):
        return cls(tp=tp, fp=k - tp, tn=n_neg - k + tp, fn=n_pos - tp,
                   k=k, n_pos=n_pos, n_neg=n_neg)


@dataclass(frozen=True)
class ThresholdRule:
    """How the cut ``k`` is chosen on a given candidate list.

    ``rho``: ``k = round(rho * |U - E^T|)``; ``gamma``: ``k = round(gamma * |E^P|)``;
    ``k``: an absolute count.
    """

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("rho", "gamma", "k"):
            raise DomainError(f"threshold kind must be rho, gamma or k, got {self.kind!r}")
        if self.kind == "rho" and not 0 < self.value <= 1:
            raise DomainError(f"rho must lie in (0, 1], got {self.value}")
        if self.kind == "gamma" and self.value < 0:
            raise DomainError(f"gamma must be >= 0, got {self.value}")
        if self.kind == "k" and (self.value < 1 or not float(self.value).is_integer()):
            raise DomainError(f"k must be a positive integer, got {self.value}")

    def resolve(self, n_cand, n_pos):
        if self.kind == "rho":
            k = round_half_up(self.value * n_cand)
        elif self.kind == "gamma":
            k = round_half_up(self.value * n_pos)
        else:
            k = int(self.value)
        if not 1 <= k <= n_cand:
            raise DomainError(f"threshold {self} gives k={k} outside 1..{n_cand}")
        return k

    def __str__(self):
        if self.kind == "k":
            return f"k={int(self.value)}"
        return f"{self.kind}={self.value:g}"


@dataclass(frozen=True)
class MetricSpec:
    """A metric plus, for threshold-dependent ones, its threshold rule."""

    metric: str
    threshold: ThresholdRule | None = None

    def __post_init__(self):
        object.__setattr__(self, "metric", canonical_metric(self.metric))
        dependent = self.metric in THRESHOLD_METRICS
        if dependent and self.threshold is None:
            raise DomainError(f"{self.metric} needs a threshold, e.g. {self.metric}@rho=0.1")
        if not dependent and self.threshold is not None:
            raise DomainError(f"{self.metric} is threshold-free")

    def __str__(self):
        return self.metric if self.threshold is None else f"{self.metric}@{self.threshold}"

    @property
    def threshold_dependent(self):
        return self.threshold is not None


_SPEC_RE = re.compile(r"^\s*([^@]+?)\s*(?:@\s*(rho|gamma|k)\s*=\s*([0-9.eE+-]+)\s*)?$")


def parse_metric(text):
    """Parse ``"AUC"``, ``"Precision@rho=0.1"``, ``"F1@k=20"`` into a MetricSpec."""
    if isinstance(text, MetricSpec):
        return text
    m = _SPEC_RE.match(str(text))
    if not m:
        raise DomainError(f"cannot parse metric spec {text!r}")
    name, kind, value = m.groups()
    rule = ThresholdRule(kind, float(value)) if kind else None
    return MetricSpec(name, rule)


@dataclass(frozen=True)
class MetricScore:
    value: float
    metric: str
    network: str = ""
    algorithm: str = ""
    split_seed: int = 0
    run: int = 0


# ------------------------------------------------------------ threshold metrics

def confusion_at_k(ranked, k):
    """Confusion matrix when the top ``k`` candidates are declared links."""
    n_cand = ranked.n_cand
    if not 1 <= k <= n_cand:
        raise DomainError(f"k={k} outside 1..{n_cand}")
    tp = int(np.count_nonzero(ranked.is_positive[:k]))
    return ConfusionCounts.from_tp(tp, int(k), ranked.n_pos, ranked.n_neg)


def threshold_metric_array(metric, tp, k, n_pos, n_neg):
    """Vectorised threshold metrics; ``tp`` and ``k`` broadcast together.

    Degenerate cases: F1 is 0 when Precision + Recall is 0, MCC is 0 when any
    factor of its denominator is 0.
    """
    metric = canonical_metric(metric)
    tp = np.asarray(tp, dtype=np.int64)
    k = np.asarray(k, dtype=np.int64)
    n_cand = n_pos + n_neg
    fp = k - tp
    fn = n_pos - tp
    tn = n_neg - fp
    if metric in ("Recall", "Youden", "MCC") and n_pos == 0:
        raise UndefinedMetricError(f"{metric} needs at least one positive")
    if metric in ("Specificity", "Youden", "MCC") and n_neg == 0:
        raise UndefinedMetricError(f"{metric} needs at least one negative")
    if metric == "Precision":
        return tp / k
    if metric == "Recall":
        return tp / n_pos
    if metric == "Accuracy":
        return (tp + tn) / n_cand
    if metric == "Specificity":
        return tn / n_neg
    if metric == "F1":
        # 2PR / (P + R) simplifies to 2 TP / (k + |E^P|).
        return 2 * tp / (k + n_pos)
    if metric == "Youden":
        return tp / n_pos + tn / n_neg - 1
    if metric == "MCC":
        num = (tp * tn - fp * fn).astype(float)
        den = np.sqrt(k.astype(float) * n_pos * n_neg * (n_cand - k).astype(float))
        out = np.zeros(np.broadcast(num, den).shape)
        np.divide(num, den, out=out, where=den > 0)
        return out
    raise DomainError(f"{metric} is not a threshold-dependent metric")


def threshold_metric(c, metric):
    """Value of a threshold-dependent metric for one confusion matrix."""
    return float(threshold_metric_array(metric, c.tp, c.k, c.n_pos, c.n_neg))


# ------------------------------------------------------- threshold-free metrics

def _require(ranked, pos=True, neg=False):
    if pos and ranked.n_pos == 0:
        raise UndefinedMetricError("metric undefined without positive candidates")
    if neg and ranked.n_neg == 0:
        raise UndefinedMetricError("metric undefined without negative candidates")


def auc_exact(ranked):
    """Probability a positive outscores a negative, ties counting one half.

    Computed from the midranks of the scores (Mann-Whitney), so it does not
    depend on how ties were ordered in ``ranked``.
    """
    _require(ranked, neg=True)
    midranks = rankdata(ranked.scores)
    n_pos, n_neg = ranked.n_pos, ranked.n_neg
    w = midranks[ranked.is_positive].sum()
    return float((w - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def auc_sampled(ranked, n, seed=0):
    """AUC from ``n`` random positive-negative comparisons."""
    _require(ranked, neg=True)
    if n < 1:
        raise DomainError("need at least one sampled pair")
    rng = np.random.default_rng(seed)
    pos = ranked.scores[ranked.is_positive]
    neg = ranked.scores[~ranked.is_positive]
    sp = pos[rng.integers(len(pos), size=n)]
    sn = neg[rng.integers(len(neg), size=n)]
    n1 = np.count_nonzero(sp > sn)
    n2 = np.count_nonzero(sp == sn)
    return (n1 + 0.5 * n2) / n


def aupr(ranked):
    """Area under the precision-recall curve from the positive ranks."""
    _require(ranked)
    r = ranked.positive_ranks.astype(float)
    i = np.arange(1, len(r) + 1)
    r_next = np.append(r[1:], ranked.n_cand + 1)
    return float((np.sum(i / r) + np.sum(i / (r_next - 1))) / (2 * len(r)))


def auc_precision(ranked):
    """Area under Precision(k) against the normalised threshold k / |U - E^T|.

    The curve is a step function on the grid k = 1..n_cand, so the area is the
    mean precision over all cuts.
    """
    _require(ranked)
    tp = np.cumsum(ranked.is_positive)
    k = np.arange(1, ranked.n_cand + 1)
    return float(np.mean(tp / k))


def ndcg(ranked):
    _require(ranked)
    r = ranked.positive_ranks
    dcg = np.sum(1 / np.log2(1 + r))
    ideal = np.sum(1 / np.log2(1 + np.arange(1, len(r) + 1)))
    return float(dcg / ideal)


def mroc_curve(ranked):
    """Points ``(mFPR, mTPR)`` of the magnified ROC curve for k = 0..n_cand."""
    _require(ranked, neg=True)
    n_pos, n_neg = ranked.n_pos, ranked.n_neg
    tp = np.concatenate([[0], np.cumsum(ranked.is_positive)]).astype(float)
    fp = np.arange(ranked.n_cand + 1) - tp
    log_j = math.log(1 + n_neg)
    log_z = math.log(1 + n_pos)
    mfpr = np.log1p(fp) / log_j
    h = np.log1p(fp * n_pos / n_neg) / log_z
    mtpr = mfpr.copy()
    # H reaches 1 only at FP = |U - E|, where mFPR = 1 and the limit is mTPR = mFPR.
    live = fp < n_neg
    mtpr[live] += (np.log1p(tp[live]) / log_z - h[live]) / (1 - h[live]) * (1 - mfpr[live])
    return mfpr, mtpr


def auc_mroc(ranked):
    x, y = mroc_curve(ranked)
    return float(trapezoid(y, x))


# ------------------------------------------------------------------- dispatch

_FREE = {
    "AUC": auc_exact,
    "AUPR": aupr,
    "AUC-Precision": auc_precision,
    "NDCG": ndcg,
    "AUC-mROC": auc_mroc,
}


def evaluate(ranked, spec, auc_samples=None, seed=0):
    """Value of one metric spec; ``auc_samples`` switches AUC to sampling."""
    spec = parse_metric(spec)
    if spec.threshold is None:
        if spec.metric == "AUC" and auc_samples:
            return auc_sampled(ranked, auc_samples, seed)
        return _FREE[spec.metric](ranked)
    k = spec.threshold.resolve(ranked.n_cand, ranked.n_pos)
    return threshold_metric(confusion_at_k(ranked, k), spec.metric)


def evaluate_many(ranked, specs, auc_samples=None, seed=0):
    """Evaluate several specs; undefined values come back as NaN."""
    out = []
    for spec in specs:
        try:
            out.append(evaluate(ranked, spec, auc_samples, seed))
        except (DomainError, UndefinedMetricError):
            out.append(math.nan)
    return out
