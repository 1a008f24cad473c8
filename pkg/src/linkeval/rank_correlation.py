"""Rank vectors and the Spearman / Kendall coefficients between them."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import DomainError, UndefinedCorrelationError

__all__ = ["ranks_from_scores", "spearman", "kendall_tau", "correlation", "is_constant"]

COEFFICIENTS = ("spearman", "kendall")


def ranks_from_scores(scores, higher_is_better=True):
    """Rank 1 goes to the best score; tied scores share their midrank."""
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1 or len(scores) < 2:
        raise DomainError("need at least two scores to rank")
    return rankdata(-scores if higher_is_better else scores)


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError(f"rank vectors differ in shape: {a.shape} vs {b.shape}")
    if len(a) < 2:
        raise DomainError("need at least two ranked items")
    return a, b


def is_constant(a):
    a = np.asarray(a)
    return bool(np.all(a == a[0]))


def spearman(a, b):
    """Pearson correlation of two rank vectors."""
    a, b = _pair(a, b)
    da = a - a.mean()
    db = b - b.mean()
    sa = np.sqrt(np.sum(da * da))
    sb = np.sqrt(np.sum(db * db))
    if sa == 0 or sb == 0:
        raise UndefinedCorrelationError("constant ranking has no rank correlation")
    return float(np.clip(np.sum(da * db) / (sa * sb), -1.0, 1.0))


def kendall_tau(a, b):
    """Kendall's tau-a: ``(N_C - N_D)`` over all ``P(P-1)/2`` pairs.

    A pair tied in either vector counts as neither concordant nor discordant.
    """
    a, b = _pair(a, b)
    p = len(a)
    sa = np.sign(a[:, None] - a[None, :])
    sb = np.sign(b[:, None] - b[None, :])
    # Each unordered pair appears twice in the full matrix.
    s = np.sum(sa * sb) / 2
    return float(2 * s / (p * (p - 1)))


def correlation(a, b, coefficient="spearman"):
    """Dispatch on ``coefficient``; a constant vector is undefined for both."""
    if coefficient == "spearman":
        return spearman(a, b)
    if coefficient == "kendall":
        a, b = _pair(a, b)
        if is_constant(a) or is_constant(b):
            raise UndefinedCorrelationError("constant ranking has no rank correlation")
        return kendall_tau(a, b)
    raise DomainError(f"coefficient must be one of {COEFFICIENTS}, got {coefficient!r}")
