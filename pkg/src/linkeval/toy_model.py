"""Two consistent metrics blurred by independent noise.

Metric X scores algorithm ``j`` on network ``i`` as ``j + sigma_ij`` and metric
Y as ``j + eta_ij``, with both noises uniform on ``[0, noise_high)``.  Per
network the two rankings agree only moderately, yet their mean ranks
converge; comparing the two aggregation methods on this model shows why the
per-network average alone can understate consistency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from .errors import DomainError
from .rank_correlation import correlation

__all__ = ["ToyConfig", "generate_toy_scores", "run_toy", "toy_traces"]


@dataclass(frozen=True)
class ToyConfig:
    P: int = 100
    Q: int = 500
    noise_high: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.P < 2:
            raise DomainError("P must be >= 2")
        if self.Q < 1:
            raise DomainError("Q must be >= 1")
        if self.noise_high is None:
            object.__setattr__(self, "noise_high", float(self.P))
        if not self.noise_high > 0:
            raise DomainError("noise_high must be > 0")


def generate_toy_scores(cfg):
    """Return the ``Q x P`` score tables ``(X, Y)``."""
    rng = np.random.default_rng(cfg.seed)
    base = np.arange(1, cfg.P + 1, dtype=float)
    x = base + rng.uniform(0.0, cfg.noise_high, size=(cfg.Q, cfg.P))
    y = base + rng.uniform(0.0, cfg.noise_high, size=(cfg.Q, cfg.P))
    return x, y


def _row_spearman(rx, ry):
    dx = rx - rx.mean(axis=1, keepdims=True)
    dy = ry - ry.mean(axis=1, keepdims=True)
    num = np.sum(dx * dy, axis=1)
    den = np.sqrt(np.sum(dx * dx, axis=1) * np.sum(dy * dy, axis=1))
    return num / den


def run_toy(cfg, method="method1", coefficient="spearman", scores=None):
    """X-Y correlation for every prefix of ``Q' = 1..Q`` networks.

    ``method1`` averages the per-network correlations of the first ``Q'``
    rows; ``method2`` correlates the mean rank vectors of those rows.
    """
    x, y = scores if scores is not None else generate_toy_scores(cfg)
    rx = rankdata(-x, axis=1)
    ry = rankdata(-y, axis=1)
    q = np.arange(1, len(x) + 1)
    if method == "method1":
        if coefficient == "spearman":
            per_net = _row_spearman(rx, ry)
        else:
            per_net = np.array([correlation(a, b, coefficient) for a, b in zip(rx, ry)])
        return np.cumsum(per_net) / q
    if method == "method2":
        mean_x = np.cumsum(rx, axis=0) / q[:, None]
        mean_y = np.cumsum(ry, axis=0) / q[:, None]
        if coefficient == "spearman":
            # Mean ranks are scores in their own right; rank them again.
            return _row_spearman(rankdata(mean_x, axis=1), rankdata(mean_y, axis=1))
        return np.array([correlation(rankdata(a), rankdata(b), coefficient)
                         for a, b in zip(mean_x, mean_y)])
    raise DomainError(f"method must be method1 or method2, got {method!r}")


def toy_traces(cfg, seeds, methods=("method1", "method2"), coefficient="spearman"):
    """Long table ``(method, Q, value, seed)`` over several seeds.

    Rows with ``seed == "mean"`` hold the average over seeds at each ``Q``.
    """
    frames = []
    for method in methods:
        traces = []
        for seed in seeds:
            c = ToyConfig(P=cfg.P, Q=cfg.Q, noise_high=cfg.noise_high, seed=seed)
            trace = run_toy(c, method, coefficient)
            traces.append(trace)
            frames.append(pd.DataFrame({"method": method, "Q": np.arange(1, cfg.Q + 1),
                                        "value": trace, "seed": str(seed)}))
        frames.append(pd.DataFrame({"method": method, "Q": np.arange(1, cfg.Q + 1),
                                    "value": np.mean(traces, axis=0), "seed": "mean"}))
    return pd.concat(frames, ignore_index=True)
