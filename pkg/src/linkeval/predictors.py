"""Similarity-based link predictors.

Every rule maps a training graph to a dense ``n x n`` score matrix; candidate
pairs read their score off that matrix.  Rules share intermediate products
(``A^2``, ``A^3``, degrees, ...) through :class:`GraphFeatures`, so scoring
all 25 algorithms on one split costs a handful of matrix products.

Notation: ``A`` adjacency, ``k`` degree vector, ``CN = A @ A``,
``L = D - A`` the combinatorial Laplacian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import DomainError, NumericError

__all__ = [
    "ALGORITHMS",
    "NEIGHBORHOOD_RULES",
    "MATRIX_RULES",
    "WALK_RULES",
    "DUPLICATE_IDS",
    "GraphFeatures",
    "RankedCandidates",
    "canonical_algorithm",
    "default_params",
    "resolve_params",
    "score_matrix",
    "candidate_scores",
    "score_candidates",
    "neighborhood_scores",
    "matrix_scores",
    "walk_scores",
    "rank_scores",
]

ALGORITHMS = (
    "CN", "RA", "LP", "AA", "PA", "Jaccard", "ACT", "Sim", "L3", "A3", "Katz",
    "LO", "Salton", "Sorensen", "HPI", "HDI", "LRW", "SRW", "LHN-1", "MFI",
    "LNBAA", "LNBRA", "S1", "CLE", "CCPA",
)
NEIGHBORHOOD_RULES = (
    "CN", "RA", "AA", "PA", "Jaccard", "Salton", "S1", "Sorensen", "HPI", "HDI",
    "LHN-1", "Sim", "CCPA", "LNBAA", "LNBRA",
)
MATRIX_RULES = ("LP", "Katz", "L3", "A3", "ACT", "MFI", "LO", "CLE")
WALK_RULES = ("LRW", "SRW")

# Salton and S1 share one cosine formula; both ids are kept so the roster has 25 entries.
DUPLICATE_IDS = (("Salton", "S1"),)

_ALIASES = {
    "sørensen": "Sorensen",
    "sorenson": "Sorensen",
    "sørenson": "Sorensen",
    "lhn1": "LHN-1",
    "jc": "Jaccard",
}
_BY_LOWER = {name.lower(): name for name in ALGORITHMS}

_SIG_DIGITS = 12


def canonical_algorithm(name):
    key = str(name).strip().lower()
    if key in _BY_LOWER:
        return _BY_LOWER[key]
    if key in _ALIASES:
        return _ALIASES[key]
    raise DomainError(f"unknown algorithm {name!r}; known: {', '.join(ALGORITHMS)}")


def _positive(x):
    return x > 0


def _unit(x):
    return 0 <= x <= 1


def _steps(x):
    return float(x).is_integer() and x >= 1


# name -> {param: (default, validator, description)}
_PARAM_SCHEMA = {
    "LP": {"epsilon": (0.001, _positive, "weight of length-3 paths, > 0")},
    "Katz": {"beta": (None, _positive, "path damping, 0 < beta < 1/lambda_max (None: auto)")},
    "LRW": {"steps": (3, _steps, "walk length t >= 1")},
    "SRW": {"steps": (3, _steps, "walk length t >= 1")},
    "LO": {"alpha": (0.1, _positive, "regularisation weight, > 0")},
    "CLE": {"alpha": (0.5, _unit, "weight kept on the leading eigencomponent, in [0, 1]")},
    "CCPA": {"alpha": (0.8, _unit, "common-neighbour weight, in [0, 1]")},
}


def default_params(alg):
    alg = canonical_algorithm(alg)
    return {k: v[0] for k, v in _PARAM_SCHEMA.get(alg, {}).items()}


def resolve_params(alg, params=None):
    """Merge ``params`` over the defaults of ``alg`` and validate them."""
    alg = canonical_algorithm(alg)
    schema = _PARAM_SCHEMA.get(alg, {})
    out = default_params(alg)
    for key, value in (params or {}).items():
        if key not in schema:
            raise DomainError(f"{alg} has no parameter {key!r}")
        if value is not None:
            _, valid, desc = schema[key]
            if not valid(value):
                raise DomainError(f"{alg}.{key}={value!r} outside admissible range ({desc})")
        out[key] = value
    return out


class GraphFeatures:
    """Lazily computed matrices of one training graph, shared across rules."""

    def __init__(self, graph):
        self.graph = graph
        self.n = graph.n_nodes
        self.m = graph.edge_count

    @cached_property
    def A(self):
        return self.graph.adjacency(dense=True)

    @cached_property
    def k(self):
        return self.A.sum(axis=1)

    @cached_property
    def A2(self):
        return self.A @ self.A

    @cached_property
    def A3(self):
        return self.A2 @ self.A

    @cached_property
    def laplacian(self):
        return np.diag(self.k) - self.A

    @cached_property
    def lambda_max(self):
        if self.m == 0:
            return 0.0
        return float(np.linalg.eigvalsh(self.A)[-1])

    def inv_degree(self, f=lambda k: k):
        """``1 / f(k)`` with zero wherever ``f(k) <= 0`` or ``k == 0``."""
        out = np.zeros(self.n)
        mask = self.k > 0
        val = f(self.k[mask])
        good = val > 0
        idx = np.flatnonzero(mask)[good]
        out[idx] = 1.0 / val[good]
        return out

    def weighted_common(self, w):
        """``sum_z A_xz w_z A_zy`` for a per-node weight vector ``w``."""
        return (self.A * w) @ self.A


def _safe_div(num, den):
    out = np.zeros_like(num, dtype=float)
    np.divide(num, den, out=out, where=den > 0)
    return out


# ---------------------------------------------------------------- local rules

def _cn(f):
    return f.A2


def _ra(f):
    return f.weighted_common(f.inv_degree())


def _aa(f):
    return f.weighted_common(f.inv_degree(np.log))


def _pa(f):
    return np.outer(f.k, f.k)


def _jaccard(f):
    union = f.k[:, None] + f.k[None, :] - f.A2
    return _safe_div(f.A2, union)


def _salton(f):
    return _safe_div(f.A2, np.sqrt(np.outer(f.k, f.k)))


def _sorensen(f):
    return _safe_div(2 * f.A2, f.k[:, None] + f.k[None, :])


def _hpi(f):
    return _safe_div(f.A2, np.minimum.outer(f.k, f.k))


def _hdi(f):
    return _safe_div(f.A2, np.maximum.outer(f.k, f.k))


def _lhn1(f):
    return _safe_div(f.A2, np.outer(f.k, f.k))


def _sim(f):
    # Jaccard overlap of closed neighbourhoods N[x] = {x} | Gamma(x).
    inter = f.A2 + 2 * f.A
    union = f.k[:, None] + f.k[None, :] + 2 - inter
    return _safe_div(inter, union)


def _ccpa(f, alpha):
    dist = shortest_path(f.graph.adjacency(), method="D", directed=False, unweighted=True)
    closeness = np.zeros_like(dist)
    finite = np.isfinite(dist) & (dist > 0)
    closeness[finite] = f.n / dist[finite]
    return alpha * f.A2 + (1 - alpha) * closeness


def _lnb(f, degree_weight):
    if f.m == 0:
        raise NumericError("local naive Bayes needs at least one training edge")
    prior = f.n * (f.n - 1) / 2 / f.m - 1
    if prior <= 0:
        raise NumericError("local naive Bayes prior undefined on a complete graph")
    closed = np.diag(f.A3) / 2
    wedges = f.k * (f.k - 1) / 2
    role = (closed + 1) / (wedges - closed + 1)
    w = (math.log(prior) + np.log(role)) * degree_weight
    return f.weighted_common(w)


def _lnbaa(f):
    return _lnb(f, f.inv_degree(np.log))


def _lnbra(f):
    return _lnb(f, f.inv_degree())


# --------------------------------------------------------------- global rules

def _lp(f, epsilon):
    return f.A2 + epsilon * f.A3


def _a3(f):
    return f.A3


def _l3(f):
    h = f.inv_degree(np.sqrt)
    return (f.A * h) @ f.A @ (f.A * h).T


def _katz(f, beta):
    lam = f.lambda_max
    if beta is None:
        beta = 0.01 if lam <= 0 else min(0.01, 0.85 / lam)
    elif lam > 0 and beta >= 1 / lam:
        raise DomainError(f"Katz beta={beta} must be below 1/lambda_max={1 / lam:.6g}")
    eye = np.eye(f.n)
    try:
        return np.linalg.inv(eye - beta * f.A) - eye
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Katz: {exc}") from exc


def _act(f):
    try:
        lp = np.linalg.pinv(f.laplacian, hermitian=True)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"ACT: {exc}") from exc
    d = np.diag(lp)
    resistance = d[:, None] + d[None, :] - 2 * lp
    # Pairs of isolated nodes have zero pseudo-resistance; they score 0.
    tol = 1e-12 * max(1.0, float(np.abs(d).max(initial=0.0)))
    out = np.zeros_like(resistance)
    np.divide(1.0, resistance, out=out, where=resistance > tol)
    return out


def _mfi(f):
    try:
        return np.linalg.inv(np.eye(f.n) + f.laplacian)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"MFI: {exc}") from exc


def _lo(f, alpha):
    # S = alpha * A (alpha A^T A + I)^-1 A^T A, with A symmetric.
    try:
        z = np.linalg.solve(alpha * f.A2 + np.eye(f.n), f.A2)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"LO: {exc}") from exc
    s = alpha * f.A @ z
    return (s + s.T) / 2


def _cle(f, alpha):
    # Two-hop similarity with the leading eigencomponent of A^2 rescaled by
    # alpha: that component mostly encodes the degree product, so shrinking it
    # stops hubs from dominating the ranking.
    if f.m == 0:
        return np.zeros((f.n, f.n))
    vals, vecs = np.linalg.eigh(f.A)
    lead = vecs[:, -1]
    return f.A2 - (1 - alpha) * vals[-1] ** 2 * np.outer(lead, lead)


# ----------------------------------------------------------------- walk rules

def _transition_powers(f, steps):
    p = f.A * f.inv_degree()[:, None]
    q = f.k / (2 * f.m) if f.m else np.zeros(f.n)
    pt = np.eye(f.n)
    for _ in range(int(steps)):
        pt = pt @ p
        s = q[:, None] * pt
        yield s + s.T


def _lrw(f, steps):
    out = None
    for out in _transition_powers(f, steps):
        pass
    return out


def _srw(f, steps):
    return sum(_transition_powers(f, steps))


_RULES = {
    "CN": _cn, "RA": _ra, "AA": _aa, "PA": _pa, "Jaccard": _jaccard,
    "Salton": _salton, "S1": _salton, "Sorensen": _sorensen, "HPI": _hpi,
    "HDI": _hdi, "LHN-1": _lhn1, "Sim": _sim, "CCPA": _ccpa,
    "LNBAA": _lnbaa, "LNBRA": _lnbra,
    "LP": _lp, "Katz": _katz, "L3": _l3, "A3": _a3, "ACT": _act, "MFI": _mfi,
    "LO": _lo, "CLE": _cle,
    "LRW": _lrw, "SRW": _srw,
}
assert set(_RULES) == set(ALGORITHMS)


def score_matrix(graph, alg, params=None, features=None):
    """Full ``n x n`` score matrix of algorithm ``alg`` on ``graph``."""
    alg = canonical_algorithm(alg)
    kwargs = resolve_params(alg, params)
    f = features if features is not None else GraphFeatures(graph)
    return np.asarray(_RULES[alg](f, **kwargs), dtype=float)


def _quantize(s):
    """Round to ~12 significant digits relative to the largest magnitude.

    Mathematically equal scores computed along different float paths then
    compare equal, so ties are decided by the seeded shuffle rather than by
    rounding noise.
    """
    scale = float(np.abs(s).max(initial=0.0))
    if scale == 0.0:
        return s
    decimals = _SIG_DIGITS - int(math.ceil(math.log10(scale)))
    return np.round(s, decimals) + 0.0


@dataclass(frozen=True, eq=False)
class RankedCandidates:
    """Candidates in descending score order, ties broken by a seeded shuffle.

    ``is_positive[i]`` tells whether the pair at rank ``i + 1`` is a probe edge.
    """

    pairs: np.ndarray
    scores: np.ndarray
    is_positive: np.ndarray
    tie_seed: int = 0

    def __len__(self):
        return len(self.scores)

    @property
    def n_cand(self):
        return len(self.scores)

    @property
    def n_pos(self):
        return int(np.count_nonzero(self.is_positive))

    @property
    def n_neg(self):
        return self.n_cand - self.n_pos

    @property
    def positive_ranks(self):
        """1-based positions of the positives, ascending."""
        return np.flatnonzero(self.is_positive) + 1

    @classmethod
    def from_labels(cls, labels):
        """Strictly ordered list: ``labels`` already in rank order, no ties."""
        labels = np.asarray(labels, dtype=bool)
        n = len(labels)
        scores = np.arange(n, 0, -1, dtype=float)
        pairs = np.column_stack([np.arange(n), np.arange(n)])
        return cls(pairs=pairs, scores=scores, is_positive=labels)


def rank_scores(scores, is_positive, tie_seed=0, pairs=None):
    """Sort by descending score; equal scores are shuffled with ``tie_seed``."""
    scores = np.asarray(scores, dtype=float)
    is_positive = np.asarray(is_positive, dtype=bool)
    if scores.shape != is_positive.shape:
        raise DomainError("scores and labels differ in length")
    if pairs is None:
        pairs = np.column_stack([np.arange(len(scores))] * 2)
    jitter = np.random.default_rng(tie_seed).random(len(scores))
    order = np.lexsort((jitter, -scores))
    return RankedCandidates(
        pairs=np.asarray(pairs)[order],
        scores=scores[order],
        is_positive=is_positive[order],
        tie_seed=tie_seed,
    )


def candidate_scores(graph, cand, alg, params=None, features=None):
    """Scores of the candidate pairs, in candidate order (not ranked)."""
    alg = canonical_algorithm(alg)
    mat = score_matrix(graph, alg, params, features)
    s = mat[cand.pairs[:, 0], cand.pairs[:, 1]]
    if not np.all(np.isfinite(s)):
        raise NumericError(f"{alg} produced non-finite scores")
    return _quantize(s)


def score_candidates(g_train, cand, alg, params=None, tie_seed=0, features=None):
    """Score every pair of ``cand`` with ``alg`` and rank them."""
    s = candidate_scores(g_train, cand, alg, params, features)
    return rank_scores(s, cand.positive_flags, tie_seed, cand.pairs)


def _family(rules, family):
    def run(g_train, cand, rule, params=None, tie_seed=0, features=None):
        name = canonical_algorithm(rule)
        if name not in rules:
            raise DomainError(f"{name} is not a {family} rule")
        return score_candidates(g_train, cand, name, params, tie_seed, features)

    run.__name__ = f"{family}_scores"
    run.__doc__ = f"Restriction of :func:`score_candidates` to the {family} rules {rules}."
    return run


neighborhood_scores = _family(NEIGHBORHOOD_RULES, "neighborhood")
matrix_scores = _family(MATRIX_RULES, "matrix")
walk_scores = _family(WALK_RULES, "walk")
