"""Metric-consistency experiment: evaluate, rank, correlate, sweep.

The expensive part is scoring (network x repeat x algorithm); everything
downstream works on the resulting :class:`ScoreTable`, so one evaluation
feeds the correlation matrices, the Q-sweep and the threshold sweep.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import pandas as pd

from . import metrics as M
from .errors import (
    ConfigError,
    DomainError,
    IncompatibleInputError,
    LinkEvalError,
    UndefinedCorrelationError,
)
from .graph import candidate_set, split_train_probe
from .predictors import (
    ALGORITHMS,
    DUPLICATE_IDS,
    GraphFeatures,
    canonical_algorithm,
    score_candidates,
)
from .rank_correlation import correlation, ranks_from_scores

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_METRICS",
    "ExperimentConfig",
    "ScoreTable",
    "CorrelationResult",
    "derive_seed",
    "evaluate_network",
    "evaluate_corpus",
    "correlation_matrix",
    "method1_correlations",
    "method2_correlations",
    "q_convergence_sweep",
    "summarize_q_sweep",
    "threshold_specs",
    "threshold_sweep",
]

DEFAULT_METRICS = ("Precision", "AUC", "AUPR", "AUC-Precision", "NDCG", "AUC-mROC")
AGGREGATIONS = ("method1", "method2")
COLUMNS = ["network", "algorithm", "metric", "run", "value"]

# Ids sharing one scoring rule also share tie-break seeds, so they score alike.
_RULE_KEY = {dup: first for first, *rest in DUPLICATE_IDS for dup in rest}


def derive_seed(master_seed, *keys):
    """Child seed from ``master_seed`` and a path of keys.

    Each key is hashed independently, so adding an algorithm or a network
    leaves every other cell's seed untouched.
    """
    words = [int(master_seed) & 0xFFFFFFFF, (int(master_seed) >> 32) & 0xFFFFFFFF]
    for key in keys:
        digest = hashlib.blake2b(repr(key).encode(), digest_size=8).digest()
        words.extend(np.frombuffer(digest, dtype=np.uint32).tolist())
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1


@dataclass(frozen=True)
class ExperimentConfig:
    probe_fraction: float = 0.1
    repeats: int = 10
    algorithms: tuple = ALGORITHMS
    metrics: tuple = DEFAULT_METRICS
    # Applied to threshold-dependent metrics listed without an explicit rule.
    threshold: str = "rho=0.1"
    coefficient: str = "spearman"
    aggregation: str = "method1"
    master_seed: int = 0
    q_values: tuple = tuple(range(10, 301, 10))
    runs: int = 10
    rho_values: tuple = (0.01, 0.05, 0.1, 0.2, 0.4)
    gamma_values: tuple = (0.5, 1.0, 2.0, 5.0, 10.0)
    auc_samples: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        problems = {}
        for name, value in (("algorithms", self.algorithms), ("metrics", self.metrics),
                            ("q_values", self.q_values), ("rho_values", self.rho_values),
                            ("gamma_values", self.gamma_values)):
            if isinstance(value, str):
                value = (value,)
            object.__setattr__(self, name, tuple(value))
        if not 0 < self.probe_fraction < 1:
            problems["probe_fraction"] = "must lie in (0, 1)"
        if not isinstance(self.repeats, int) or self.repeats < 1:
            problems["repeats"] = "must be an integer >= 1"
        if not isinstance(self.runs, int) or self.runs < 1:
            problems["runs"] = "must be an integer >= 1"
        try:
            algs = tuple(canonical_algorithm(a) for a in self.algorithms)
            if not algs:
                problems["algorithms"] = "must not be empty"
            object.__setattr__(self, "algorithms", algs)
        except DomainError as exc:
            problems["algorithms"] = str(exc)
        try:
            rule = M.parse_metric(f"Precision@{self.threshold}").threshold
            specs = []
            for text in self.metrics:
                text = str(text).strip()
                if "@" not in text and M.canonical_metric(text) in M.THRESHOLD_METRICS:
                    specs.append(str(M.MetricSpec(text, rule)))
                else:
                    specs.append(str(M.parse_metric(text)))
            if not specs:
                problems["metrics"] = "must not be empty"
            if len(set(specs)) != len(specs):
                problems["metrics"] = "duplicate metric specs"
            object.__setattr__(self, "metrics", tuple(specs))
        except DomainError as exc:
            problems["metrics"] = str(exc)
        if self.coefficient not in ("spearman", "kendall"):
            problems["coefficient"] = "must be 'spearman' or 'kendall'"
        if self.aggregation not in AGGREGATIONS:
            problems["aggregation"] = "must be 'method1' or 'method2'"
        if any(not isinstance(q, int) or q < 1 for q in self.q_values):
            problems["q_values"] = "must be positive integers"
        if any(not 0 < r <= 1 for r in self.rho_values):
            problems["rho_values"] = "each rho must lie in (0, 1]"
        if any(g < 0 for g in self.gamma_values):
            problems["gamma_values"] = "each gamma must be >= 0"
        if self.auc_samples is not None and (not isinstance(self.auc_samples, int)
                                             or self.auc_samples < 1):
            problems["auc_samples"] = "must be null or a positive integer"
        if not isinstance(self.params, dict):
            problems["params"] = "must map algorithm names to parameter tables"
        if problems:
            raise ConfigError(problems)

    @property
    def metric_specs(self):
        return tuple(M.parse_metric(m) for m in self.metrics)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError({k: "unknown field" for k in unknown})
        return cls(**data)

    def to_dict(self):
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out

    def replace(self, **changes):
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(changes)
        return type(self)(**data)


class ScoreTable:
    """Long-format table of metric values, one row per (network, algorithm, metric, run)."""

    def __init__(self, raw):
        raw = pd.DataFrame(raw, columns=COLUMNS) if not isinstance(raw, pd.DataFrame) else raw
        missing = set(COLUMNS) - set(raw.columns)
        if missing:
            raise IncompatibleInputError(f"score table lacks columns {sorted(missing)}")
        self.raw = raw[COLUMNS].reset_index(drop=True)
        self.raw["network"] = self.raw["network"].astype(str)
        self.raw["value"] = self.raw["value"].astype(float)

    def __len__(self):
        return len(self.raw)

    @property
    def networks(self):
        return list(dict.fromkeys(self.raw["network"]))

    @property
    def algorithms(self):
        return list(dict.fromkeys(self.raw["algorithm"]))

    @property
    def metrics(self):
        return list(dict.fromkeys(self.raw["metric"]))

    def mean(self):
        """Average over runs; a missing run makes the averaged cell missing."""
        keys = ["network", "algorithm", "metric"]
        out = self.raw.groupby(keys, sort=False)["value"].mean().reset_index()
        incomplete = self.raw["value"].isna().groupby(
            [self.raw[k] for k in keys], sort=False).any().to_numpy()
        out.loc[incomplete, "value"] = math.nan
        return out

    @classmethod
    def concat(cls, tables):
        return cls(pd.concat([t.raw for t in tables], ignore_index=True))

    def subset(self, networks=None, metrics=None):
        raw = self.raw
        if networks is not None:
            raw = raw[raw["network"].isin(list(networks))]
        if metrics is not None:
            raw = raw[raw["metric"].isin(list(metrics))]
        return ScoreTable(raw)


def _evaluate_repeat(graph, network_id, repeat, cfg):
    split_seed = derive_seed(cfg.master_seed, network_id, repeat)
    split = split_train_probe(graph, cfg.probe_fraction, split_seed)
    cand = candidate_set(graph, split)
    g_train = split.train_graph()
    features = GraphFeatures(g_train)
    specs = cfg.metric_specs
    rows = []
    for alg in cfg.algorithms:
        tie_seed = derive_seed(cfg.master_seed, network_id, repeat, _RULE_KEY.get(alg, alg))
        try:
            ranked = score_candidates(g_train, cand, alg, cfg.params.get(alg), tie_seed, features)
            values = M.evaluate_many(ranked, specs, cfg.auc_samples, tie_seed)
        except (LinkEvalError, np.linalg.LinAlgError, FloatingPointError) as exc:
            logger.warning("%s run %d: %s failed: %s", network_id, repeat, alg, exc)
            values = [math.nan] * len(specs)
        for spec, value in zip(specs, values):
            rows.append((network_id, alg, str(spec), repeat, value))
    return rows


def _unit(args):
    return _evaluate_repeat(*args)


def evaluate_corpus(networks, cfg, jobs=1):
    """Evaluate every ``(network, repeat)`` cell of a corpus.

    ``networks`` maps network id to :class:`~linkeval.graph.Graph`.  Rows come
    out in corpus order, then repeat, algorithm and metric order, whatever
    ``jobs`` is.
    """
    items = [(g, nid, r, cfg) for nid, g in networks.items() for r in range(cfg.repeats)]
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_unit, items))
    else:
        chunks = [_unit(item) for item in items]
    return ScoreTable(list(itertools.chain.from_iterable(chunks)))


def evaluate_network(g, cfg, network_id="network", jobs=1):
    return evaluate_corpus({network_id: g}, cfg, jobs)


# --------------------------------------------------------------- correlations

@dataclass
class CorrelationResult:
    """Symmetric metric-by-metric correlation matrix.

    ``counts[i, j]`` is the number of networks behind entry ``(i, j)``; an
    entry with count 0 is missing (NaN).
    """

    metrics: list
    values: np.ndarray
    counts: np.ndarray
    method: str
    coefficient: str

    def frame(self):
        return pd.DataFrame(self.values, index=self.metrics, columns=self.metrics)

    def pairs(self):
        """Upper-triangle entries as a long table, strongest first."""
        rows = []
        for i, j in itertools.combinations(range(len(self.metrics)), 2):
            rows.append((self.metrics[i], self.metrics[j], self.values[i, j], int(self.counts[i, j])))
        df = pd.DataFrame(rows, columns=["metric_a", "metric_b", "value", "n_networks"])
        return df.sort_values("value", ascending=False, kind="stable", na_position="last") \
                 .reset_index(drop=True)

    def missing_pairs(self):
        return [(a, b) for a, b, _, n in self.pairs().itertuples(index=False) if n == 0]

    def get(self, a, b):
        return self.values[self.metrics.index(a), self.metrics.index(b)]


def _rank_table(table, metrics):
    """network -> {metric: rank vector or None}, all over one algorithm order."""
    mean = table.mean()
    algorithms = None
    out = {}
    for network, block in mean.groupby("network", sort=False):
        wide = block.pivot(index="algorithm", columns="metric", values="value")
        algs = sorted(wide.index)
        if algorithms is None:
            algorithms = algs
        elif algs != algorithms:
            raise IncompatibleInputError(
                f"network {network!r} was evaluated on a different algorithm set")
        if len(algs) < 2:
            raise DomainError("need at least two algorithms to rank")
        ranks = {}
        for metric in metrics:
            if metric not in wide.columns:
                raise IncompatibleInputError(f"network {network!r} lacks metric {metric!r}")
            col = wide.loc[algs, metric].to_numpy(dtype=float)
            ranks[metric] = None if np.isnan(col).any() else ranks_from_scores(col)
        out[network] = ranks
    return out


def _safe_corr(a, b, coefficient):
    try:
        return correlation(a, b, coefficient)
    except UndefinedCorrelationError:
        return math.nan


def _matrix_from_ranks(ranks, metrics, method, coefficient):
    m = len(metrics)
    values = np.full((m, m), math.nan)
    counts = np.zeros((m, m), dtype=int)
    nets = list(ranks)
    for i, j in itertools.combinations(range(m), 2):
        a, b = metrics[i], metrics[j]
        usable = [n for n in nets if ranks[n][a] is not None and ranks[n][b] is not None]
        if method == "method1":
            vals = [_safe_corr(ranks[n][a], ranks[n][b], coefficient) for n in usable]
            vals = [v for v in vals if not math.isnan(v)]
            value = math.fsum(vals) / len(vals) if vals else math.nan
            count = len(vals)
        else:
            if usable:
                mean_a = np.mean([ranks[n][a] for n in usable], axis=0)
                mean_b = np.mean([ranks[n][b] for n in usable], axis=0)
                value = _safe_corr(ranks_from_scores(mean_a, higher_is_better=False),
                                   ranks_from_scores(mean_b, higher_is_better=False),
                                   coefficient)
            else:
                value = math.nan
            count = 0 if math.isnan(value) else len(usable)
        values[i, j] = values[j, i] = value
        counts[i, j] = counts[j, i] = count
    np.fill_diagonal(values, 1.0)
    for i, metric in enumerate(metrics):
        counts[i, i] = sum(ranks[n][metric] is not None for n in nets)
    return values, counts


def correlation_matrix(table, metrics=None, method="method1", coefficient="spearman",
                       networks=None):
    """Pairwise metric consistency over the networks of ``table``.

    ``method1`` averages per-network rank correlations; ``method2`` averages
    each algorithm's rank over networks first and correlates the mean ranks.
    Networks with a missing value for either metric are left out of that pair.
    """
    if method not in AGGREGATIONS:
        raise DomainError(f"method must be one of {AGGREGATIONS}")
    if networks is not None:
        table = table.subset(networks=networks)
    metrics = list(metrics) if metrics is not None else table.metrics
    ranks = _rank_table(table.subset(metrics=metrics), metrics)
    if not ranks:
        raise DomainError("no networks to correlate")
    values, counts = _matrix_from_ranks(ranks, metrics, method, coefficient)
    result = CorrelationResult(metrics, values, counts, method, coefficient)
    for a, b in result.missing_pairs():
        logger.warning("correlation %s / %s undefined on every network", a, b)
    return result


def _as_table(source, cfg, jobs):
    if isinstance(source, ScoreTable):
        return source
    if isinstance(source, dict):
        return evaluate_corpus(source, cfg, jobs)
    return evaluate_corpus({f"net{i}": g for i, g in enumerate(source)}, cfg, jobs)


def method1_correlations(networks, cfg, jobs=1):
    """``networks``: a ScoreTable, a ``{id: Graph}`` mapping or a list of graphs."""
    table = _as_table(networks, cfg, jobs)
    return correlation_matrix(table, cfg.metrics, "method1", cfg.coefficient)


def method2_correlations(networks, cfg, jobs=1):
    table = _as_table(networks, cfg, jobs)
    return correlation_matrix(table, cfg.metrics, "method2", cfg.coefficient)


# --------------------------------------------------------------------- sweeps

def q_convergence_sweep(corpus, cfg, q_values=None, runs=None, jobs=1):
    """Correlation matrices over random sub-corpora of size Q.

    Returns long rows ``(metric_a, metric_b, Q, run, value, n_networks)``; each
    run draws Q networks without replacement with its own derived seed.
    """
    table = _as_table(corpus, cfg, jobs)
    q_values = list(q_values if q_values is not None else cfg.q_values)
    runs = runs if runs is not None else cfg.runs
    population = sorted(table.networks)
    if max(q_values) > len(population):
        raise DomainError(f"Q={max(q_values)} exceeds corpus size {len(population)}")
    ranks = _rank_table(table.subset(metrics=cfg.metrics), list(cfg.metrics))
    rows = []
    for q in q_values:
        for run in range(runs):
            rng = np.random.default_rng(derive_seed(cfg.master_seed, "q-sweep", q, run))
            chosen = sorted(rng.choice(population, size=q, replace=False).tolist())
            sub = {n: ranks[n] for n in chosen}
            values, counts = _matrix_from_ranks(sub, list(cfg.metrics), cfg.aggregation,
                                                cfg.coefficient)
            for i, j in itertools.combinations(range(len(cfg.metrics)), 2):
                rows.append((cfg.metrics[i], cfg.metrics[j], q, run, values[i, j],
                             int(counts[i, j])))
    return pd.DataFrame(rows, columns=["metric_a", "metric_b", "Q", "run", "value", "n_networks"])


def summarize_q_sweep(sweep):
    """Mean and standard deviation over runs for every (pair, Q)."""
    g = sweep.groupby(["metric_a", "metric_b", "Q"], sort=False)["value"]
    return pd.DataFrame({"mean": g.mean(), "std": g.std(ddof=0)}).reset_index()


def threshold_specs(rho_values=(), gamma_values=(), metric="Precision"):
    specs = [f"{metric}@rho={r:g}" for r in rho_values]
    specs += [f"{metric}@gamma={g:g}" for g in gamma_values]
    return [str(M.parse_metric(s)) for s in specs]


def threshold_sweep(corpus, cfg, rho_values=None, gamma_values=None, metric="Precision",
                    jobs=1):
    """Correlation of ``metric``@k with each threshold-free metric as k varies.

    When ``corpus`` is a set of graphs it is evaluated with the needed
    threshold specs added; a ScoreTable must already contain them.  Networks
    where a rule rounds to ``k < 1`` hold NaN for that spec and are skipped.
    """
    rho_values = list(rho_values if rho_values is not None else cfg.rho_values)
    gamma_values = list(gamma_values if gamma_values is not None else cfg.gamma_values)
    specs = threshold_specs(rho_values, gamma_values, metric)
    free = [m for m in M.THRESHOLD_FREE_METRICS if m in cfg.metrics] or list(M.THRESHOLD_FREE_METRICS)
    if not isinstance(corpus, ScoreTable):
        cfg = cfg.replace(metrics=list(dict.fromkeys(specs + free)))
    table = _as_table(corpus, cfg, jobs)
    rows = []
    grid = [("rho", r) for r in rho_values] + [("gamma", g) for g in gamma_values]
    for spec, (kind, value) in zip(specs, grid):
        res = correlation_matrix(table, [spec] + free, cfg.aggregation, cfg.coefficient)
        skipped = len(table.networks) - int(res.counts[0, 0])
        if skipped:
            logger.warning("%s: %d network(s) skipped (k < 1 or missing)", spec, skipped)
        for other in free:
            i = res.metrics.index(other)
            rows.append((kind, value, spec, other, res.values[0, i], int(res.counts[0, i])))
    return pd.DataFrame(rows, columns=["rule", "threshold", "metric_a", "metric_b", "value",
                                       "n_networks"])
