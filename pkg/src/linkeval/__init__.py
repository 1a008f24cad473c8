"""Link-prediction evaluation: algorithms, metrics and metric-consistency analysis."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateSplitError,
    DomainError,
    IncompatibleInputError,
    LinkEvalError,
    NumericError,
    ParseError,
    UndefinedCorrelationError,
    UndefinedMetricError,
)
from .graph import Graph, candidate_set, load_edge_list, split_train_probe  # noqa: E402
from .metrics import METRICS, evaluate, parse_metric  # noqa: E402
from .pipeline import (  # noqa: E402
    ExperimentConfig,
    ScoreTable,
    correlation_matrix,
    evaluate_corpus,
    q_convergence_sweep,
    threshold_sweep,
)
from .predictors import ALGORITHMS, score_candidates  # noqa: E402
from .rank_correlation import kendall_tau, spearman  # noqa: E402
from .toy_model import ToyConfig, run_toy  # noqa: E402
