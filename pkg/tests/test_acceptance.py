"""Acceptance suite: one test per criterion, each adding a PASS/FAIL summary line.

Criteria 4-6 share one evaluation of the desk corpus in tests/data/desk_corpus
(all 25 algorithms, 10 repeats per network), cached for the session.
"""

import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from linkeval import io
from linkeval import metrics as M
from linkeval.cli import main
from linkeval.pipeline import ExperimentConfig, correlation_matrix, evaluate_corpus, threshold_sweep
from linkeval.predictors import ALGORITHMS, RankedCandidates, rank_scores
from linkeval.toy_model import ToyConfig, run_toy

CORPUS = Path(__file__).parent / "data" / "desk_corpus" / "corpus.txt"
MAIN = ["Precision@rho=0.1", "AUC", "AUPR", "AUC-Precision", "NDCG", "AUC-mROC"]
RHOS = [0.01, 0.05, 0.1, 0.2, 0.4]
FREE = list(M.THRESHOLD_FREE_METRICS)


# ------------------------------------------------------------- criterion 1

def _order_signs(values):
    """Pairwise comparison signs; equal iff the midrank vectors are equal."""
    return np.sign(values[:, None] - values[None, :])


def test_criterion_1_threshold_metrics_rank_identically(record):
    rng = np.random.default_rng(20240101)
    start = time.perf_counter()
    violations = checks = 0
    for _ in range(10_000):
        n_cand = int(rng.integers(20, 501))
        n_pos = int(rng.integers(2, min(50, n_cand - 1) + 1))
        labels = np.zeros(n_cand, dtype=bool)
        labels[rng.choice(n_cand, n_pos, replace=False)] = True
        # Ten algorithms: coarse integer scores give ties, a signal term makes them differ.
        signal = rng.uniform(0, 3, size=(10, 1))
        raw = rng.normal(size=(10, n_cand)) + signal * labels
        scores = np.round(raw * rng.choice([1, 2, 100], size=(10, 1)))
        tp_curves = np.array([np.cumsum(rank_scores(s, labels, tie_seed=j).is_positive)
                              for j, s in enumerate(scores)])
        for k in rng.integers(1, n_cand + 1, size=5):
            tp = tp_curves[:, k - 1]
            ref = _order_signs(M.threshold_metric_array("Precision", tp, k, n_pos, n_cand - n_pos))
            for metric in M.THRESHOLD_METRICS[1:]:
                vals = M.threshold_metric_array(metric, tp, k, n_pos, n_cand - n_pos)
                checks += 1
                if not np.array_equal(_order_signs(vals), ref):
                    violations += 1
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 60
    record(1, ok, f"{violations} violations in {checks} ranking comparisons "
                  f"(10^4 instances x 5 k x 6 metrics), {elapsed:.1f}s")
    assert violations == 0
    assert elapsed < 60


# ------------------------------------------------------------- criterion 2

def _pr_sweep_area(labels):
    n_pos = labels.sum()
    tp = np.cumsum(labels)
    prec = tp / np.arange(1, len(labels) + 1)
    area = 0.0
    for level in range(1, n_pos + 1):
        p = prec[tp == level]
        area += (p.max() + p.min()) / 2
    return area / n_pos


def _all_pairs_auc(ranked):
    pos = ranked.scores[ranked.is_positive][:, None]
    neg = ranked.scores[~ranked.is_positive][None, :]
    wins = np.count_nonzero(pos > neg) * 2 + np.count_nonzero(pos == neg)
    return wins / (2 * pos.size * neg.size)


def test_criterion_2_metric_oracles(record):
    rng = np.random.default_rng(7)
    n_samples = 100_000
    bound = 3 * math.sqrt(0.25 / n_samples)
    worst = dict(aupr=0.0, auc=0.0, sampled=0.0, ndcg=0.0, mroc=0.0)
    auc_exact_mismatch = 0
    for i in range(500):
        n_cand = int(rng.integers(5, 400))
        n_pos = int(rng.integers(1, n_cand))
        labels = np.zeros(n_cand, dtype=bool)
        labels[rng.choice(n_cand, n_pos, replace=False)] = True
        raw = rng.normal(size=n_cand) + rng.uniform(0, 2) * labels
        scores = np.round(raw, int(rng.integers(0, 4)))
        ranked = rank_scores(scores, labels, tie_seed=i)

        worst["aupr"] = max(worst["aupr"], abs(M.aupr(ranked) - _pr_sweep_area(ranked.is_positive)))
        exact = M.auc_exact(ranked)
        auc_exact_mismatch += exact != _all_pairs_auc(ranked)
        worst["sampled"] = max(worst["sampled"], abs(M.auc_sampled(ranked, n_samples, seed=i) - exact))

        ideal = RankedCandidates.from_labels(np.sort(labels)[::-1])
        worst["ndcg"] = max(worst["ndcg"], abs(M.ndcg(ideal) - 1))
        worst["mroc"] = max(worst["mroc"], abs(M.auc_mroc(ideal) - 1))
    ok = (worst["aupr"] <= 1e-9 and auc_exact_mismatch == 0 and worst["sampled"] <= bound
          and worst["ndcg"] <= 1e-12 and worst["mroc"] <= 1e-12)
    record(2, ok, f"500 instances: max|AUPR-sweep|={worst['aupr']:.1e}, "
                  f"AUC exact mismatches={auc_exact_mismatch}, "
                  f"max|sampled-exact|={worst['sampled']:.4f} (bound {bound:.4f}), "
                  f"max|NDCG_ideal-1|={worst['ndcg']:.1e}, max|mROC_perfect-1|={worst['mroc']:.1e}")
    assert worst["aupr"] <= 1e-9
    assert auc_exact_mismatch == 0
    assert worst["sampled"] <= bound
    assert worst["ndcg"] <= 1e-12
    assert worst["mroc"] <= 1e-12


# ------------------------------------------------------------- criterion 3

def test_criterion_3_toy_model(record):
    start = time.perf_counter()
    m1 = np.array([run_toy(ToyConfig(P=100, Q=500, seed=s), "method1") for s in range(20)])
    m2 = np.array([run_toy(ToyConfig(P=100, Q=500, seed=s), "method2") for s in range(20)])
    elapsed = time.perf_counter() - start
    m1_final = m1[:, -1].mean()
    m2_min = m2[:, 299:].min()
    ok = 0.46 <= m1_final <= 0.52 and m2_min >= 0.99 and elapsed < 60
    record(3, ok, f"method1 mean at Q=500 over 20 seeds = {m1_final:.4f} (target [0.46, 0.52]); "
                  f"method2 min over seeds and Q>=300 = {m2_min:.4f} (target >= 0.99); "
                  f"{elapsed:.1f}s")
    assert 0.46 <= m1_final <= 0.52
    assert m2_min >= 0.99
    assert elapsed < 60


# ------------------------------------------------------- desk corpus (4-6)

@pytest.fixture(scope="session")
def corpus():
    networks = io.load_corpus(CORPUS)
    assert len(networks) >= 20
    assert all(g.node_count <= 2000 for g in networks.values())
    return networks


def _config(probe_fraction, metrics):
    return ExperimentConfig(probe_fraction=probe_fraction, repeats=10, algorithms=ALGORITHMS,
                            metrics=metrics, master_seed=0)


@pytest.fixture(scope="session")
def desk_table(corpus):
    metrics = [f"Precision@rho={r:g}" for r in RHOS] + FREE
    start = time.perf_counter()
    table = evaluate_corpus(corpus, _config(0.1, metrics))
    return table, time.perf_counter() - start


def _ordering(res):
    return [(a, b) for a, b in res.pairs()[["metric_a", "metric_b"]].itertuples(index=False)]


def test_criterion_4_desk_correlation_structure(desk_table, record):
    table, elapsed = desk_table
    res = correlation_matrix(table, MAIN, "method1", "spearman")
    triangle = [res.get(a, b) for a, b in itertools.combinations(["AUPR", "AUC-Precision", "NDCG"], 2)]
    tri_mean = float(np.mean(triangle))
    mroc_pairs = {m: res.get(m, "AUC-mROC") for m in MAIN if m != "AUC-mROC"}
    best_mroc = max(mroc_pairs.values())
    ok = tri_mean > best_mroc and tri_mean >= 0.8 and elapsed < 1800
    record(4, ok, f"{len(table.networks)} networks: triangle mean {tri_mean:.4f} vs strongest "
                  f"AUC-mROC pair {best_mroc:.4f}; evaluation {elapsed:.0f}s")
    assert tri_mean > best_mroc
    assert tri_mean >= 0.8
    assert elapsed < 1800


def test_criterion_5_threshold_sweep_decay(desk_table, corpus, record):
    table, _ = desk_table
    cfg = _config(0.1, MAIN)
    sweep = threshold_sweep(table, cfg, rho_values=RHOS, gamma_values=[])
    val = {(r.threshold, r.metric_b): r.value for r in sweep.itertuples()}
    d_auc = val[(0.4, "AUC")] - val[(0.01, "AUC")]
    d_mroc = val[(0.4, "AUC-mROC")] - val[(0.01, "AUC-mROC")]
    ok = d_auc > d_mroc
    record(5, ok, f"Precision-AUC change {d_auc:+.4f} vs Precision-AUC-mROC change {d_mroc:+.4f} "
                  f"from rho=0.01 to 0.4")
    assert d_auc > d_mroc


def _within_one_adjacent_swap(ref, other):
    diff = [i for i, (a, b) in enumerate(zip(ref, other)) if a != b]
    if not diff:
        return True
    return (len(diff) == 2 and diff[1] == diff[0] + 1
            and ref[diff[0]] == other[diff[1]] and ref[diff[1]] == other[diff[0]])


def test_criterion_6_robustness(desk_table, corpus, record):
    table, _ = desk_table
    spear = _ordering(correlation_matrix(table, MAIN, "method1", "spearman"))
    kend = _ordering(correlation_matrix(table, MAIN, "method1", "kendall"))
    same_coef = spear == kend
    moved = [i for i, (a, b) in enumerate(zip(spear, kend)) if a != b]

    ratio_ok = {}
    for label, frac in (("8:2", 0.2), ("7:3", 0.3), ("6:4", 0.4)):
        t = evaluate_corpus(corpus, _config(frac, MAIN))
        other = _ordering(correlation_matrix(t, MAIN, "method1", "spearman"))
        ratio_ok[label] = _within_one_adjacent_swap(spear, other)
    ok = same_coef and all(ratio_ok.values())
    detail = (f"Spearman/Kendall pair orderings identical={same_coef}"
              + (f" (positions differing: {moved})" if moved else "")
              + "; split ratios vs 9:1 within one adjacent swap: "
              + ", ".join(f"{k}={v}" for k, v in ratio_ok.items()))
    record(6, ok, detail)
    assert same_coef
    assert all(ratio_ok.values())


# ------------------------------------------------------------- criterion 7

def test_criterion_7_determinism_across_jobs(tmp_path, record):
    sub = tmp_path / "corpus.txt"
    entries = io.read_corpus_manifest(CORPUS)[:4]
    sub.write_text("".join(f"{nid} {path}\n" for nid, path in entries))
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("repeats: 3\n")
    outs = []
    for jobs in (1, 2, 3):
        out = tmp_path / f"jobs{jobs}"
        assert main(["evaluate", "--config", str(cfg), "--corpus", str(sub), "--jobs", str(jobs),
                     "--out", str(out)]) == 0
        assert main(["correlate", "--scores", str(out / "scores_raw.csv"), "--out", str(out)]) == 0
        assert main(["sweep", "q", "--scores", str(out / "scores_raw.csv"), "--q-values", "2,4",
                     "--runs", "5", "--out", str(out)]) == 0
        outs.append(out)
    names = sorted(p.name for p in outs[0].glob("*.csv"))
    differing = [n for n in names if len({(o / n).read_bytes() for o in outs}) != 1]
    ok = not differing and len(names) >= 6
    record(7, ok, f"{len(names)} CSVs byte-identical across --jobs 1/2/3" if ok
                  else f"differing files: {differing}")
    assert not differing
    assert len(names) >= 6
