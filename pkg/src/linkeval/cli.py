"""Command-line interface: ``linkeval <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from . import io
from .errors import ConfigError, LinkEvalError
from .graph import candidate_set, load_edge_list, split_train_probe, write_edge_list
from .pipeline import (
    correlation_matrix,
    evaluate_corpus,
    q_convergence_sweep,
    summarize_q_sweep,
    threshold_specs,
    threshold_sweep,
)
from .predictors import score_candidates
from .toy_model import ToyConfig, toy_traces

logger = logging.getLogger("linkeval")

OUTPUT_ENV = "LINKEVAL_OUTPUT_DIR"


def _ratio(text):
    """``"9:1"`` -> probe fraction 0.1; a bare number is taken as the fraction."""
    try:
        if ":" in text:
            train, probe = (Fraction(p) for p in text.split(":"))
            frac = probe / (train + probe)
        else:
            frac = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad ratio {text!r}; use e.g. 9:1 or 0.1") from None
    if not 0 < frac < 1:
        raise argparse.ArgumentTypeError(f"probe fraction {float(frac)} outside (0, 1)")
    return float(frac)


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, _, rest = part.partition("..")
            hi, _, step = rest.partition(":")
            out.extend(range(int(lo), int(hi) + 1, int(step or 1)))
        elif part:
            out.append(int(part))
    return out


def _method(text):
    text = str(text).strip().lower()
    if text in ("1", "method1"):
        return "method1"
    if text in ("2", "method2"):
        return "method2"
    raise argparse.ArgumentTypeError("method must be 1 or 2")


def _out_dir(args):
    return Path(args.out or os.environ.get(OUTPUT_ENV) or "linkeval-out")


def _threshold_override(args):
    picked = [(k, getattr(args, k)) for k in ("rho", "gamma", "k") if getattr(args, k, None) is not None]
    if len(picked) > 1:
        raise ConfigError({"threshold": "give at most one of --rho, --gamma, --k"})
    if picked:
        kind, value = picked[0]
        return f"{kind}={value:g}" if kind != "k" else f"k={int(value)}"
    return None


def _config(args, **extra):
    overrides = {
        "master_seed": getattr(args, "seed", None),
        "probe_fraction": getattr(args, "ratio", None),
        "threshold": _threshold_override(args),
        "coefficient": getattr(args, "coefficient", None),
        "aggregation": getattr(args, "method", None),
    }
    overrides.update(extra)
    return io.load_config(getattr(args, "config", None), overrides)


def _corpus(args):
    if not args.corpus:
        raise ConfigError({"corpus": "a corpus manifest is required"})
    entries = io.read_corpus_manifest(args.corpus)
    networks = io.load_corpus(args.corpus)
    return entries, networks


def _table_and_manifest(args, cfg):
    """Score table from ``--scores`` or by evaluating ``--corpus``."""
    if getattr(args, "scores", None):
        table = io.read_score_table(args.scores)
        _, header = io.read_csv(args.scores)
        return table, {"manifest_id": header.get("manifest", "")}, None
    entries, networks = _corpus(args)
    table = evaluate_corpus(networks, cfg, jobs=args.jobs)
    return table, io.build_manifest(cfg, entries, networks), networks


def _missing_summary(table):
    raw = table.raw
    bad = raw[raw["value"].isna()]
    if bad.empty:
        return {}
    return {net: sorted(set(map(str, grp["algorithm"] + ":" + grp["metric"])))
            for net, grp in bad.groupby("network", sort=False)}


# ------------------------------------------------------------------ commands

def cmd_evaluate(args):
    cfg = _config(args)
    entries, networks = _corpus(args)
    table = evaluate_corpus(networks, cfg, jobs=args.jobs)
    manifest = io.build_manifest(cfg, entries, networks)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    mid = manifest["manifest_id"]
    io.write_csv(table.raw, out / "scores_raw.csv", "scores_raw", mid)
    io.write_csv(table.mean(), out / "scores_mean.csv", "scores_mean", mid)
    io.write_manifest(manifest, out)
    missing = _missing_summary(table)
    if missing:
        for net, cells in missing.items():
            print(f"{net}: {len(cells)} missing cell(s): {', '.join(cells[:10])}", file=sys.stderr)
        return 3
    print(f"wrote {out / 'scores_raw.csv'} ({len(table)} rows, manifest {mid})")
    return 0


def _write_correlation(res, out, mid, stem="correlation"):
    matrix = res.frame().reset_index().rename(columns={"index": "metric"})
    io.write_csv(matrix, out / f"{stem}_matrix.csv", "correlation_matrix", mid)
    pairs = res.pairs()
    io.write_csv(pairs, out / f"{stem}_pairs.csv", "correlation_pairs", mid)
    graph = pairs.rename(columns={"metric_a": "source", "metric_b": "target", "value": "weight"})
    io.write_csv(graph[["source", "target", "weight"]], out / f"{stem}_graph.csv",
                 "correlation_graph", mid)
    payload = {
        "manifest": mid,
        "method": res.method,
        "coefficient": res.coefficient,
        "metrics": res.metrics,
        "values": [[None if np.isnan(v) else float(v) for v in row] for row in res.values],
        "counts": res.counts.tolist(),
    }
    (out / f"{stem}.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def cmd_correlate(args):
    cfg = _config(args)
    table, manifest, networks = _table_and_manifest(args, cfg)
    metrics = args.metrics.split(",") if args.metrics else \
        [m for m in cfg.metrics if m in table.metrics] or table.metrics
    res = correlation_matrix(table, metrics, cfg.aggregation, cfg.coefficient)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    if networks is not None:
        io.write_csv(table.raw, out / "scores_raw.csv", "scores_raw", manifest["manifest_id"])
        io.write_manifest(manifest, out)
    _write_correlation(res, out, manifest["manifest_id"])
    for a, b in res.missing_pairs():
        print(f"missing: {a} / {b} undefined on every network", file=sys.stderr)
    print(res.pairs().to_string(index=False))
    return 0


def cmd_sweep(args):
    extra = {}
    if args.q_values:
        extra["q_values"] = _ints(args.q_values)
    if args.runs:
        extra["runs"] = args.runs
    if args.rho_values:
        extra["rho_values"] = _floats(args.rho_values)
    if args.gamma_values is not None:
        extra["gamma_values"] = _floats(args.gamma_values)
    cfg = _config(args, **extra)
    if args.kind == "threshold" and not args.scores:
        specs = threshold_specs(cfg.rho_values, cfg.gamma_values)
        free = [m for m in cfg.metrics if "@" not in m]
        cfg = cfg.replace(metrics=list(dict.fromkeys(specs + free)))
    table, manifest, networks = _table_and_manifest(args, cfg)
    mid = manifest["manifest_id"]
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    if networks is not None:
        io.write_csv(table.raw, out / "scores_raw.csv", "scores_raw", mid)
        io.write_manifest(manifest, out)
    if args.kind == "q":
        if not set(cfg.metrics) <= set(table.metrics):
            cfg = cfg.replace(metrics=table.metrics)
        sweep = q_convergence_sweep(table, cfg)
        io.write_csv(sweep, out / "q_sweep.csv", "q_sweep", mid)
        io.write_csv(summarize_q_sweep(sweep), out / "q_sweep_summary.csv", "q_sweep_summary", mid)
        print(f"wrote {out / 'q_sweep.csv'} ({len(sweep)} rows)")
    else:
        sweep = threshold_sweep(table, cfg)
        io.write_csv(sweep, out / "threshold_sweep.csv", "threshold_sweep", mid)
        print(f"wrote {out / 'threshold_sweep.csv'} ({len(sweep)} rows)")
    return 0


def cmd_toy(args):
    cfg = ToyConfig(P=args.P, Q=args.Q, noise_high=args.noise_high, seed=args.seed or 0)
    seeds = [cfg.seed + i for i in range(args.seeds)]
    traces = toy_traces(cfg, seeds, methods=[_method(m) for m in args.methods.split(",")],
                        coefficient=args.coefficient or "spearman")
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    extra = {"toy": {"P": cfg.P, "Q": cfg.Q, "noise_high": cfg.noise_high, "seeds": seeds}}
    manifest = io.build_manifest(None, extra=extra)
    io.write_csv(traces, out / "toy_trace.csv", "toy_trace", manifest["manifest_id"])
    io.write_manifest(manifest, out)
    final = traces[(traces["seed"] == "mean") & (traces["Q"] == cfg.Q)]
    print(final[["method", "Q", "value"]].to_string(index=False))
    return 0


def cmd_split(args):
    g = load_edge_list(args.input)
    split = split_train_probe(g, args.ratio or 0.1, args.seed or 0)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(g, out / "train.txt", split.train_edges)
    write_edge_list(g, out / "probe.txt", split.probe_edges)
    train, probe = split.ratio
    print(f"|E^T|={train} |E^P|={probe} isolated_in_train={split.isolated_in_train} "
          f"components={split.train_components}")
    return 0


def cmd_score(args):
    g = load_edge_list(args.input)
    split = split_train_probe(g, args.ratio or 0.1, args.seed or 0)
    cand = candidate_set(g, split)
    params = json.loads(args.params) if args.params else None
    ranked = score_candidates(split.train_graph(), cand, args.algorithm, params,
                              tie_seed=args.seed or 0)
    labels = g.labels
    df = pd.DataFrame({
        "source": [labels[i] for i in ranked.pairs[:, 0]],
        "target": [labels[j] for j in ranked.pairs[:, 1]],
        "score": ranked.scores,
        "is_positive": ranked.is_positive.astype(int),
    })
    out = Path(args.out) if args.out else _out_dir(args) / f"scores_{args.algorithm}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_csv(df, out, "candidate_scores")
    print(f"wrote {out} ({len(df)} candidates, {ranked.n_pos} positive)")
    return 0


# -------------------------------------------------------------------- parser

def _common(p, config=True, corpus=True, scores=False):
    if config:
        p.add_argument("--config", help="YAML/JSON experiment config")
    if corpus:
        p.add_argument("--corpus", help="corpus manifest listing edge-list files")
    if scores:
        p.add_argument("--scores", help="scores_raw.csv from 'evaluate' (skips scoring)")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./linkeval-out)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--ratio", type=_ratio, help="train:probe ratio, e.g. 9:1")
    p.add_argument("--method", type=_method, help="aggregation: 1 or 2")
    p.add_argument("--coefficient", choices=["spearman", "kendall"])
    p.add_argument("--rho", type=float, help="threshold k = rho * |U - E^T|")
    p.add_argument("--gamma", type=float, help="threshold k = gamma * |E^P|")
    p.add_argument("--k", type=int, help="absolute threshold k")


def build_parser():
    parser = argparse.ArgumentParser(prog="linkeval", description=__doc__)
    parser.add_argument("--version", action="version", version=f"linkeval {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="score all algorithms on a corpus")
    _common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("correlate", help="pairwise metric correlation matrix")
    _common(p, scores=True)
    p.add_argument("--metrics", help="comma-separated metric specs to correlate")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("sweep", help="Q-convergence or threshold sweep")
    p.add_argument("kind", choices=["q", "threshold"])
    _common(p, scores=True)
    p.add_argument("--q-values", help="e.g. 10,20,50 or 10..300:10")
    p.add_argument("--runs", type=int)
    p.add_argument("--rho-values", help="comma-separated rho grid")
    p.add_argument("--gamma-values", help="comma-separated gamma grid")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("toy", help="noisy consistent-metrics toy model")
    p.add_argument("--P", type=int, default=100)
    p.add_argument("--Q", type=int, default=500)
    p.add_argument("--noise-high", type=float, default=None, help="default: P")
    p.add_argument("--seeds", type=int, default=20, help="number of seeds")
    p.add_argument("--methods", default="1,2")
    p.add_argument("--seed", type=int, help="first seed")
    p.add_argument("--coefficient", choices=["spearman", "kendall"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("split", help="write a random train/probe split")
    p.add_argument("input")
    p.add_argument("--ratio", type=_ratio)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("score", help="rank candidate links with one algorithm")
    p.add_argument("input")
    p.add_argument("--algorithm", required=True)
    p.add_argument("--params", help='JSON object, e.g. {"beta": 0.005}')
    p.add_argument("--ratio", type=_ratio)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_score)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LinkEvalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
