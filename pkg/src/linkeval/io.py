"""Corpus manifests, config files, versioned CSV output and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import pandas as pd
import yaml

from . import __version__
from .errors import ConfigError, IncompatibleInputError, ParseError
from .graph import load_edge_list
from .pipeline import ExperimentConfig, ScoreTable

__all__ = [
    "SCHEMAS",
    "read_corpus_manifest",
    "load_corpus",
    "load_config",
    "write_csv",
    "read_csv",
    "read_score_table",
    "build_manifest",
    "write_manifest",
]

SCHEMAS = {
    "scores_raw": "linkeval.scores_raw/1",
    "scores_mean": "linkeval.scores_mean/1",
    "correlation_matrix": "linkeval.correlation_matrix/1",
    "correlation_pairs": "linkeval.correlation_pairs/1",
    "correlation_graph": "linkeval.correlation_graph/1",
    "q_sweep": "linkeval.q_sweep/1",
    "q_sweep_summary": "linkeval.q_sweep_summary/1",
    "threshold_sweep": "linkeval.threshold_sweep/1",
    "toy_trace": "linkeval.toy_trace/1",
    "candidate_scores": "linkeval.candidate_scores/1",
}


def read_corpus_manifest(path):
    """Parse a corpus manifest into ``[(network_id, edge_list_path), ...]``.

    One network per line: either ``path`` or ``network_id path``.  Relative
    paths resolve against the manifest's directory; ``#`` starts a comment.
    """
    path = Path(path)
    base = path.parent
    entries = []
    seen = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) == 1:
                nid, rel = Path(parts[0]).stem, parts[0]
            elif len(parts) == 2:
                nid, rel = parts
            else:
                raise ParseError("expected 'path' or 'network_id path'", lineno, path)
            if nid in seen:
                raise ParseError(f"duplicate network id {nid!r}", lineno, path)
            seen.add(nid)
            p = Path(rel)
            entries.append((nid, p if p.is_absolute() else base / p))
    return entries


def load_corpus(manifest_path):
    """Load every network of a corpus manifest; all files are checked first."""
    entries = read_corpus_manifest(manifest_path)
    missing = [str(p) for _, p in entries if not p.is_file()]
    if missing:
        raise FileNotFoundError("corpus files not found: " + ", ".join(missing))
    return {nid: load_edge_list(p) for nid, p in entries}


def load_config(path=None, overrides=None):
    """Read a YAML or JSON config (JSON is valid YAML) and apply overrides."""
    data = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError({"<file>": f"not valid YAML/JSON: {exc}"}) from exc
        if not isinstance(data, dict):
            raise ConfigError({"<file>": "top level must be a mapping"})
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.from_dict(data)


def _fmt(value):
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return value


def write_csv(df, path, schema, manifest_id=""):
    """Write ``df`` with a ``# schema=... manifest=...`` first line.

    Floats use ``repr`` so equal numbers always serialise to equal bytes.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema={SCHEMAS.get(schema, schema)} manifest={manifest_id}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(df.columns)
        for row in df.itertuples(index=False):
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path, schema=None):
    """Read a CSV written by :func:`write_csv`; returns ``(frame, header)``."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        first = fh.readline()
    header = {}
    skip = 0
    if first.startswith("#"):
        skip = 1
        for token in first[1:].split():
            key, _, value = token.partition("=")
            header[key] = value
    if schema is not None and header.get("schema") != SCHEMAS.get(schema, schema):
        raise IncompatibleInputError(
            f"{path}: expected schema {SCHEMAS.get(schema, schema)}, found {header.get('schema')}")
    return pd.read_csv(path, skiprows=skip, keep_default_na=False,
                       na_values=["nan", ""], dtype={"network": str}), header


def read_score_table(path):
    df, _ = read_csv(path, "scores_raw")
    return ScoreTable(df)


def _sha256(path):
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def build_manifest(cfg, corpus_entries=(), networks=None, extra=None):
    """Run manifest: config snapshot, corpus stats and a content-derived id.

    The id hashes only reproducibility inputs (config, corpus file contents,
    tool version), so identical runs share it; the timestamp is kept outside
    the hash.
    """
    corpus = []
    for nid, path in corpus_entries:
        item = {"id": nid, "path": str(path), "sha256": _sha256(path)}
        if networks is not None and nid in networks:
            g = networks[nid]
            item.update(nodes=g.node_count, edges=g.edge_count,
                        components=g.n_components(), self_loops_skipped=g.skipped_self_loops)
        corpus.append(item)
    body = {
        "tool": "linkeval",
        "version": __version__,
        "config": cfg.to_dict() if cfg is not None else None,
        "master_seed": cfg.master_seed if cfg is not None else None,
        "corpus": [{k: v for k, v in c.items() if k != "path"} for c in corpus],
        "extra": extra or {},
    }
    digest = hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:16]
    manifest = dict(body)
    manifest["corpus"] = corpus
    manifest["manifest_id"] = digest
    manifest["created_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return manifest


def write_manifest(manifest, out_dir):
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
