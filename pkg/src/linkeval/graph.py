"""Undirected simple graphs, edge-list ingestion and train/probe splitting."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateSplitError, DomainError, ParseError

logger = logging.getLogger(__name__)

__all__ = [
    "Graph",
    "TrainProbeSplit",
    "CandidateSet",
    "load_edge_list",
    "write_edge_list",
    "split_train_probe",
    "candidate_set",
    "round_half_up",
]

_SEP = re.compile(r"\s*,\s*|\s+")
_COMMENT_PREFIXES = ("#", "%")


def _canonical_edges(edges, n_nodes):
    """Return a sorted, deduplicated (m, 2) int64 array with i < j per row."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= n_nodes):
        raise DomainError("edge endpoint outside 0..n_nodes-1")
    arr = np.sort(arr, axis=1)
    arr = arr[arr[:, 0] != arr[:, 1]]
    arr = np.unique(arr, axis=0) if len(arr) else arr.reshape(0, 2)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..n_nodes-1``.

    ``edges`` is a read-only (m, 2) array of pairs with ``i < j``, sorted
    lexicographically.  ``labels[i]`` is the original identifier of node ``i``.
    """

    n_nodes: int
    edges: np.ndarray
    labels: tuple = ()
    skipped_self_loops: int = 0

    def __post_init__(self):
        object.__setattr__(self, "edges", _canonical_edges(self.edges, self.n_nodes))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.n_nodes)))
        elif len(self.labels) != self.n_nodes:
            raise DomainError("labels must have one entry per node")

    @classmethod
    def from_edges(cls, edges, n_nodes=None, labels=()):
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if n_nodes is None:
            n_nodes = int(arr.max()) + 1 if arr.size else 0
        return cls(n_nodes=n_nodes, edges=arr, labels=tuple(labels))

    @property
    def nodes(self):
        return range(self.n_nodes)

    @property
    def node_count(self):
        return self.n_nodes

    @property
    def edge_count(self):
        return len(self.edges)

    def edge_set(self):
        return {(int(i), int(j)) for i, j in self.edges}

    def has_edge(self, i, j):
        a, b = (i, j) if i < j else (j, i)
        key = np.searchsorted(self._keys, a * self.n_nodes + b)
        return key < len(self._keys) and self._keys[key] == a * self.n_nodes + b

    @property
    def _keys(self):
        return self.edges[:, 0] * self.n_nodes + self.edges[:, 1]

    def adjacency(self, dense=False):
        """Symmetric 0/1 adjacency matrix (CSR float64 unless ``dense``)."""
        n = self.n_nodes
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        return a.toarray() if dense else a

    def degrees(self):
        return np.bincount(self.edges.ravel(), minlength=self.n_nodes)

    def with_edges(self, edges):
        """Same node set and labels, different edge set."""
        return Graph(n_nodes=self.n_nodes, edges=edges, labels=self.labels)

    def n_components(self):
        if self.n_nodes == 0:
            return 0
        return int(connected_components(self.adjacency(), directed=False)[0])


def load_edge_list(path, comment_prefixes=_COMMENT_PREFIXES):
    """Read an undirected edge list.

    One edge per line, endpoints separated by whitespace or a comma.  Lines
    starting with a comment prefix and blank lines are skipped; any tokens
    after the first two (weights, timestamps) are ignored.  Self-loops are
    dropped and counted in ``Graph.skipped_self_loops``.  Node labels are
    mapped to ``0..n-1`` in order of first appearance.
    """
    path = Path(path)
    index = {}
    edges = []
    self_loops = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(tuple(comment_prefixes)):
                continue
            tokens = _SEP.split(line)
            if len(tokens) < 2 or not tokens[0] or not tokens[1]:
                raise ParseError(f"expected two node tokens, got {line!r}", lineno, path)
            u, v = tokens[0], tokens[1]
            iu = index.setdefault(u, len(index))
            iv = index.setdefault(v, len(index))
            if iu == iv:
                self_loops += 1
                continue
            edges.append((iu, iv))
    if self_loops:
        logger.warning("%s: skipped %d self-loop(s)", path, self_loops)
    return Graph(
        n_nodes=len(index),
        edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        labels=tuple(index),
        skipped_self_loops=self_loops,
    )


def write_edge_list(graph, path, edges=None):
    """Write ``edges`` (default: all edges of ``graph``) using original labels."""
    edges = graph.edges if edges is None else edges
    labels = graph.labels
    with Path(path).open("w", encoding="utf-8") as fh:
        for i, j in edges:
            fh.write(f"{labels[i]} {labels[j]}\n")


def round_half_up(x):
    """Round a non-negative number to the nearest integer, halves going up."""
    x = Fraction(str(x)) if isinstance(x, float) else Fraction(x)
    return math.floor(x + Fraction(1, 2))


@dataclass(frozen=True, eq=False)
class TrainProbeSplit:
    graph: Graph
    train_edges: np.ndarray
    probe_edges: np.ndarray
    probe_fraction: float
    seed: int
    isolated_in_train: int = 0
    train_components: int = 0

    @property
    def ratio(self):
        """``(|E^T|, |E^P|)`` as a pair of counts."""
        return len(self.train_edges), len(self.probe_edges)

    def train_graph(self):
        return self.graph.with_edges(self.train_edges)


def split_train_probe(g, probe_fraction, seed):
    """Randomly hold out ``round(probe_fraction * |E|)`` edges as the probe set.

    The sample is uniform without replacement and fully determined by
    ``(g, probe_fraction, seed)``.  Nodes whose every edge lands in the probe
    set stay in the training view as isolated nodes; neither that nor a
    disconnected training graph triggers resampling, both are only logged.
    """
    if not 0 < probe_fraction < 1:
        raise DomainError(f"probe_fraction must lie in (0, 1), got {probe_fraction}")
    m = g.edge_count
    n_probe = round_half_up(Fraction(str(probe_fraction)) * m)
    if n_probe == 0:
        raise DegenerateSplitError(
            f"probe set would be empty (|E|={m}, probe_fraction={probe_fraction})"
        )
    if n_probe >= m:
        raise DegenerateSplitError(f"training set would be empty (|E|={m})")
    rng = np.random.default_rng(seed)
    probe_idx = np.sort(rng.choice(m, size=n_probe, replace=False))
    mask = np.zeros(m, dtype=bool)
    mask[probe_idx] = True
    train = g.edges[~mask]
    probe = g.edges[mask]

    deg = np.bincount(train.ravel(), minlength=g.n_nodes)
    isolated_before = int(np.sum(g.degrees() == 0))
    isolated = int(np.sum(deg == 0)) - isolated_before
    components = g.with_edges(train).n_components()
    if isolated:
        logger.info("split seed=%s: %d node(s) appear only in the probe set", seed, isolated)
    if components > 1:
        logger.info("split seed=%s: training graph has %d components", seed, components)
    return TrainProbeSplit(
        graph=g,
        train_edges=train,
        probe_edges=probe,
        probe_fraction=probe_fraction,
        seed=seed,
        isolated_in_train=isolated,
        train_components=components,
    )


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """All unordered pairs outside the training edges, in lexicographic order."""

    pairs: np.ndarray
    positive_flags: np.ndarray
    n_nodes: int = 0

    def __len__(self):
        return len(self.pairs)

    @property
    def n_pos(self):
        return int(self.positive_flags.sum())

    @property
    def n_neg(self):
        return len(self.pairs) - self.n_pos


def candidate_set(g, split):
    """Enumerate ``U - E^T`` and flag the probe edges as positives."""
    n = g.n_nodes
    iu, ju = np.triu_indices(n, k=1)
    keys = iu * n + ju
    train_keys = split.train_edges[:, 0] * n + split.train_edges[:, 1]
    probe_keys = split.probe_edges[:, 0] * n + split.probe_edges[:, 1]
    keep = ~np.isin(keys, train_keys, assume_unique=True)
    keys = keys[keep]
    pairs = np.column_stack([iu[keep], ju[keep]])
    flags = np.isin(keys, probe_keys, assume_unique=True)
    pairs.setflags(write=False)
    flags.setflags(write=False)
    return CandidateSet(pairs=pairs, positive_flags=flags, n_nodes=n)
