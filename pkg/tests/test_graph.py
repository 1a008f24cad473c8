import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkeval.errors import DegenerateSplitError, DomainError, ParseError
from linkeval.graph import (
    Graph,
    candidate_set,
    load_edge_list,
    round_half_up,
    split_train_probe,
    write_edge_list,
)


def _write(tmp_path, text, name="g.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _ring(n):
    return Graph.from_edges([(i, (i + 1) % n) for i in range(n)], n_nodes=n)


def test_load_simple(tmp_path):
    g = load_edge_list(_write(tmp_path, "1 2\n2 3"))
    assert (g.node_count, g.edge_count) == (3, 2)
    assert g.labels == ("1", "2", "3")


def test_load_dedups_undirected_duplicates(tmp_path):
    g = load_edge_list(_write(tmp_path, "1 2\n2 1\n1 2"))
    assert (g.node_count, g.edge_count) == (2, 1)


def test_load_skips_self_loops(tmp_path):
    g = load_edge_list(_write(tmp_path, "1 1\n1 2"))
    assert (g.node_count, g.edge_count, g.skipped_self_loops) == (2, 1, 1)


def test_load_separators_comments_and_weights(tmp_path):
    text = "# header\n% other comment\n\na,b\nb , c 0.5\nc\td\n"
    g = load_edge_list(_write(tmp_path, text))
    assert g.labels == ("a", "b", "c", "d")
    assert g.edge_set() == {(0, 1), (1, 2), (2, 3)}


def test_load_malformed_line_reports_line_number(tmp_path):
    with pytest.raises(ParseError) as err:
        load_edge_list(_write(tmp_path, "1 2\n3\n"))
    assert err.value.lineno == 2


def test_load_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_edge_list(tmp_path / "absent.txt")


def test_adjacency_is_symmetric():
    g = Graph.from_edges([(0, 2), (1, 2)], n_nodes=3)
    a = g.adjacency(dense=True)
    assert np.array_equal(a, a.T)
    assert g.has_edge(2, 0) and g.has_edge(0, 2) and not g.has_edge(0, 1)


def test_round_trip_preserves_labels(tmp_path):
    g = load_edge_list(_write(tmp_path, "x y\ny z\nz x\nz w\n"))
    out = tmp_path / "out.txt"
    write_edge_list(g, out)
    h = load_edge_list(out)
    named = lambda gr: {frozenset((gr.labels[i], gr.labels[j])) for i, j in gr.edges}
    assert named(g) == named(h)


def test_round_half_up():
    assert [round_half_up(x) for x in (2.5, 3.5, 2.8, 0.49, 10.0)] == [3, 4, 3, 0, 10]


def test_split_sizes_nine_to_one():
    g = _ring(100)
    s = split_train_probe(g, 0.1, seed=1)
    assert s.ratio == (90, 10)


def test_split_rounding_small_graph():
    s = split_train_probe(_ring(7), 0.4, seed=0)
    assert len(s.probe_edges) == 3  # 2.8 rounds to 3


def test_split_deterministic():
    g = _ring(50)
    a = split_train_probe(g, 0.2, seed=7)
    b = split_train_probe(g, 0.2, seed=7)
    assert np.array_equal(a.probe_edges, b.probe_edges)


def test_split_seeds_differ():
    g = _ring(40)
    sets = {split_train_probe(g, 0.1, seed=s).probe_edges.tobytes() for s in range(100)}
    assert len(sets) >= 99


@pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
def test_split_bad_fraction(fraction):
    with pytest.raises(DomainError):
        split_train_probe(_ring(20), fraction, seed=0)


def test_split_empty_probe_is_degenerate():
    with pytest.raises(DegenerateSplitError):
        split_train_probe(_ring(4), 0.1, seed=0)


def test_split_reports_isolated_nodes():
    star = Graph.from_edges([(0, i) for i in range(1, 11)], n_nodes=11)
    s = split_train_probe(star, 0.3, seed=3)
    assert s.isolated_in_train == 3
    assert s.train_components == 4


def test_candidate_set_small():
    g = Graph.from_edges([(0, 1), (1, 2), (2, 3)], n_nodes=4)
    s = split_train_probe(g, 0.34, seed=0)  # one probe edge
    cand = candidate_set(g, s)
    assert len(cand) == 6 - 2
    assert cand.n_pos == 1


@settings(max_examples=60, deadline=None)
@given(n=st.integers(5, 25), p=st.floats(0.2, 0.9), frac=st.sampled_from([0.1, 0.2, 0.3, 0.4]),
       seed=st.integers(0, 2**31))
def test_split_and_candidate_identities(n, p, frac, seed):
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    g = Graph.from_edges(np.column_stack([iu[keep], ju[keep]]), n_nodes=n)
    try:
        s = split_train_probe(g, frac, seed)
    except DegenerateSplitError:
        return
    train = {tuple(e) for e in s.train_edges}
    probe = {tuple(e) for e in s.probe_edges}
    assert not train & probe
    assert train | probe == g.edge_set()
    assert abs(len(probe) - frac * g.edge_count) <= 1
    cand = candidate_set(g, s)
    universe = n * (n - 1) // 2
    assert len(cand) == universe - len(train)
    assert cand.n_pos == len(probe)
    assert cand.n_neg == universe - g.edge_count
    assert all(i < j for i, j in cand.pairs)
    assert not any(tuple(p) in train for p in cand.pairs)
