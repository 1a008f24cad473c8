import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkeval.errors import DomainError, UndefinedCorrelationError
from linkeval.rank_correlation import correlation, kendall_tau, ranks_from_scores, spearman


def test_ranks_from_scores():
    assert ranks_from_scores([0.9, 0.5, 0.7]).tolist() == [1, 3, 2]
    assert ranks_from_scores([0.5, 0.5, 0.1]).tolist() == [1.5, 1.5, 3]
    assert ranks_from_scores([2.0] * 5).tolist() == [3.0] * 5
    assert ranks_from_scores([0.9, 0.5], higher_is_better=False).tolist() == [2, 1]
    with pytest.raises(DomainError):
        ranks_from_scores([1.0])


def test_spearman_hand_values():
    assert spearman([1, 2, 3, 4], [1, 2, 3, 4]) == pytest.approx(1)
    assert spearman([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1)
    assert spearman([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)
    with pytest.raises(UndefinedCorrelationError):
        spearman([1, 2, 3], [2, 2, 2])
    with pytest.raises(DomainError):
        spearman([1, 2, 3], [1, 2])


def test_kendall_hand_values():
    assert kendall_tau([1, 2, 3, 4], [1, 2, 3, 4]) == 1
    assert kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]) == -1
    assert kendall_tau([1, 2, 3], [1, 3, 2]) == pytest.approx(1 / 3)
    # tau-a: the tied pair counts in the denominator but not the numerator
    assert kendall_tau([1, 2, 3], [1, 1, 3]) == pytest.approx(2 / 3)
    with pytest.raises(UndefinedCorrelationError):
        correlation([1, 2, 3], [1, 1, 1], "kendall")
    with pytest.raises(DomainError):
        correlation([1, 2], [2, 1], "pearson")


def brute_kendall(a, b):
    nc = nd = 0
    for i, j in itertools.combinations(range(len(a)), 2):
        s = (a[i] - a[j]) * (b[i] - b[j])
        nc += s > 0
        nd += s < 0
    p = len(a)
    return 2 * (nc - nd) / (p * (p - 1))



@settings(max_examples=200, deadline=None)
@given(data=st.data(), p=st.integers(2, 30))
def test_kendall_matches_pair_counting(data, p):
    a = data.draw(st.lists(st.integers(1, 8), min_size=p, max_size=p))
    b = data.draw(st.lists(st.integers(1, 8), min_size=p, max_size=p))
    assert kendall_tau(a, b) == pytest.approx(brute_kendall(a, b), abs=1e-12)
    assert kendall_tau(a, b) == kendall_tau(b, a)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.integers(3, 40))
def test_properties(seed, p):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 10, p).astype(float)
    y = rng.integers(0, 10, p).astype(float)
    rx, ry = ranks_from_scores(x), ranks_from_scores(y)
    assert rx.sum() == pytest.approx(p * (p + 1) / 2)
    for coef in ("spearman", "kendall"):
        try:
            v = correlation(rx, ry, coef)
        except UndefinedCorrelationError:
            continue
        assert -1 <= v <= 1
        assert v == pytest.approx(correlation(ry, rx, coef))
        # strictly increasing transforms of the scores leave ranks unchanged
        v2 = correlation(ranks_from_scores(np.exp(x / 5) * 3 - 1), ranks_from_scores(y ** 3), coef)
        assert v2 == pytest.approx(v, abs=1e-12)
    perm = rng.permutation(p) + 1.0
    assert spearman(perm, perm) == pytest.approx(1)
    assert kendall_tau(perm, perm) == 1
