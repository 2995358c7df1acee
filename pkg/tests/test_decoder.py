from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gesture_lstm.decoder import (
    DecodeError,
    LabelPath,
    argmax_path,
    brute_force_decode,
    map_decode,
    posterior,
    spot,
)

WORKED_PATH = [2, 2, 2, 2, 3, 3, 3, 3, 1, 1, 1, 6]


def block_path(blocks):
    return LabelPath([c for c, n in blocks for _ in range(n)], 6)


def random_paths(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        T = int(rng.integers(5, 41))
        A = LabelPath(rng.integers(1, 7, size=T), 6)
        k = int(rng.integers(1, 4))
        if k <= A.distinct:
            out.append((A, k))
    return out


def int_product(R, table):
    prod = 1
    for r in R:
        prod *= table.count(r)
    return prod


# argmax_path

def test_argmax_direct():
    assert argmax_path([[0.1, 0.9], [0.8, 0.2]]).labels == (2, 1)


def test_argmax_ties_go_to_lowest_class():
    assert argmax_path(np.full((5, 6), 1 / 6)).labels == (1,) * 5


def test_argmax_one_hot():
    idx = [3, 0, 5, 5, 2]
    assert argmax_path(np.eye(6)[idx]).labels == tuple(i + 1 for i in idx)


def test_argmax_rejects_empty():
    with pytest.raises(ValueError):
        argmax_path(np.zeros((0, 6)))


@given(st.integers(0, 2**32 - 1))
def test_argmax_commutes_with_relabelling(seed):
    rng = np.random.default_rng(seed)
    Y = rng.dirichlet(np.ones(6), size=int(rng.integers(1, 30)))
    perm = rng.permutation(6)  # new column j holds old column perm[j]
    inverse = np.argsort(perm)
    A = argmax_path(Y).labels
    B = argmax_path(Y[:, perm]).labels
    assert B == tuple(int(inverse[a - 1]) + 1 for a in A)


# spot

def test_spot_hand_count():
    tab = spot(LabelPath([2, 2, 3, 1], 3))
    assert tab.counts == {1: 1, 2: 2, 3: 1}
    assert tab.first == {2: 1, 3: 3, 1: 4}
    assert tab.sets[2] == (1, 2)


def test_spot_single_class():
    tab = spot(LabelPath([5] * 10, 6))
    assert tab.count(5) == 10
    assert sum(tab.counts.values()) == 10
    assert all(tab.count(i) == 0 for i in (1, 2, 3, 4, 6))
    assert 3 not in tab.first


@given(st.lists(st.integers(1, 6), min_size=1, max_size=60))
def test_spotting_sets_partition_the_path(labels):
    tab = spot(LabelPath(labels, 6))
    all_t = sorted(t for s in tab.sets.values() for t in s)
    assert all_t == list(range(1, len(labels) + 1))
    assert sum(tab.counts.values()) == len(labels)


# posterior

def test_posterior_examples():
    tab = spot(block_path([(2, 6), (1, 4)]))
    assert posterior((2,), tab) == Fraction(6, 10)
    tab = spot(block_path([(2, 5), (3, 3), (1, 2)]))
    assert posterior((2, 3), tab) == Fraction(15, 100)
    assert posterior((2, 4), tab) == 0


# map_decode

def test_worked_mapping():
    rec = map_decode(LabelPath(WORKED_PATH, 6), 3)
    assert rec.topk == {1, 2, 3}
    assert rec.R == (2, 3, 1)
    assert rec.posterior == Fraction(4 * 4 * 3, 12**3)


def test_four_gesture_block_path():
    rec = map_decode(block_path([(4, 40), (2, 35), (5, 30), (6, 28)]), 4)
    assert rec.R == (4, 2, 5, 6)


def test_single_class_path():
    rec = map_decode(LabelPath([3] * 8, 6), 1)
    assert rec.R == (3,) and rec.posterior == 1


def test_tie_rules():
    rec = map_decode(LabelPath([1, 1, 2, 2, 3], 3), 2)
    assert rec.topk == {1, 2}
    assert rec.R == (1, 2)


def test_tie_broken_by_first_occurrence():
    # classes 5 and 2 both have 2 steps; 5 shows up first so it wins the slot
    rec = map_decode(LabelPath([4, 4, 4, 5, 2, 5, 2], 6), 2)
    assert rec.R == (4, 5)


def test_stray_labels_are_outvoted():
    A = block_path([(1, 3), (4, 30), (3, 2), (2, 25), (6, 1)])
    assert map_decode(A, 2).R == (4, 2)


@pytest.mark.parametrize("k", [0, 3])
def test_k_out_of_range(k):
    with pytest.raises(DecodeError):
        map_decode(LabelPath([1, 1, 2], 6), k)


# brute force oracle

def test_brute_force_small_example():
    rec = brute_force_decode(LabelPath([1, 1, 2], 2), 1)
    assert rec.R == (1,) and rec.posterior == Fraction(2, 3)


def test_brute_force_full_k_covers_distinct_labels():
    A = LabelPath([3, 1, 1, 5, 3], 6)
    assert set(brute_force_decode(A, 3).R) == {1, 3, 5}


def test_brute_force_errors_like_map_decode():
    with pytest.raises(DecodeError):
        brute_force_decode(LabelPath([2, 2], 6), 2)


def test_map_decode_matches_brute_force_on_random_paths():
    for A, k in random_paths(300, seed=1):
        m, b = map_decode(A, k), brute_force_decode(A, k)
        T = len(A)
        assert int_product(m.R, m.spotting) == int_product(b.R, b.spotting)
        assert m.posterior == Fraction(int_product(m.R, m.spotting), T**k)


@given(st.lists(st.integers(1, 6), min_size=1, max_size=40), st.integers(1, 4))
def test_decode_properties(labels, k):
    A = LabelPath(labels, 6)
    if k > A.distinct:
        with pytest.raises(DecodeError):
            map_decode(A, k)
        return
    rec = map_decode(A, k)
    tab = rec.spotting
    assert len(rec.R) == k == len(set(rec.R))
    # member set carries the k largest cardinalities
    chosen = sorted((tab.count(r) for r in rec.R), reverse=True)
    assert chosen == sorted(tab.counts.values(), reverse=True)[:k]
    # reported in order of first appearance
    firsts = [tab.first[r] for r in rec.R]
    assert firsts == sorted(firsts) and len(set(firsts)) == k
    assert 0 <= rec.posterior <= 1
    # every ordering of the same members scores the same
    assert {posterior(P, tab) for P in permutations(rec.R)} == {rec.posterior}
