"""Label-path extraction, gesture spotting and MAP decoding.

Given per-timestep class probabilities y_t, the path is a_t = argmax_j y_tj.
Spotting collects I_i = {t : a_t = i} for each class. The posterior of an
ordered outcome R = (r_1..r_k) is prod_j |I_{r_j}| / T, so it is maximised by
the k classes with the largest spotting sets; they are reported in order of
first appearance in the path.

Timesteps are 1-based, like class labels.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class LabelPath:
    labels: tuple
    num_classes: int

    def __init__(self, labels, num_classes=None):
        labels = tuple(int(a) for a in labels)
        if not labels:
            raise ValueError("label path is empty")
        Q = max(labels) if num_classes is None else int(num_classes)
        if min(labels) < 1 or max(labels) > Q:
            raise ValueError(f"path labels must lie in 1..{Q}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_classes", Q)

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    @property
    def distinct(self):
        return len(set(self.labels))


@dataclass(frozen=True)
class SpottingTable:
    sets: dict  # class -> tuple of timesteps
    first: dict  # class -> first timestep; only classes present in the path
    T: int

    @property
    def counts(self):
        return {i: len(s) for i, s in self.sets.items()}

    def count(self, i):
        return len(self.sets.get(i, ()))


@dataclass(frozen=True)
class Recognition:
    R: tuple
    posterior: Fraction
    spotting: SpottingTable
    topk: frozenset

    @property
    def k(self):
        return len(self.R)


def argmax_path(Y):
    """Per-timestep argmax of a (T, Q) probability array; ties go to the lower class."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[0] == 0:
        raise ValueError(f"expected a non-empty (T, Q) array, got shape {Y.shape}")
    return LabelPath(np.argmax(Y, axis=1) + 1, Y.shape[1])


def spot(A, Q=None):
    Q = A.num_classes if Q is None else Q
    sets = {i: [] for i in range(1, Q + 1)}
    first = {}
    for t, a in enumerate(A.labels, start=1):
        if a not in sets:
            raise ValueError(f"label {a} outside 1..{Q}")
        sets[a].append(t)
        first.setdefault(a, t)
    return SpottingTable({i: tuple(s) for i, s in sets.items()}, first, len(A))


def posterior(R, table, T=None):
    """Exact prod_j |I_{r_j}| / T as a Fraction."""
    T = table.T if T is None else T
    num = 1
    for r in R:
        num *= table.count(r)
    return Fraction(num, T ** len(R))


def _check_k(A, k):
    if k < 1:
        raise DecodeError(f"k must be at least 1, got {k}")
    if k > A.distinct:
        raise DecodeError(
            f"cannot recognise {k} distinct gestures: the label path only "
            f"contains {A.distinct} class(es) {sorted(set(A.labels))}"
        )


def map_decode(A, k):
    _check_k(A, k)
    table = spot(A)
    present = sorted(table.first, key=lambda i: (-table.count(i), table.first[i], i))
    topk = present[:k]
    R = tuple(sorted(topk, key=table.first.__getitem__))
    return Recognition(R, posterior(R, table), table, frozenset(topk))


def brute_force_decode(A, k):
    """Maximise the posterior by enumerating every ordered k-tuple of classes."""
    _check_k(A, k)
    table = spot(A)
    best, best_post = None, Fraction(-1)
    for R in permutations(range(1, A.num_classes + 1), k):
        post = posterior(R, table)
        if post > best_post:
            best, best_post = R, post
    return Recognition(best, best_post, table, frozenset(best))
