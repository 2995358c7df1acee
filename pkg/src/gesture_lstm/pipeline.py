"""End-to-end recognition: LSTM outputs -> label path -> MAP outcome."""

from .decoder import argmax_path, map_decode
from .lstm import forward_sequence


def label_path(params, output, x):
    return argmax_path(forward_sequence(params, output, x).probs)


def recognize(params, output, x, k):
    return map_decode(label_path(params, output, x), k)
