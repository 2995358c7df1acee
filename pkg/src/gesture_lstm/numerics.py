"""Dense float64 kernels used by the LSTM.

Vectors are 1-D ``numpy`` arrays and matrices are 2-D row-major arrays.
Every kernel also accepts a stack of row vectors (a 2-D array for
``sigmoid``/``tanh_elem``/``softmax``) so the recurrence can run on a batch.
"""

import numpy as np

SIGMOID_CLAMP = 500.0


def as_vector(v):
    return np.asarray(v, dtype=np.float64)


def matvec(M, v):
    M = np.asarray(M, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if M.ndim != 2 or v.ndim != 1 or M.shape[1] != v.shape[0]:
        raise ValueError(
            f"matvec dimension mismatch: matrix {M.shape} vs vector {v.shape}"
        )
    return M @ v


def sigmoid(v):
    z = np.clip(as_vector(v), -SIGMOID_CLAMP, SIGMOID_CLAMP)
    return 1.0 / (1.0 + np.exp(-z))


def tanh_elem(v):
    return np.tanh(as_vector(v))


def softmax(v):
    """Softmax over the last axis, stabilised by subtracting the max."""
    v = as_vector(v)
    if v.shape[-1] < 1:
        raise ValueError("softmax of an empty vector")
    e = np.exp(v - v.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)
