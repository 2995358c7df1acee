"""Single-layer LSTM with a per-timestep softmax head.

Gate blocks are stacked in the order input, forget, cell-candidate, output
("ifgo") along the first axis of ``W_x``, ``W_h`` and ``b``::

    z_t = W_x x_t + W_h h_{t-1} + b          (4H)
    c_t = sigmoid(f) * c_{t-1} + sigmoid(i) * tanh(g)
    h_t = sigmoid(o) * tanh(c_t)
    y_t = softmax(W_y h_t + b_y)

The recurrence starts from h_0 = c_0 = 0. Class labels are 1-based
everywhere in the public API.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .numerics import matvec, sigmoid, softmax, tanh_elem

log = logging.getLogger(__name__)

GATE_ORDER = "ifgo"
PARAM_NAMES = ("W_x", "W_h", "b", "W_y", "b_y")
PROB_FLOOR = 1e-12


@dataclass
class LstmParams:
    W_x: np.ndarray  # (4H, N)
    W_h: np.ndarray  # (4H, H)
    b: np.ndarray  # (4H,)

    @property
    def hidden_dim(self):
        return self.W_h.shape[1]

    @property
    def input_dim(self):
        return self.W_x.shape[1]

    def validate(self):
        H = self.W_h.shape[1] if self.W_h.ndim == 2 else -1
        if H < 1 or self.W_h.shape != (4 * H, H):
            raise ValueError(f"W_h must be (4H, H), got {self.W_h.shape}")
        if self.W_x.ndim != 2 or self.W_x.shape[0] != 4 * H or self.W_x.shape[1] < 1:
            raise ValueError(f"W_x must be ({4 * H}, N), got {self.W_x.shape}")
        if self.b.shape != (4 * H,):
            raise ValueError(f"b must be ({4 * H},), got {self.b.shape}")


@dataclass
class OutputParams:
    W_y: np.ndarray  # (Q, H)
    b_y: np.ndarray  # (Q,)

    @property
    def num_classes(self):
        return self.W_y.shape[0]

    def validate(self, hidden_dim):
        if self.W_y.ndim != 2 or self.W_y.shape[1] != hidden_dim:
            raise ValueError(
                f"W_y must be (Q, {hidden_dim}), got {self.W_y.shape}"
            )
        if self.b_y.shape != (self.W_y.shape[0],):
            raise ValueError(
                f"b_y must be ({self.W_y.shape[0]},), got {self.b_y.shape}"
            )


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_dim):
        return cls(np.zeros(hidden_dim), np.zeros(hidden_dim))


@dataclass
class ForwardTrace:
    """Everything backprop needs, stored time-major as (T, B, ...).

    A batch holds B sequences of possibly different lengths. Rows past a
    sequence's own length are computed on zero input but carry zero loss
    weight, and since the recurrence is causal they never influence the
    earlier steps of that sequence.
    """

    x: np.ndarray  # (T, B, N)
    gates: np.ndarray  # (T, B, 4H), post-activation
    c: np.ndarray  # (T+1, B, H), c[0] = 0
    h: np.ndarray  # (T+1, B, H), h[0] = 0
    logits: np.ndarray  # (T, B, Q)
    y: np.ndarray  # (T, B, Q)
    lengths: np.ndarray  # (B,)

    def __len__(self):
        return self.y.shape[0]

    @property
    def batch_size(self):
        return self.y.shape[1]

    def outputs(self, b=0):
        """Softmax outputs of sequence ``b``, shape (T_b, Q)."""
        return self.y[: self.lengths[b], b]

    @property
    def probs(self):
        if self.batch_size != 1:
            raise ValueError("probs is only defined for a single-sequence trace")
        return self.y[:, 0]


@dataclass
class TrainConfig:
    hidden_dim: int = 32
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 20
    batch_size: int = 16
    seed: int = 0
    clip: float = 5.0
    num_classes: int | None = None  # None: infer from the largest label

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainResult:
    params: LstmParams
    output: OutputParams
    loss_history: list = field(default_factory=list)


def param_dict(p, o):
    return {"W_x": p.W_x, "W_h": p.W_h, "b": p.b, "W_y": o.W_y, "b_y": o.b_y}


def from_param_dict(d):
    return LstmParams(d["W_x"], d["W_h"], d["b"]), OutputParams(d["W_y"], d["b_y"])


def init_params(N, H, Q, seed=0):
    """Uniform +-1/sqrt(fan_in) weights, zero biases, forget-gate bias 1."""
    if min(N, H, Q) < 1:
        raise ValueError(f"N, H, Q must be >= 1, got {(N, H, Q)}")
    rng = np.random.default_rng(seed)
    s_in = 1.0 / np.sqrt(N + H)
    W_x = rng.uniform(-s_in, s_in, size=(4 * H, N))
    W_h = rng.uniform(-s_in, s_in, size=(4 * H, H))
    b = np.zeros(4 * H)
    b[H : 2 * H] = 1.0
    s_out = 1.0 / np.sqrt(H)
    W_y = rng.uniform(-s_out, s_out, size=(Q, H))
    b_y = np.zeros(Q)
    return LstmParams(W_x, W_h, b), OutputParams(W_y, b_y)


def _cell(z, c_prev, H):
    # z holds gate pre-activations for one timestep, shape (..., 4H)
    i = sigmoid(z[..., :H])
    f = sigmoid(z[..., H : 2 * H])
    g = tanh_elem(z[..., 2 * H : 3 * H])
    o = sigmoid(z[..., 3 * H :])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return np.concatenate([i, f, g, o], axis=-1), c, h


def lstm_step(p, x_t, prev):
    x_t = np.asarray(x_t, dtype=np.float64)
    z = matvec(p.W_x, x_t) + matvec(p.W_h, prev.h) + p.b
    _, c, h = _cell(z, prev.c, p.hidden_dim)
    return LstmState(h=h, c=c)


def _stack(xs, N):
    lengths = np.array([len(x) for x in xs], dtype=np.int64)
    if len(xs) == 0 or lengths.min() < 1:
        raise ValueError("cannot run the LSTM on an empty sequence")
    X = np.zeros((lengths.max(), len(xs), N))
    for b, x in enumerate(xs):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != N:
            raise ValueError(
                f"sequence {b} has shape {x.shape}, expected (T, {N})"
            )
        X[: len(x), b] = x
    return X, lengths


def forward_batch(p, o, xs):
    """Run the network over a list of (T_b, N) input arrays."""
    H = p.hidden_dim
    X, lengths = _stack(xs, p.input_dim)
    T, B, _ = X.shape
    XW = X @ p.W_x.T + p.b
    gates = np.empty((T, B, 4 * H))
    c = np.zeros((T + 1, B, H))
    h = np.zeros((T + 1, B, H))
    W_hT = p.W_h.T
    for t in range(T):
        gates[t], c[t + 1], h[t + 1] = _cell(XW[t] + h[t] @ W_hT, c[t], H)
    logits = h[1:] @ o.W_y.T + o.b_y
    return ForwardTrace(X, gates, c, h, logits, softmax(logits), lengths)


def forward_sequence(p, o, x):
    """Forward pass over one (T, N) sequence; ``trace.probs`` is (T, Q)."""
    x = getattr(x, "x", x)
    return forward_batch(p, o, [x])


def _label_batch(trace, labels):
    if trace.batch_size == 1 and np.ndim(labels[0]) == 0:
        labels = [labels]
    if len(labels) != trace.batch_size:
        raise ValueError(
            f"got {len(labels)} label paths for {trace.batch_size} sequences"
        )
    T, B, Q = trace.y.shape
    idx = np.zeros((T, B), dtype=np.int64)
    w = np.zeros((T, B))
    for b, lab in enumerate(labels):
        lab = np.asarray(lab, dtype=np.int64)
        n = trace.lengths[b]
        if lab.shape != (n,):
            raise ValueError(
                f"sequence {b}: {lab.shape[0] if lab.ndim else 0} labels "
                f"for {n} timesteps"
            )
        if lab.min() < 1 or lab.max() > Q:
            raise ValueError(f"sequence {b}: labels must lie in 1..{Q}")
        idx[:n, b] = lab - 1
        w[:n, b] = 1.0 / (n * B)
    return idx, w


def sequence_loss(trace, labels):
    """Mean per-timestep cross-entropy (averaged per sequence, then over the batch)."""
    idx, w = _label_batch(trace, labels)
    picked = np.take_along_axis(trace.y, idx[..., None], axis=2)[..., 0]
    return float(np.sum(-np.log(np.maximum(picked, PROB_FLOOR)) * w))


def backward_bptt(p, o, trace, labels):
    idx, w = _label_batch(trace, labels)
    H = p.hidden_dim
    T, B, Q = trace.y.shape
    N = p.input_dim

    dlogits = trace.y.copy()
    np.put_along_axis(
        dlogits, idx[..., None],
        np.take_along_axis(dlogits, idx[..., None], axis=2) - 1.0, axis=2,
    )
    dlogits *= w[..., None]

    hs = trace.h[1:].reshape(T * B, H)
    dW_y = dlogits.reshape(T * B, Q).T @ hs
    db_y = dlogits.sum(axis=(0, 1))
    dh_out = dlogits @ o.W_y

    dZ = np.empty((T, B, 4 * H))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    W_h = p.W_h
    for t in range(T - 1, -1, -1):
        gt = trace.gates[t]
        i, f, g, og = gt[:, :H], gt[:, H : 2 * H], gt[:, 2 * H : 3 * H], gt[:, 3 * H :]
        tc = np.tanh(trace.c[t + 1])
        dh = dh_out[t] + dh_next
        dc = dc_next + dh * og * (1.0 - tc * tc)
        dz = dZ[t]
        dz[:, :H] = dc * g * i * (1.0 - i)
        dz[:, H : 2 * H] = dc * trace.c[t] * f * (1.0 - f)
        dz[:, 2 * H : 3 * H] = dc * i * (1.0 - g * g)
        dz[:, 3 * H :] = dh * tc * og * (1.0 - og)
        dh_next = dz @ W_h
        dc_next = dc * f

    dZ2 = dZ.reshape(T * B, 4 * H)
    return {
        "W_x": dZ2.T @ trace.x.reshape(T * B, N),
        "W_h": dZ2.T @ trace.h[:-1].reshape(T * B, H),
        "b": dZ2.sum(axis=0),
        "W_y": dW_y,
        "b_y": db_y,
    }


def init_moments(params):
    return {k: (np.zeros_like(v), np.zeros_like(v)) for k, v in params.items()}


def clip_gradients(grads, max_norm):
    norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        return {k: g * scale for k, g in grads.items()}, norm
    return grads, norm


def adam_update(params, grads, moments, cfg, step):
    """One bias-corrected Adam step after global-norm clipping.

    Returns fresh ``(params, moments)`` dicts; the inputs are not modified.
    """
    if step < 1:
        raise ValueError("Adam step counter starts at 1")
    grads, _ = clip_gradients(grads, cfg.clip)
    c1 = 1.0 - cfg.beta1**step
    c2 = 1.0 - cfg.beta2**step
    new_params, new_moments = {}, {}
    for k, p in params.items():
        g = grads[k]
        m, v = moments[k]
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g
        new_params[k] = p - cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
        new_moments[k] = (m, v)
    return new_params, new_moments


def _check_dataset(dataset, num_classes):
    if not dataset:
        raise ValueError("training set is empty")
    N = np.shape(dataset[0].x)[1] if np.ndim(dataset[0].x) == 2 else None
    for n, seq in enumerate(dataset):
        x = np.asarray(seq.x)
        if x.ndim != 2 or x.shape[1] != N or len(x) == 0:
            raise ValueError(
                f"training sequence {n} has shape {x.shape}, expected (T, {N})"
            )
        if seq.labels is None or len(seq.labels) != len(x):
            raise ValueError(f"training sequence {n} lacks per-timestep labels")
    top = max(int(np.max(seq.labels)) for seq in dataset)
    Q = num_classes or top
    for n, seq in enumerate(dataset):
        if np.min(seq.labels) < 1 or np.max(seq.labels) > Q:
            raise ValueError(f"training sequence {n} has labels outside 1..{Q}")
    return N, Q


def train(dataset, cfg, on_epoch=None):
    """Fit the network on labelled sequences (objects with ``x`` and ``labels``).

    Each epoch shuffles with a seeded generator and steps Adam once per
    mini-batch of ``cfg.batch_size`` sequences. ``on_epoch(epoch, loss)`` is
    called after every epoch.
    """
    N, Q = _check_dataset(dataset, cfg.num_classes)
    p, o = init_params(N, cfg.hidden_dim, Q, cfg.seed)
    params = param_dict(p, o)
    moments = init_moments(params)
    rng = np.random.default_rng([cfg.seed, 1])
    history = []
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(dataset))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = [dataset[n] for n in order[start : start + cfg.batch_size]]
            p, o = from_param_dict(params)
            trace = forward_batch(p, o, [s.x for s in batch])
            labels = [s.labels for s in batch]
            total += sequence_loss(trace, labels) * len(batch)
            grads = backward_bptt(p, o, trace, labels)
            step += 1
            params, moments = adam_update(params, grads, moments, cfg, step)
        history.append(total / len(dataset))
        log.info("epoch %d loss %.6f", epoch + 1, history[-1])
        if on_epoch is not None:
            on_epoch(epoch + 1, history[-1])
    p, o = from_param_dict(params)
    return TrainResult(p, o, history)


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst: tuple  # (parameter name, index)
    passed: bool
    tolerance: float

    def __str__(self):
        name, idx = self.worst
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} max relative error {self.max_rel_error:.3e} "
            f"at {name}{list(idx)} (tolerance {self.tolerance:g})"
        )


def gradient_check(p, o, x, labels, step=1e-5, tolerance=1e-4, grads=None):
    """Compare analytic gradients against central finite differences.

    ``grads`` overrides the analytic gradients (used to test the harness).
    Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-8).
    """
    if grads is None:
        grads = backward_bptt(p, o, forward_sequence(p, o, x), labels)
    params = {k: v.copy() for k, v in param_dict(p, o).items()}

    def loss():
        pp, oo = from_param_dict(params)
        return sequence_loss(forward_sequence(pp, oo, x), labels)

    worst_err, worst = -1.0, None
    for name in PARAM_NAMES:
        arr = params[name]
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + step
            up = loss()
            arr[idx] = orig - step
            down = loss()
            arr[idx] = orig
            num = (up - down) / (2.0 * step)
            ana = grads[name][idx]
            err = abs(ana - num) / max(abs(ana), abs(num), 1e-8)
            if err > worst_err:
                worst_err, worst = err, (name, idx)
    return GradCheckReport(worst_err, worst, worst_err < tolerance, tolerance)


def random_instance(seed, N=3, H=4, Q=3, T=5, scale=0.5):
    """Small random network, input and labels for gradient checking."""
    rng = np.random.default_rng(seed)
    p = LstmParams(
        rng.normal(0, scale, (4 * H, N)),
        rng.normal(0, scale, (4 * H, H)),
        rng.normal(0, scale, 4 * H),
    )
    o = OutputParams(rng.normal(0, scale, (Q, H)), rng.normal(0, scale, Q))
    x = rng.normal(0, 1.0, (T, N))
    labels = rng.integers(1, Q + 1, size=T)
    return p, o, x, labels
