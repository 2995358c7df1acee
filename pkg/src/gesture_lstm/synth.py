"""Parametric generator of 6-axis IMU-like gesture recordings.

Each of the six gesture classes is a fixed template: per channel, a sum of
sinusoid and gaussian-pulse primitives over normalised time u in [0, 1].
Rendering stretches the template to a (jittered) duration, scales each
primitive by a jittered amplitude and adds white noise. Sessions chain
gestures back to back, optionally separated by short noise-only gaps that
carry the preceding gesture's label.

Amplitudes and timesteps are in arbitrary units.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .dataset import SensorSequence, apply_mask

NUM_CLASSES = 6
NOMINAL_DURATION = 60


@dataclass(frozen=True)
class Primitive:
    kind: str  # "sine" or "pulse"
    amplitude: float
    shape: float  # sine: cycles over the gesture; pulse: width as a fraction of it
    offset: float  # sine: phase in radians; pulse: centre in [0, 1]

    def render(self, u, amplitude=None):
        a = self.amplitude if amplitude is None else amplitude
        if self.kind == "sine":
            return a * np.sin(2 * np.pi * self.shape * u + self.offset)
        if self.kind == "pulse":
            return a * np.exp(-0.5 * ((u - self.offset) / self.shape) ** 2)
        raise ValueError(f"unknown primitive kind {self.kind!r}")


@dataclass(frozen=True)
class GestureTemplate:
    cls: int
    channels: tuple  # 6 tuples of Primitive, ordered ax, ay, az, gx, gy, gz
    duration: int = NOMINAL_DURATION


@dataclass
class GenConfig:
    seed: int = 0
    duration_jitter: float = 0.2
    amplitude_jitter: float = 0.2
    noise_sigma: float = 0.1
    gap_range: tuple = (0, 8)
    sensor_mask: str = "both"

    def __post_init__(self):
        if not (0 <= self.duration_jitter < 1 and 0 <= self.amplitude_jitter < 1):
            raise ValueError("jitter fractions must lie in [0, 1)")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        lo, hi = self.gap_range
        if not 0 <= lo <= hi:
            raise ValueError(f"bad gap range {self.gap_range}")
        self.gap_range = (int(lo), int(hi))

    def to_dict(self):
        d = asdict(self)
        d["gap_range"] = list(self.gap_range)
        return d


def _sine(a, cycles, phase=0.0):
    return Primitive("sine", a, cycles, phase)


def _pulse(a, centre, width=0.1):
    return Primitive("pulse", a, width, centre)


_TEMPLATES = (
    # Every class opens with a pulse on its dominant channel whose sign and
    # axis are unique, so even the first samples of a gesture are informative.
    # 1: up-down stroke on az, one gx rotation cycle
    ((), (), (_pulse(1.5, 0.12), _pulse(-1.5, 0.55)), (_sine(1.0, 1),), (), ()),
    # 2: the mirror stroke on az, opposite gx rotation
    ((), (), (_pulse(-1.5, 0.12), _pulse(1.5, 0.55)), (_sine(-1.0, 1),), (), ()),
    # 3: left-right stroke on ax, gz rotation
    ((_pulse(1.5, 0.12), _pulse(-1.5, 0.55)), (), (), (), (), (_sine(1.0, 1),)),
    # 4: right-left stroke on ax, opposite gz rotation
    ((_pulse(-1.5, 0.12), _pulse(1.5, 0.55)), (), (), (), (), (_sine(-1.0, 1),)),
    # 5: triple push on ay, fast gy wobble
    ((), (_pulse(1.5, 0.1, 0.08), _pulse(-1.2, 0.45, 0.08), _pulse(1.2, 0.8, 0.08)),
     (), (), (_sine(0.8, 2),), ()),
    # 6: pull back on ay, then a circle-like ax swing with a broad gz sweep
    ((_sine(1.0, 1),), (_pulse(-1.5, 0.12), _sine(1.0, 0.5)), (), (), (),
     (_pulse(1.5, 0.5, 0.25),)),
)


def default_templates():
    return tuple(
        GestureTemplate(cls=n, channels=chans)
        for n, chans in enumerate(_TEMPLATES, start=1)
    )


def render(template, duration=None, amplitudes=None):
    """Noise-free waveform (duration, 6). ``amplitudes`` mirrors ``channels``."""
    D = template.duration if duration is None else duration
    u = np.linspace(0.0, 1.0, D)
    x = np.zeros((D, 6))
    for ch, prims in enumerate(template.channels):
        for n, prim in enumerate(prims):
            a = None if amplitudes is None else amplitudes[ch][n]
            x[:, ch] += prim.render(u, a)
    return x


def _duration(template, cfg, rng):
    nom, j = template.duration, cfg.duration_jitter
    lo = max(2, int(np.ceil(nom * (1 - j))))
    hi = int(np.floor(nom * (1 + j)))
    d = int(round(nom * (1 + rng.uniform(-j, j)))) if j > 0 else nom
    return min(max(d, lo), hi)


def gen_gesture(template, cfg, rng):
    D = _duration(template, cfg, rng)
    j = cfg.amplitude_jitter
    amps = [
        [p.amplitude * (1 + (rng.uniform(-j, j) if j > 0 else 0.0)) for p in prims]
        for prims in template.channels
    ]
    x = render(template, D, amps)
    if cfg.noise_sigma > 0:
        x = x + rng.normal(0.0, cfg.noise_sigma, x.shape)
    x = apply_mask(x, cfg.sensor_mask)
    labels = np.full(D, template.cls, dtype=np.int64)
    return SensorSequence(x, labels, [(template.cls, 0, D)])


def gen_session(classes, cfg, rng, templates=None):
    """Back-to-back gestures; gap timesteps take the preceding gesture's label."""
    classes = [int(c) for c in classes]
    if not classes:
        raise ValueError("a session needs at least one gesture")
    if len(classes) > 8:
        raise ValueError(f"sessions are limited to 8 gestures, got {len(classes)}")
    templates = templates or default_templates()
    by_cls = {t.cls: t for t in templates}
    parts, labels, segments, gaps = [], [], [], []
    t = 0
    lo, hi = cfg.gap_range
    for n, c in enumerate(classes):
        if c not in by_cls:
            raise ValueError(f"no template for gesture class {c}")
        g = gen_gesture(by_cls[c], cfg, rng)
        parts.append(g.x)
        start, t = t, t + len(g)
        if n < len(classes) - 1 and hi > 0:
            gap = int(rng.integers(lo, hi + 1))
            if gap:
                filler = np.zeros((gap, 6))
                if cfg.noise_sigma > 0:
                    filler = rng.normal(0.0, cfg.noise_sigma, (gap, 6))
                parts.append(apply_mask(filler, cfg.sensor_mask))
                gaps.append((t, t + gap))
                t += gap
        segments.append((c, start, t))
        labels.append(np.full(t - start, c, dtype=np.int64))
    return SensorSequence(np.concatenate(parts), np.concatenate(labels), segments, gaps)


@dataclass
class SessionSpec:
    """How many multi-gesture sessions go into each split.

    Random sessions draw ``min_len..max_len`` distinct classes; ``fixed``
    sessions (explicit class orders) are appended to the test split.
    """

    n_train: int = 0
    n_test: int = 0
    min_len: int = 2
    max_len: int = 4
    fixed: tuple = ()


def random_classes(rng, min_len, max_len, num_classes=NUM_CLASSES):
    n = int(rng.integers(min_len, max_len + 1))
    return [int(c) + 1 for c in rng.choice(num_classes, size=n, replace=False)]


def _split(cfg, n_per_class, n_sessions, spec, rng, templates, fixed=()):
    seqs = [
        gen_gesture(t, cfg, rng) for t in templates for _ in range(n_per_class)
    ]
    for _ in range(n_sessions):
        classes = random_classes(rng, spec.min_len, spec.max_len, len(templates))
        seqs.append(gen_session(classes, cfg, rng, templates))
    seqs.extend(gen_session(c, cfg, rng, templates) for c in fixed)
    return seqs


def gen_dataset(cfg, n_per_class, session_specs=None, n_test_per_class=None,
                templates=None):
    """Seeded train/test split of single gestures plus multi-gesture sessions.

    Train and test draw from independent child streams of ``cfg.seed``.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    spec = session_specs or SessionSpec()
    templates = templates or default_templates()
    if n_test_per_class is None:
        n_test_per_class = max(1, n_per_class // 4)
    train_ss, test_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    train = _split(cfg, n_per_class, spec.n_train, spec,
                   np.random.default_rng(train_ss), templates)
    test = _split(cfg, n_test_per_class, spec.n_test, spec,
                  np.random.default_rng(test_ss), templates, spec.fixed)
    return train, test
