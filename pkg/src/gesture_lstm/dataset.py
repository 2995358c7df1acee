"""Sensor sequences and their on-disk formats.

CSV: header ``ax,ay,az,gx,gy,gz`` with an optional trailing ``label``
column, one row per timestep, values printed with 9 significant digits and
labels as 1-based integers.

A dataset directory holds the CSVs plus ``manifest.json`` mapping each file
to its role (train/test) and ground-truth gesture order.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CHANNELS = ("ax", "ay", "az", "gx", "gy", "gz")
SENSOR_MASKS = ("accel", "gyro", "both")
MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


class DataError(ValueError):
    pass


@dataclass
class SensorSequence:
    x: np.ndarray  # (T, 6)
    labels: np.ndarray | None = None  # (T,), 1-based
    segments: list = field(default_factory=list)  # (class, start, end), end exclusive
    gaps: list = field(default_factory=list)  # (start, end) spans of inter-gesture filler

    def __len__(self):
        return len(self.x)

    @property
    def truth(self):
        """Gesture classes in order of appearance."""
        return tuple(c for c, _, _ in self.segments)

    def masked(self, mask):
        return SensorSequence(
            apply_mask(self.x, mask), self.labels, list(self.segments), list(self.gaps)
        )


def apply_mask(x, mask):
    """Zero the gyroscope (``accel``) or accelerometer (``gyro``) channels."""
    if mask not in SENSOR_MASKS:
        raise ValueError(f"unknown sensor mask {mask!r}; expected one of {SENSOR_MASKS}")
    x = np.array(x, dtype=np.float64)
    if mask == "accel":
        x[:, 3:6] = 0.0
    elif mask == "gyro":
        x[:, 0:3] = 0.0
    return x


def segments_from_labels(labels):
    segs = []
    start = 0
    for t in range(1, len(labels) + 1):
        if t == len(labels) or labels[t] != labels[start]:
            segs.append((int(labels[start]), start, t))
            start = t
    return segs


def expand_segments(segments):
    return np.concatenate(
        [np.full(end - start, c, dtype=np.int64) for c, start, end in segments]
    )


def save_csv(seq, path):
    path = Path(path)
    labelled = seq.labels is not None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CHANNELS + (("label",) if labelled else ()))
        for t, row in enumerate(seq.x):
            vals = [f"{v:.9g}" for v in row]
            if labelled:
                vals.append(str(int(seq.labels[t])))
            w.writerow(vals)


def load_csv(path):
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file (missing header)")
    header = tuple(h.strip() for h in rows[0])
    if header == CHANNELS:
        labelled = False
    elif header == CHANNELS + ("label",):
        labelled = True
    else:
        raise DataError(
            f"{path}: line 1: bad header {','.join(header)!r}, "
            f"expected {','.join(CHANNELS)}[,label]"
        )
    width = len(header)
    xs, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise DataError(
                f"{path}: line {lineno}: expected {width} columns, got {len(row)}"
            )
        try:
            vals = [float(v) for v in row[:6]]
            if labelled:
                labels.append(int(row[6]))
        except ValueError as exc:
            raise DataError(f"{path}: line {lineno}: malformed row ({exc})") from None
        if not np.all(np.isfinite(vals)):
            raise DataError(f"{path}: line {lineno}: non-finite value")
        xs.append(vals)
    if not xs:
        raise DataError(f"{path}: no samples")
    x = np.array(xs, dtype=np.float64)
    if not labelled:
        return SensorSequence(x)
    labels = np.array(labels, dtype=np.int64)
    if labels.min() < 1:
        raise DataError(f"{path}: labels must be 1-based positive integers")
    return SensorSequence(x, labels, segments_from_labels(labels))


def write_dataset(directory, train, test, generator=None):
    """Write train/test sequences as CSVs plus a manifest; returns the manifest path."""
    directory = Path(directory)
    entries = []
    for role, seqs in (("train", train), ("test", test)):
        (directory / role).mkdir(parents=True, exist_ok=True)
        for n, seq in enumerate(seqs):
            rel = f"{role}/{role}_{n:05d}.csv"
            save_csv(seq, directory / rel)
            entries.append(
                {"file": rel, "role": role, "truth": list(seq.truth), "k": len(seq.truth)}
            )
    manifest = {"version": MANIFEST_VERSION, "generator": generator, "files": entries}
    out = directory / MANIFEST_NAME
    out.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return out


def read_manifest(directory):
    directory = Path(directory)
    path = directory / MANIFEST_NAME
    if not path.exists():
        raise DataError(f"no dataset manifest at {path}")
    try:
        manifest = json.loads(path.read_text())
        files = manifest["files"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: malformed manifest ({exc})") from None
    if manifest.get("version") != MANIFEST_VERSION:
        raise DataError(f"{path}: unsupported manifest version {manifest.get('version')!r}")
    for entry in files:
        try:
            truth = [int(c) for c in entry["truth"]]
            ok = entry["role"] in ("train", "test") and int(entry["k"]) == len(truth) >= 1
        except (KeyError, TypeError, ValueError):
            ok = False
        if not ok:
            raise DataError(f"{path}: bad manifest entry {entry!r}")
    return manifest


def load_split(directory, role):
    """Load every file of one role as ``(sequence, truth)`` pairs, manifest order."""
    directory = Path(directory)
    out = []
    for entry in read_manifest(directory)["files"]:
        if entry["role"] != role:
            continue
        seq = load_csv(directory / entry["file"])
        truth = tuple(int(c) for c in entry["truth"])
        if seq.labels is not None and seq.truth != truth:
            raise DataError(
                f"{entry['file']}: labels give gesture order {seq.truth}, "
                f"manifest says {truth}"
            )
        out.append((seq, truth))
    return out
