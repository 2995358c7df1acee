"""Portable JSON model file.

Layout (keys always in this order)::

    {
      "format": "gesture-lstm",
      "version": 1,
      "N": 6, "H": 32, "Q": 6,
      "gate_order": "ifgo",
      "seed": 0,
      "train_config": {...},
      "W_x": [[...], ...],      4H rows x N
      "W_h": [[...], ...],      4H rows x H
      "b":   [...],             4H
      "W_y": [[...], ...],      Q rows x H
      "b_y": [...]              Q
    }

Numbers are written as shortest round-trip decimals, so loading a file
reproduces the float64 parameters exactly and re-saving is byte-identical.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lstm import GATE_ORDER, PARAM_NAMES, LstmParams, OutputParams

FORMAT_NAME = "gesture-lstm"
FORMAT_VERSION = 1


class ModelFileError(ValueError):
    pass


@dataclass
class ModelFile:
    params: LstmParams
    output: OutputParams
    train_config: dict = field(default_factory=dict)
    seed: int = 0
    version: int = FORMAT_VERSION
    gate_order: str = GATE_ORDER

    @property
    def shape(self):
        return self.params.input_dim, self.params.hidden_dim, self.output.num_classes


def _num(v):
    v = float(v)
    if not np.isfinite(v):
        raise ModelFileError("model parameters must be finite")
    return v


def _array_json(a, indent="  "):
    if a.ndim == 1:
        return json.dumps([_num(v) for v in a])
    rows = [indent + "  " + json.dumps([_num(v) for v in row]) for row in a]
    return "[\n" + ",\n".join(rows) + "\n" + indent + "]"


def dumps(model):
    N, H, Q = model.shape
    head = {
        "format": FORMAT_NAME,
        "version": model.version,
        "N": N,
        "H": H,
        "Q": Q,
        "gate_order": model.gate_order,
        "seed": model.seed,
        "train_config": model.train_config,
    }
    arrays = {
        "W_x": model.params.W_x,
        "W_h": model.params.W_h,
        "b": model.params.b,
        "W_y": model.output.W_y,
        "b_y": model.output.b_y,
    }
    items = [f'  "{k}": {json.dumps(v, sort_keys=True, allow_nan=False)}' for k, v in head.items()]
    items += [f'  "{k}": {_array_json(np.asarray(v))}' for k, v in arrays.items()]
    return "{\n" + ",\n".join(items) + "\n}\n"


def loads(text, source="<string>"):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"malformed model file {source}: {exc}") from None
    if not isinstance(d, dict) or d.get("format") != FORMAT_NAME:
        raise ModelFileError(f"malformed model file {source}: not a {FORMAT_NAME} model")
    if d.get("version") != FORMAT_VERSION:
        raise ModelFileError(
            f"unsupported model file version {d.get('version')!r} in {source} "
            f"(expected {FORMAT_VERSION})"
        )
    missing = [k for k in ("N", "H", "Q", "gate_order", *PARAM_NAMES) if k not in d]
    if missing:
        raise ModelFileError(f"malformed model file {source}: missing {', '.join(missing)}")
    if d["gate_order"] != GATE_ORDER:
        raise ModelFileError(
            f"model file {source} uses gate order {d['gate_order']!r}, expected {GATE_ORDER!r}"
        )
    arrays = {}
    for k in PARAM_NAMES:
        try:
            arrays[k] = np.array(d[k], dtype=np.float64)
        except (TypeError, ValueError):
            raise ModelFileError(f"malformed model file {source}: {k} is not a numeric array") from None
    N, H, Q = d["N"], d["H"], d["Q"]
    expected = {
        "W_x": (4 * H, N),
        "W_h": (4 * H, H),
        "b": (4 * H,),
        "W_y": (Q, H),
        "b_y": (Q,),
    }
    for k, shape in expected.items():
        if arrays[k].shape != shape:
            raise ModelFileError(
                f"shape error in {source}: header says N={N}, H={H}, Q={Q} so {k} "
                f"should be {'x'.join(map(str, shape))}, but it is "
                f"{'x'.join(map(str, arrays[k].shape))}"
            )
    return ModelFile(
        LstmParams(arrays["W_x"], arrays["W_h"], arrays["b"]),
        OutputParams(arrays["W_y"], arrays["b_y"]),
        train_config=d.get("train_config") or {},
        seed=d.get("seed", 0),
        version=d["version"],
        gate_order=d["gate_order"],
    )


def save_model(model, path):
    Path(path).write_text(dumps(model))


def load_model(path):
    path = Path(path)
    if not path.exists():
        raise ModelFileError(f"model file not found: {path}")
    return loads(path.read_text(), str(path))
