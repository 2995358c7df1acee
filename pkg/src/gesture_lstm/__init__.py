"""Continuous hand-gesture recognition from 6-axis inertial data.

A many-to-many LSTM labels every timestep; the label path is then mapped
to the k most-supported gestures, ordered by first appearance.
"""

from .decoder import LabelPath, Recognition, argmax_path, map_decode, spot
from .lstm import LstmParams, OutputParams, TrainConfig, forward_sequence, train
from .pipeline import label_path, recognize

__all__ = [
    "LabelPath",
    "LstmParams",
    "OutputParams",
    "Recognition",
    "TrainConfig",
    "argmax_path",
    "forward_sequence",
    "label_path",
    "map_decode",
    "recognize",
    "spot",
    "train",
]
__version__ = "0.1.0"
