"""Orientation-aware appearance galleries for multi-object tracking-by-detection."""

from .gallery import Gallery
from .io_formats import DetectionRecord, FeatureTable, KeypointRecord
from .metrics import MotScores
from .pose_orientation import Orientation, TorsoPoints, orientation_bin, s2t_ratio
from .synth import SynthConfig
from .tracker import Tracker, TrackerConfig, run_sequence

__version__ = "0.1.0"

__all__ = [
    "DetectionRecord",
    "FeatureTable",
    "Gallery",
    "KeypointRecord",
    "MotScores",
    "Orientation",
    "SynthConfig",
    "TorsoPoints",
    "Tracker",
    "TrackerConfig",
    "orientation_bin",
    "run_sequence",
    "s2t_ratio",
    "__version__",
]
