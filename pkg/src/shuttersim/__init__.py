"""Shutter exposure simulation, paired-dataset synthesis, and evaluation."""

from ._kernels import BACKEND
from .compensate import compensate, row_gains
from .dataio import (
    Manifest,
    SequenceEntry,
    load_manifest,
    read_frame,
    read_sequence,
    save_manifest,
    validate_manifest,
    write_frame,
    write_sequence,
)
from .errors import (
    CorruptionError,
    DimensionError,
    EncodingError,
    FormatError,
    ManifestError,
    PairingError,
    ParameterError,
    ShutterSimError,
    TemporalRangeError,
)
from .exposure import (
    ExposureSchedule,
    RowWindow,
    ScanDirection,
    ShutterMode,
    ee_channel,
    row_timing,
    row_window,
)
from .frames import Frame, Sequence, from_frames
from .metrics import (
    EvalReport,
    NeighborMotionReport,
    neighbor_motion,
    psnr,
    region_eval,
    ssim,
)
from .scenes import SceneKind, SceneSpec, gen_scene
from .sensor import integrate_exposure, synth_pair, synth_sequence

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CorruptionError",
    "DimensionError",
    "EncodingError",
    "EvalReport",
    "ExposureSchedule",
    "FormatError",
    "Frame",
    "Manifest",
    "ManifestError",
    "NeighborMotionReport",
    "PairingError",
    "ParameterError",
    "RowWindow",
    "ScanDirection",
    "SceneKind",
    "SceneSpec",
    "Sequence",
    "SequenceEntry",
    "ShutterMode",
    "ShutterSimError",
    "TemporalRangeError",
    "compensate",
    "ee_channel",
    "from_frames",
    "gen_scene",
    "integrate_exposure",
    "load_manifest",
    "neighbor_motion",
    "psnr",
    "read_frame",
    "read_sequence",
    "region_eval",
    "row_gains",
    "row_timing",
    "row_window",
    "save_manifest",
    "ssim",
    "synth_pair",
    "synth_sequence",
    "validate_manifest",
    "write_frame",
    "write_sequence",
]
