"""Bit-exact persistence: raw float frames, sequence directories, manifests.

Frame file layout (little-endian):

    magic    4 bytes  "RSGR"
    version  u32      1
    height   u32
    width    u32
    channels u32
    encoding u32      0 = linear, otherwise round(gamma * 1e6)
    payload  height*width*channels float32, row-major, channel-interleaved

One file per frame, named ``000000.rsgr``, ``000001.rsgr``, ... Sequence
metadata (frame period, schedule, pairing) lives in the dataset manifest, a
single JSON file at the dataset root. Serialization is deterministic: sorted
keys, no timestamps.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptionError, EncodingError, FormatError, ManifestError
from .exposure import ExposureSchedule, ScanDirection, ShutterMode
from .frames import Frame, Sequence

MAGIC = b"RSGR"
FORMAT_VERSION = 1
FRAME_SUFFIX = ".rsgr"
MANIFEST_NAME = "manifest.json"

_HEADER = struct.Struct("<4s5I")

ROLES = ("source", "rsgr", "gs", "rs", "prediction")
SPLITS = ("train", "val", "test")


def _encode_gamma(gamma: float | None) -> int:
    if gamma is None:
        return 0
    code = round(gamma * 1e6)
    if not 0 < code < 2**32:
        raise EncodingError(f"gamma {gamma} not representable in the frame header")
    return code


def _decode_gamma(code: int) -> float | None:
    return None if code == 0 else code / 1e6


def frame_filename(index: int) -> str:
    return f"{index:06d}{FRAME_SUFFIX}"


def write_frame(frame: Frame, path: str | Path) -> None:
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        frame.height,
        frame.width,
        frame.channels,
        _encode_gamma(frame.gamma),
    )
    payload = np.ascontiguousarray(frame.data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_frame(path: str | Path) -> Frame:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise CorruptionError(f"{path}: file shorter than the header")
    magic, version, h, w, c, enc = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + h * w * c * 4
    if len(blob) != expected:
        raise CorruptionError(
            f"{path}: payload is {len(blob) - _HEADER.size} bytes, expected {expected - _HEADER.size}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(h, w, c)
    return Frame(data.copy(), gamma=_decode_gamma(enc))


def write_sequence(seq: Sequence, directory: str | Path) -> None:
    """Write one file per frame into ``directory`` (created if missing)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i in range(len(seq)):
        write_frame(seq.frame(i), directory / frame_filename(i))


def read_sequence(
    directory: str | Path,
    frame_period_s: float = 1.0,
    schedule: ExposureSchedule | None = None,
) -> Sequence:
    """Read every ``.rsgr`` frame in ``directory`` in index order.

    The frame files carry no timing, so ``frame_period_s`` (normally taken
    from the manifest) must be supplied by the caller.
    """
    directory = Path(directory)
    paths = sorted(directory.glob(f"*{FRAME_SUFFIX}"))
    if not paths:
        raise FormatError(f"no {FRAME_SUFFIX} frames in {directory}")
    frames = [read_frame(p) for p in paths]
    shape = frames[0].data.shape
    gamma = frames[0].gamma
    for p, f in zip(paths, frames):
        if f.data.shape != shape or f.gamma != gamma:
            raise FormatError(f"{p}: inconsistent dimensions or encoding within sequence")
    data = np.stack([f.data for f in frames])
    return Sequence(data, frame_period_s=frame_period_s, gamma=gamma, schedule=schedule)


def schedule_to_dict(schedule: ExposureSchedule) -> dict:
    return {
        "mode": schedule.mode.value,
        "rows": schedule.rows,
        "base_exposure_s": schedule.base_exposure_s,
        "readout_ratio": schedule.readout_ratio,
        "scan_direction": schedule.scan_direction.value,
    }


def schedule_from_dict(d: dict) -> ExposureSchedule:
    try:
        return ExposureSchedule(
            mode=ShutterMode(d["mode"]),
            rows=int(d["rows"]),
            base_exposure_s=float(d["base_exposure_s"]),
            readout_ratio=float(d["readout_ratio"]),
            scan_direction=ScanDirection(d["scan_direction"]),
        )
    except (KeyError, ValueError) as e:
        raise ManifestError(f"bad schedule entry: {e}") from e


@dataclass
class SequenceEntry:
    """Manifest row describing one stored sequence."""

    id: str
    role: str
    path: str
    frame_count: int
    height: int
    width: int
    channels: int
    frame_period_s: float
    gamma: float | None = None
    schedule: ExposureSchedule | None = None
    pairing_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "role": self.role,
            "path": self.path,
            "frame_count": self.frame_count,
            "height": self.height,
            "width": self.width,
            "channels": self.channels,
            "frame_period_s": self.frame_period_s,
            "encoding": {"gamma": self.gamma},
            "schedule": None if self.schedule is None else schedule_to_dict(self.schedule),
            "pairing_id": self.pairing_id,
        }


@dataclass
class Manifest:
    name: str
    sequences: list[SequenceEntry] = field(default_factory=list)
    splits: dict[str, list[str]] = field(default_factory=dict)
    provenance: dict | None = None
    format_version: int = FORMAT_VERSION

    def entry(self, entry_id: str) -> SequenceEntry:
        for e in self.sequences:
            if e.id == entry_id:
                return e
        raise ManifestError(f"no sequence entry with id {entry_id!r}")

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "name": self.name,
            "sequences": [e.to_dict() for e in self.sequences],
            "splits": self.splits,
            "provenance": self.provenance,
        }


def entry_for_sequence(
    entry_id: str,
    role: str,
    path: str,
    seq: Sequence,
    pairing_id: str | None = None,
) -> SequenceEntry:
    return SequenceEntry(
        id=entry_id,
        role=role,
        path=path,
        frame_count=len(seq),
        height=seq.height,
        width=seq.width,
        channels=seq.channels,
        frame_period_s=seq.frame_period_s,
        gamma=seq.gamma,
        schedule=seq.schedule,
        pairing_id=pairing_id,
    )


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    text = json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_manifest(path: str | Path) -> Manifest:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"cannot parse manifest {path}: {e}") from e
    try:
        sequences = [
            SequenceEntry(
                id=d["id"],
                role=d["role"],
                path=d["path"],
                frame_count=int(d["frame_count"]),
                height=int(d["height"]),
                width=int(d["width"]),
                channels=int(d["channels"]),
                frame_period_s=float(d["frame_period_s"]),
                gamma=d["encoding"]["gamma"],
                schedule=None if d["schedule"] is None else schedule_from_dict(d["schedule"]),
                pairing_id=d["pairing_id"],
            )
            for d in raw["sequences"]
        ]
        return Manifest(
            name=raw["name"],
            sequences=sequences,
            splits={k: list(v) for k, v in raw["splits"].items()},
            provenance=raw.get("provenance"),
            format_version=int(raw["format_version"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestError(f"manifest {path} is missing or has malformed fields: {e}") from e


def validate_manifest(manifest: Manifest) -> list[str]:
    """All invariant violations, one message each; empty when well-formed."""
    v: list[str] = []
    ids = [e.id for e in manifest.sequences]
    for i in {x for x in ids if ids.count(x) > 1}:
        v.append(f"duplicate sequence id {i!r}")
    for e in manifest.sequences:
        if e.role not in ROLES:
            v.append(f"{e.id}: unknown role {e.role!r}")
        if e.frame_count < 1:
            v.append(f"{e.id}: frame_count must be >= 1")
        if e.height < 1 or e.width < 1 or e.channels not in (1, 3):
            v.append(f"{e.id}: bad dimensions {e.height}x{e.width}x{e.channels}")
        if e.frame_period_s <= 0:
            v.append(f"{e.id}: frame_period_s must be > 0")

    gs_by_pairing: dict[str, list[SequenceEntry]] = {}
    for e in manifest.sequences:
        if e.role == "gs" and e.pairing_id is not None:
            gs_by_pairing.setdefault(e.pairing_id, []).append(e)
    for e in manifest.sequences:
        if e.role != "rsgr":
            continue
        if e.pairing_id is None:
            v.append(f"{e.id}: rsgr entry has no pairing id")
            continue
        partners = gs_by_pairing.get(e.pairing_id, [])
        if len(partners) != 1:
            v.append(
                f"{e.id}: pairing {e.pairing_id!r} has {len(partners)} gs partners, expected 1"
            )
            continue
        g = partners[0]
        if (e.height, e.width, e.channels) != (g.height, g.width, g.channels):
            v.append(f"{e.id}: dimensions differ from gs partner {g.id}")
        if e.frame_count != g.frame_count:
            v.append(f"{e.id}: frame count differs from gs partner {g.id}")
        if e.frame_period_s != g.frame_period_s:
            v.append(f"{e.id}: frame period differs from gs partner {g.id}")

    for name, members in manifest.splits.items():
        if name not in SPLITS:
            v.append(f"split {name!r}: unknown split name")
    seen: dict[str, str] = {}
    for name in SPLITS:
        for m in manifest.splits.get(name, []):
            if m in seen and seen[m] != name:
                v.append(f"pairing {m!r} assigned to both {seen[m]!r} and {name!r} splits")
            seen[m] = name
    return v


def read_entry_sequence(manifest: Manifest, root: str | Path, entry_id: str) -> Sequence:
    """Load a manifest entry's frames with its metadata applied."""
    e = manifest.entry(entry_id)
    return read_sequence(
        Path(root) / e.path, frame_period_s=e.frame_period_s, schedule=e.schedule
    )
