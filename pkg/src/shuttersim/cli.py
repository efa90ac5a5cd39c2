"""Command-line entry point.

Subcommands: ``gen-scenes``, ``synth``, ``pair-synth``, ``compensate``,
``ee``, ``eval``. Exit codes: 0 success, 1 usage error, 2 data/format error.
Runs are reproducible from flags alone: no clocks, no environment lookups
(the kernel-backend variable changes only how numbers are computed, not
which), and every flag value is echoed into output manifests.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import _kernels, dataio
from .compensate import compensate
from .errors import ManifestError, ShutterSimError
from .exposure import ExposureSchedule, ScanDirection, ShutterMode, ee_channel
from .frames import Frame, Sequence, from_frames
from .metrics import region_eval
from .scenes import SceneKind, SceneSpec, gen_scene
from .sensor import synth_pair, synth_sequence

_KINDS = {k.value: k for k in SceneKind}
_SCANS = {s.value: s for s in ScanDirection}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_floats(n: int):
    def parse(text: str) -> tuple[float, ...]:
        parts = text.split(",")
        if len(parts) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers")
        return tuple(float(p) for p in parts)

    return parse


def _provenance(args: argparse.Namespace) -> dict:
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    return {"command": args.command, "flags": flags}


def _apply_threads(args: argparse.Namespace) -> None:
    n = getattr(args, "threads", 0)
    _kernels.set_threads(n if n > 0 else os.cpu_count() or 1)


def _load_source(args: argparse.Namespace) -> tuple[dataio.Manifest, Path, Sequence]:
    path = Path(args.source)
    manifest_path = path / dataio.MANIFEST_NAME if path.is_dir() else path
    manifest = dataio.load_manifest(manifest_path)
    root = manifest_path.parent
    if args.source_id is not None:
        entry_id = args.source_id
    else:
        sources = [e.id for e in manifest.sequences if e.role == "source"]
        if len(sources) != 1:
            raise ManifestError(
                f"{manifest_path} has {len(sources)} source entries; pass --source-id"
            )
        entry_id = sources[0]
    return manifest, root, dataio.read_entry_sequence(manifest, root, entry_id)


def _cmd_gen_scenes(args: argparse.Namespace) -> int:
    _apply_threads(args)
    spec = SceneSpec(
        kind=_KINDS[args.kind],
        height=args.height,
        width=args.width,
        subframe_dt_s=args.subframe_dt,
        count=args.count,
        velocity=args.velocity,
        affine_rate=(tuple(args.affine_rate[:3]), tuple(args.affine_rate[3:])),
        seed=args.seed,
        channels=args.channels,
        value=args.value,
        period_px=args.period,
        cell_px=args.cell,
        amplitude=args.amplitude,
        dtype=args.dtype,
    )
    seq = gen_scene(spec)
    out = Path(args.out)
    dataio.write_sequence(seq, out / "source")
    manifest = dataio.Manifest(
        name="scenes",
        sequences=[dataio.entry_for_sequence("source", "source", "source", seq)],
        provenance=_provenance(args),
    )
    dataio.save_manifest(manifest, out / dataio.MANIFEST_NAME)
    print(f"wrote {len(seq)} subframes to {out}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    _apply_threads(args)
    _, _, source = _load_source(args)
    schedule = ExposureSchedule(
        mode=ShutterMode(args.mode),
        rows=source.height,
        base_exposure_s=args.e0,
        readout_ratio=args.xi,
        scan_direction=_SCANS[args.scan],
    )
    seq = synth_sequence(
        source, schedule, args.frame_period, args.count, args.gamma, args.trigger0
    )
    out = Path(args.out)
    dataio.write_sequence(seq, out / args.mode)
    manifest = dataio.Manifest(
        name="synth",
        sequences=[dataio.entry_for_sequence(args.mode, args.mode, args.mode, seq)],
        provenance=_provenance(args),
    )
    dataio.save_manifest(manifest, out / dataio.MANIFEST_NAME)
    print(f"wrote {len(seq)} {args.mode} frames to {out}")
    return 0


def _cmd_pair_synth(args: argparse.Namespace) -> int:
    _apply_threads(args)
    _, _, source = _load_source(args)
    gs_e0 = args.e0 if args.gs_e0 is None else args.gs_e0
    sched_d = ExposureSchedule(
        mode=ShutterMode(args.mode),
        rows=source.height,
        base_exposure_s=args.e0,
        readout_ratio=args.xi,
        scan_direction=_SCANS[args.scan],
    )
    sched_g = ExposureSchedule(
        mode=ShutterMode.GS, rows=source.height, base_exposure_s=gs_e0
    )
    seq_d, seq_g = synth_pair(
        source, sched_d, sched_g, args.frame_period, args.count, args.gamma, args.trigger0
    )
    out = Path(args.out)
    dataio.write_sequence(seq_d, out / args.mode)
    dataio.write_sequence(seq_g, out / "gs")
    pairing = "pair-000000"
    manifest = dataio.Manifest(
        name="pair",
        sequences=[
            dataio.entry_for_sequence(args.mode, args.mode, args.mode, seq_d, pairing),
            dataio.entry_for_sequence("gs", "gs", "gs", seq_g, pairing),
        ],
        splits={args.split: [pairing]},
        provenance=_provenance(args),
    )
    dataio.save_manifest(manifest, out / dataio.MANIFEST_NAME)
    print(f"wrote paired {args.mode}/gs sequences ({len(seq_d)} frames) to {out}")
    return 0


def _cmd_compensate(args: argparse.Namespace) -> int:
    _apply_threads(args)
    manifest = dataio.load_manifest(args.manifest)
    root = Path(args.manifest).parent
    entry = manifest.entry(getattr(args, "in"))
    if entry.schedule is None:
        raise ManifestError(f"entry {entry.id!r} carries no exposure schedule")
    seq = dataio.read_entry_sequence(manifest, root, entry.id)

    comp_frames = []
    mask_frames = []
    for i in range(len(seq)):
        fixed, mask = compensate(seq.frame(i), entry.schedule, gamma=seq.gamma)
        comp_frames.append(fixed)
        mask_frames.append(Frame(mask.astype(np.float32)[:, :, None]))
    comp = from_frames(comp_frames, seq.frame_period_s, schedule=entry.schedule)
    masks = from_frames(mask_frames, seq.frame_period_s)

    out = Path(args.out)
    comp_id = f"{entry.id}_comp"
    dataio.write_sequence(comp, out / comp_id)
    dataio.write_sequence(masks, out / f"{entry.id}_mask")
    out_manifest = dataio.Manifest(
        name="compensate",
        sequences=[
            dataio.entry_for_sequence(comp_id, "prediction", comp_id, comp, entry.pairing_id)
        ],
        provenance=_provenance(args),
    )
    dataio.save_manifest(out_manifest, out / dataio.MANIFEST_NAME)
    print(f"wrote compensated frames and saturation masks to {out}")
    return 0


def _cmd_ee(args: argparse.Namespace) -> int:
    manifest = dataio.load_manifest(args.manifest)
    entries = (
        [manifest.entry(args.id)]
        if args.id is not None
        else [e for e in manifest.sequences if e.schedule is not None]
    )
    if not entries:
        raise ManifestError("no entries with a schedule to encode")
    out = Path(args.out)
    for e in entries:
        if e.schedule is None:
            raise ManifestError(f"entry {e.id!r} carries no exposure schedule")
        channel = ee_channel(e.schedule, e.height, e.width)
        directory = out / f"{e.id}_ee"
        directory.mkdir(parents=True, exist_ok=True)
        dataio.write_frame(Frame(channel), directory / dataio.frame_filename(0))
        print(f"wrote exposure encoding for {e.id!r} to {directory}")
    return 0


def _schedule_near(directory: Path):
    """Schedule from a sibling manifest whose entry path matches, if any."""
    manifest_path = directory.parent / dataio.MANIFEST_NAME
    if not manifest_path.is_file():
        return None
    try:
        manifest = dataio.load_manifest(manifest_path)
    except ManifestError:
        return None
    for e in manifest.sequences:
        if e.path == directory.name:
            return e.schedule
    return None


def _cmd_eval(args: argparse.Namespace) -> int:
    _apply_threads(args)
    pred_dir = Path(args.pred)
    gt_dir = Path(args.gt)
    pred = dataio.read_sequence(pred_dir, schedule=_schedule_near(pred_dir))
    gt = dataio.read_sequence(gt_dir, schedule=_schedule_near(gt_dir))
    report = region_eval(pred, gt, args.band_height)
    sys.stdout.write(report.to_text())
    if args.report is not None:
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shuttersim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_threads(p):
        p.add_argument("--threads", type=int, default=0, help="cap worker threads (0 = all cores)")

    p = sub.add_parser("gen-scenes", help="generate a high-FPS source scene")
    p.add_argument("--kind", choices=sorted(_KINDS), required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--subframe-dt", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--velocity", type=_csv_floats(2), default=(0.0, 0.0), metavar="VX,VY")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--channels", type=int, choices=(1, 3), default=1)
    p.add_argument("--value", type=float, default=0.5)
    p.add_argument("--period", type=_csv_floats(2), default=(64.0, 64.0), metavar="PX,PY")
    p.add_argument("--cell", type=float, default=8.0)
    p.add_argument("--amplitude", type=float, default=0.9)
    p.add_argument("--affine-rate", type=_csv_floats(6), default=(0.0,) * 6, metavar="6 CSV")
    p.add_argument("--dtype", choices=("float32", "float64"), default="float64")
    p.add_argument("--out", required=True)
    add_threads(p)
    p.set_defaults(func=_cmd_gen_scenes)

    p = sub.add_parser("synth", help="synthesize one exposure mode from a source")
    p.add_argument("--source", required=True, help="source dataset dir or manifest path")
    p.add_argument("--source-id", default=None)
    p.add_argument("--mode", choices=("gs", "rs", "rsgr"), required=True)
    p.add_argument("--e0", type=float, required=True, help="first-scanline exposure [s]")
    p.add_argument("--xi", type=float, default=0.0, help="readout span / e0")
    p.add_argument("--scan", choices=("top", "bottom"), default="top")
    p.add_argument("--frame-period", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--trigger0", type=float, default=0.0)
    p.add_argument("--out", required=True)
    add_threads(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("pair-synth", help="synthesize a distorted/GS pair plus manifest")
    p.add_argument("--source", required=True)
    p.add_argument("--source-id", default=None)
    p.add_argument("--mode", choices=("rs", "rsgr"), default="rsgr")
    p.add_argument("--e0", type=float, required=True)
    p.add_argument("--gs-e0", type=float, default=None, help="defaults to --e0")
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--scan", choices=("top", "bottom"), default="top")
    p.add_argument("--frame-period", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--trigger0", type=float, default=0.0)
    p.add_argument("--split", choices=dataio.SPLITS, default="train")
    p.add_argument("--out", required=True)
    add_threads(p)
    p.set_defaults(func=_cmd_pair_synth)

    p = sub.add_parser("compensate", help="row-gain photometric correction")
    p.add_argument("--in", required=True, metavar="ENTRY_ID")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    add_threads(p)
    p.set_defaults(func=_cmd_compensate)

    p = sub.add_parser("ee", help="export exposure-encoding channels")
    p.add_argument("--manifest", required=True)
    p.add_argument("--id", default=None, help="single entry id (default: all with schedules)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ee)

    p = sub.add_parser("eval", help="PSNR/SSIM report over full frame and U/M/L bands")
    p.add_argument("--pred", required=True, help="prediction sequence directory")
    p.add_argument("--gt", required=True, help="ground-truth sequence directory")
    p.add_argument("--band-height", type=int, default=None)
    p.add_argument("--report", default=None, help="also write a JSON report here")
    add_threads(p)
    p.set_defaults(func=_cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except ShutterSimError as e:
        print(f"shuttersim: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"shuttersim: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
