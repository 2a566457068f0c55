"""Command-line front end: degrade, enhance, train, repair, evaluate, experiment.

Exit codes: 0 success, 1 usage error, 2 I/O or format error, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import MODES, ClassifierSpec
from .degrade import CompressionSpec, GaussianSpec
from .enhance import PeakingSpec
from .frame_io import (
    FormatError,
    atomic_write,
    pgm_bytes,
    read_pgm,
    read_sequence,
    sequence_to_bytes,
)
from .lsq_train import DEFAULT_MIN_SAMPLES, ClassAccumulators, CoefficientTable, accumulate_plane, solve_table
from .metrics import mse, psnr, ssim
from .pipeline import KINDS, STAGE_LABELS, Embodiment, luma, map_frame
from .repair import repair_plane

log = logging.getLogger("trainedfilter")

STAGES = ("degraded", "enhanced", "repaired")
CSV_HEADER = ("name", "stage", "mse", "psnr", "ssim")
EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class Clip:
    """Frames of one input file: 4:2:2 frames for raw YUV, one plane for PGM."""

    path: Path
    frames: list
    is_pgm: bool

    @property
    def name(self) -> str:
        return self.path.stem

    def to_bytes(self, frames=None) -> bytes:
        frames = self.frames if frames is None else frames
        if self.is_pgm:
            return pgm_bytes(frames[0])
        return sequence_to_bytes(frames)


def _is_pgm(path: Path) -> bool:
    return path.suffix.lower() in (".pgm", ".pnm")


def load_clip(path, width=None, height=None, max_frames=None) -> Clip:
    path = Path(path)
    if _is_pgm(path):
        return Clip(path, [read_pgm(path)], True)
    if width is None or height is None:
        raise UsageError(f"{path}: raw YUV input needs --width and --height")
    frames = read_sequence(path, width, height)
    if max_frames is not None:
        frames = frames[:max_frames]
    return Clip(path, frames, False)


def expand_inputs(paths) -> list[Path]:
    """Files as given; directories expand to their .yuv/.pgm files, sorted."""
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(
                f for f in p.iterdir()
                if f.is_file() and f.suffix.lower() in (".yuv", ".pgm", ".pnm")
            ))
        elif p.exists():
            out.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    if not out:
        raise UsageError("no input files found")
    return out


def embodiment_from_args(args) -> Embodiment:
    kind = args.embodiment
    mode = args.class_mode or ("none" if kind == "upscale" else "std")
    return Embodiment(
        kind,
        CompressionSpec(args.quality),
        GaussianSpec(args.radius, args.sigma),
        PeakingSpec(args.alpha),
        ClassifierSpec(mode, args.class_threshold),
    )


def _fmt(value: float | None, digits: int) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf"
    return f"{value:.{digits}f}"


def quality_row(name: str, stage: str, refs, cands) -> tuple[str, ...]:
    """One CSV row; metrics averaged over frames, empty when geometry differs."""
    refs, cands = [luma(f) for f in refs], [luma(f) for f in cands]
    if len(refs) != len(cands):
        raise FormatError(f"{name}: {len(refs)} reference frames vs {len(cands)} candidate frames")
    if any(r.shape != c.shape for r, c in zip(refs, cands)):
        return (name, stage, "", "", "")
    m = float(np.mean([mse(r, c) for r, c in zip(refs, cands)]))
    s = float(np.mean([ssim(r, c) for r, c in zip(refs, cands)]))
    return (name, stage, _fmt(m, 2), _fmt(psnr(m), 2), _fmt(s, 4))


def csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return buf.getvalue()


def _out_path(args) -> Path:
    if not args.out:
        raise UsageError("--out is required")
    return Path(args.out)


def cmd_degrade(args) -> None:
    emb = embodiment_from_args(args)
    clip = load_clip(args.input, args.width, args.height, args.max_frames)
    atomic_write(_out_path(args), clip.to_bytes([emb.degrade_frame(f) for f in clip.frames]))


def cmd_enhance(args) -> None:
    emb = embodiment_from_args(args)
    clip = load_clip(args.input, args.width, args.height, args.max_frames)
    atomic_write(_out_path(args), clip.to_bytes([emb.enhance_frame(f) for f in clip.frames]))


def train_table(emb: Embodiment, paths, width, height, max_frames, min_samples,
                ridge=0.0) -> CoefficientTable:
    accs = ClassAccumulators(emb.classifier.class_bits)
    for path in paths:
        clip = load_clip(path, width, height, max_frames)
        log.info("training on %s (%d frames)", path, len(clip.frames))
        for frame in clip.frames:
            target = luma(frame)
            accumulate_plane(accs, emb.enhance(emb.degrade(target)), target, emb.classifier)
    return solve_table(accs, min_samples, ridge)


def cmd_train(args) -> None:
    if not args.lut:
        raise UsageError("--lut is required")
    emb = embodiment_from_args(args)
    table = train_table(emb, expand_inputs(args.inputs), args.width, args.height,
                        args.max_frames, args.min_samples, args.ridge)
    table.save(args.lut)


def repair_frames(frames, table, emb: Embodiment) -> list:
    return [map_frame(f, lambda y: repair_plane(y, table, emb.classifier)) for f in frames]


def cmd_repair(args) -> None:
    if not args.lut:
        raise UsageError("--lut is required")
    emb = embodiment_from_args(args)
    table = CoefficientTable.load(args.lut)
    if table.class_bits != emb.classifier.class_bits:
        raise UsageError(
            f"LUT has {table.class_bits}-bit classes; --class-mode "
            f"{emb.classifier.complexity_mode} needs {emb.classifier.class_bits}"
        )
    clip = load_clip(args.input, args.width, args.height, args.max_frames)
    atomic_write(_out_path(args), clip.to_bytes(repair_frames(clip.frames, table, emb)))


def cmd_evaluate(args) -> None:
    ref = load_clip(args.reference, args.width, args.height, args.max_frames)
    cand = load_clip(args.candidate, args.cand_width or args.width,
                     args.cand_height or args.height, args.max_frames)
    text = csv_text([quality_row(args.name or cand.name, args.stage, ref.frames, cand.frames)])
    if args.out:
        atomic_write(Path(args.out), text.encode())
    else:
        sys.stdout.write(text)


def cmd_experiment(args) -> None:
    if not args.corpus or not args.test:
        raise UsageError("experiment needs --corpus and --test inputs")
    emb = embodiment_from_args(args)
    out = _out_path(args)
    out.mkdir(parents=True, exist_ok=True)
    table = train_table(emb, expand_inputs(args.corpus), args.width, args.height,
                        args.max_frames, args.min_samples, args.ridge)
    table.save(out / "lut.tflt")
    rows = []
    for path in expand_inputs(args.test):
        clip = load_clip(path, args.width, args.height, args.max_frames)
        degraded = [emb.degrade_frame(f) for f in clip.frames]
        enhanced = [emb.enhance_frame(f) for f in degraded]
        repaired = repair_frames(enhanced, table, emb)
        for stage, frames in zip(STAGES, (degraded, enhanced, repaired)):
            atomic_write(out / f"{clip.name}.{stage}{clip.path.suffix}", clip.to_bytes(frames))
            rows.append(quality_row(clip.name, stage, clip.frames, frames))
        log.info("tested %s", path)
    text = csv_text(rows)
    atomic_write(out / "results.csv", text.encode())
    sys.stdout.write(text)


def _stage_help() -> str:
    lines = ["CSV stage names map to table headers:"]
    for kind, labels in STAGE_LABELS.items():
        lines.append("  " + kind + ": " + ", ".join(f"{s}={labels[s]}" for s in STAGES))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("geometry and processing")
    g.add_argument("--width", type=int, help="raw YUV frame width")
    g.add_argument("--height", type=int, help="raw YUV frame height")
    g.add_argument("--max-frames", type=int, help="use at most this many frames per input")
    g.add_argument("--embodiment", choices=KINDS, default="deblock")
    g.add_argument("--quality", type=int, default=20, help="compression quality 1-100")
    g.add_argument("--radius", type=int, default=2, help="Gaussian radius in pixels")
    g.add_argument("--sigma", type=float, default=1.0, help="Gaussian standard deviation")
    g.add_argument("--alpha", type=float, default=0.2, help="peaking strength")
    g.add_argument("--class-mode", choices=MODES,
                   help="complexity bit (default: std, or none for upscale)")
    g.add_argument("--class-threshold", type=float, help="complexity-bit threshold")
    g.add_argument("--min-samples", type=int, default=DEFAULT_MIN_SAMPLES,
                   help="classes with fewer samples keep identity weights")
    g.add_argument("--ridge", type=float, default=0.0,
                   help="diagonal regularization added to every class's normal matrix")
    g.add_argument("--lut", help="coefficient table (TFLT) path")
    g.add_argument("--out", help="output path (directory for experiment)")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(
        prog="trainedfilter",
        description="Trained-filter repair of low-quality enhancement modules.",
        epilog=_stage_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("degrade", parents=[common], help="apply the embodiment's degradation")
    p.add_argument("input")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("enhance", parents=[common], help="apply the embodiment's enhancer")
    p.add_argument("input")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("train", parents=[common], help="train a LUT from target images")
    p.add_argument("inputs", nargs="+", help="target files or directories")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("repair", parents=[common], help="filter an enhanced input with a LUT")
    p.add_argument("input")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("evaluate", parents=[common], help="MSE/PSNR/SSIM as one CSV row")
    p.add_argument("reference")
    p.add_argument("candidate")
    p.add_argument("--cand-width", type=int, help="candidate width if it differs")
    p.add_argument("--cand-height", type=int, help="candidate height if it differs")
    p.add_argument("--name", help="CSV name column (default: candidate file stem)")
    p.add_argument("--stage", default="candidate", help="CSV stage column")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", parents=[common], epilog=_stage_help(),
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       help="train on a corpus, then degrade/enhance/repair/evaluate test inputs")
    p.add_argument("--corpus", nargs="+", help="training files or directories")
    p.add_argument("--test", nargs="+", help="test files or directories")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except (FormatError, OSError) as exc:
        print(f"trainedfilter: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ValueError) as exc:
        print(f"trainedfilter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"trainedfilter: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
