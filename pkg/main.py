#!/usr/bin/env python3
"""
IBVC command-line entry point.

    python3 main.py encode  --input seq.yuv --width 1280 --height 720 --frames 96 --output seq.ibvc
    python3 main.py decode  --input seq.ibvc --output decoded/
    python3 main.py interp  --input a.png b.png --output mid.png
    python3 main.py train   --input corpus/ --lambda-id 2 --steps 10 --seed 7
    python3 main.py eval    --input seq.yuv --width 1280 --height 720 --frames 96 --output report/
    python3 main.py bdrate  anchor.csv test.csv
    python3 main.py report  --input curves.csv --output report/

Checkpoints default to $IBVC_CACHE_DIR (``~/.cache/ibvc``): ``vfi.pt`` and
``codecs/codec_lambda{id}.pt``.
"""

import argparse
import csv
import hashlib
import logging
import sys
from pathlib import Path
from typing import List, Optional

from core.config import CodecConfig, GopConfig, IntraConfig, TrainConfig, VfiConfig, cache_dir
from core.errors import ConfigurationError, IBVCError, MalformedInputError
from core.seeding import seed_everything

logger = logging.getLogger("ibvc")


def default_vfi_path() -> Path:
    return cache_dir() / "vfi.pt"


def default_codec_path(lambda_id: int) -> Path:
    return cache_dir() / "codecs" / f"codec_lambda{lambda_id}.pt"


# ---------------------------------------------------------------- helpers

def _read_input(args):
    from video_io.sequence import PixelFormat, SequenceSpec, list_images, load_image, read_sequence

    fmt = PixelFormat.parse(args.pixel_format)
    if fmt is PixelFormat.RGB_PNG_DIR:
        images = list_images(Path(args.input))
        if not images:
            raise MalformedInputError(f"{args.input}: no images found")
        first = load_image(images[0])
        spec = SequenceSpec(args.width or first.width, args.height or first.height,
                            args.frames or len(images), fmt)
    else:
        if not (args.width and args.height and args.frames):
            raise ConfigurationError("--width, --height and --frames are required for raw YUV input")
        spec = SequenceSpec(args.width, args.height, args.frames, fmt)
    return read_sequence(args.input, spec)


def _models(args, ckpt_codec: Optional[str] = None, lambda_id: Optional[int] = None):
    from pipeline.adapters import IntraStubAdapter
    from pipeline.models import load_models

    vfi = args.ckpt_vfi or default_vfi_path()
    if ckpt_codec is None and getattr(args, "b_mode", "codec") == "codec":
        lid = args.lambda_id if lambda_id is None else lambda_id
        ckpt_codec = args.ckpt_codec or default_codec_path(lid if lid is not None else 2)
    adapter = IntraStubAdapter(IntraConfig(quality=getattr(args, "intra_quality", IntraConfig().quality)))
    return load_models(vfi, ckpt_codec, adapter, args.lambda_id if lambda_id is None else lambda_id)


def _gop(args) -> GopConfig:
    cfg = GopConfig(gop_size=args.gop, n_bframes=args.n_bframes, b_mode=getattr(args, "b_mode", "codec"))
    cfg.validate()
    return cfg


def _write_stats(stats, path: Path) -> None:
    from pipeline.codec import FrameStat

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(FrameStat.FIELDS)
        for s in stats:
            writer.writerow([getattr(s, name) for name in FrameStat.FIELDS])


# ---------------------------------------------------------------- commands

def cmd_encode(args) -> int:
    from pipeline.codec import encode_sequence

    frames = _read_input(args)
    models = _models(args)
    result = encode_sequence(frames, models, _gop(args))
    out = result.bitstream.write(args.output)
    stats_path = Path(args.stats) if args.stats else out.with_suffix(".csv")
    _write_stats(result.stats, stats_path)

    counts = {t: sum(1 for s in result.stats if s.coding_type == t) for t in "IPB"}
    split = result.bits_by_type()
    print(f"frames: {len(frames)}  I:{counts['I']} P:{counts['P']} B:{counts['B']}")
    print(f"bits: total {result.total_bits}  I {split['I']}  P {split['P']}  B {split['B']}")
    print(f"bpp: {result.bpp:.6f}")
    print(f"sha256: {hashlib.sha256(out.read_bytes()).hexdigest()}")
    print(f"bitstream: {out}  stats: {stats_path}")
    return 0


def cmd_decode(args) -> int:
    from pipeline.bitstream import BitstreamHeader
    from pipeline.codec import decode_sequence
    from video_io.sequence import write_sequence

    data = Path(args.input).read_bytes()
    header = BitstreamHeader.unpack(data)
    lambda_id = header.lambda_id if args.lambda_id is None else args.lambda_id
    # interpolation-only streams are hashed without a codec
    args.b_mode = "interp_only"
    models = _models(args, lambda_id=lambda_id)
    if models.model_hash() != header.model_hash:
        args.b_mode = "codec"
        models = _models(args, lambda_id=lambda_id)
    else:
        logger.info("%s is an interpolation-only stream, no codec loaded", args.input)
    result = decode_sequence(data, models)
    write_sequence(result.frames, args.output, args.pixel_format)
    print(f"decoded {len(result.frames)} frames ({header.width}x{header.height}) to {args.output}")
    return 0


def cmd_interp(args) -> int:
    from video_io.padding import crop_to_original, pad_to_multiple
    from video_io.sequence import load_image, save_image
    from vfi.backend import load_backend
    from vfi.interpolate import interpolate_middle

    backend = load_backend(args.ckpt_vfi or default_vfi_path())
    prev, nxt = (pad_to_multiple(load_image(p, i * 2), backend.size_multiple) for i, p in enumerate(args.input))
    mid = interpolate_middle(prev, nxt, backend)
    save_image(crop_to_original(mid), args.output)
    print(f"interpolated frame written to {args.output}")
    return 0


def cmd_train(args) -> int:
    from arcodec.model import ArtifactCodec, save_codec
    from train.corpus import ClipDataset, SyntheticClipDataset
    from train.ladder import build_model_ladder
    from train.trainer import build_state, fit
    from train.vfi_pretrain import pretrain_backend
    from vfi.backend import build_backend, load_backend, save_backend

    config = TrainConfig(lambda_id=args.lambda_id if args.lambda_id is not None else 2,
                         batch=args.batch, crop=args.crop, max_steps=args.steps, seed=args.seed,
                         epochs_main=args.epochs, epochs_finetune=args.epochs_finetune,
                         freeze_vfi=not args.joint_vfi)
    config.validate()
    dataset = (ClipDataset(args.input, crop=config.crop, seed=config.seed) if args.input
               else SyntheticClipDataset(args.synthetic_clips, size=config.crop, seed=config.seed))

    vfi_path = Path(args.ckpt_vfi) if args.ckpt_vfi else default_vfi_path()
    if vfi_path.is_file():
        backend = load_backend(vfi_path)
    else:
        backend = build_backend("pyramid", VfiConfig())
        losses = pretrain_backend(backend, dataset, epochs=args.epochs, batch=config.batch,
                                  seed=config.seed, max_steps=args.vfi_steps)
        save_backend(backend, vfi_path, {"steps": len(losses)})
        print(f"pretrained interpolator ({len(losses)} steps) -> {vfi_path}")

    if args.ladder:
        paths = build_model_ladder(backend, dataset, config, args.ladder, out_dir=args.output)
        for lid, path in paths.items():
            print(f"lambda id {lid}: {path}")
        return 0

    seed_everything(config.seed)
    codec = ArtifactCodec(CodecConfig())
    state = build_state(codec, backend, config)
    out = Path(args.output) if args.output else default_codec_path(config.lambda_id)
    history = fit(state, dataset, config, log_path=out.with_suffix(".csv"))
    save_codec(codec, out, config.lambda_id, {"steps": state.step})
    final = history[-1].loss if history else float("nan")
    print(f"steps: {state.step}  final loss: {final!r}")
    print(f"codec checkpoint: {out}")
    return 0


def cmd_eval(args) -> int:
    from metrics_eval.curves import INTERP_ONLY_LABEL, RDCurve
    from metrics_eval.evaluate import evaluate_ladder
    from metrics_eval.report import emit_report

    frames = _read_input(args)
    codec_paths: List[str] = args.ckpt_codec or [str(p) for p in sorted((cache_dir() / "codecs").glob("codec_lambda*.pt"))]
    if not codec_paths:
        raise ConfigurationError(f"no codec checkpoints given and none found under {cache_dir() / 'codecs'}")
    args.b_mode = "codec"
    ladder = [_models(args, ckpt_codec=p, lambda_id=None) for p in codec_paths]
    result = evaluate_ladder(frames, ladder, _gop(args), args.accounting, args.label)
    baseline = RDCurve(f"{INTERP_ONLY_LABEL} ({args.accounting})", result.baseline)
    paths = emit_report([result.curve, baseline], args.output, args.dataset)
    for p, b, gain in zip(result.curve.points, result.baseline, result.psnr_gains()):
        print(f"bpp {p.bpp:.5f}  psnr {p.psnr_db:.3f} dB  ms-ssim {p.ms_ssim:.5f}  "
              f"(interp-only {b.psnr_db:.3f} dB, gain {gain:+.3f} dB)")
    print(f"curves: {paths['csv']}")
    return 0


def cmd_bdrate(args) -> int:
    from metrics_eval.report import bd_table, format_bd_table

    print(format_bd_table(bd_table(args.anchor, args.tests, args.metric, args.fit)))
    return 0


def cmd_report(args) -> int:
    from metrics_eval.curves import read_curves
    from metrics_eval.report import emit_report

    curves = [c for path in args.input for c in read_curves(path)]
    paths = emit_report(curves, args.output, args.dataset)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


# ---------------------------------------------------------------- parser

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for every random generator")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def _add_models(p: argparse.ArgumentParser, multi_codec: bool = False) -> None:
    p.add_argument("--ckpt-vfi", help="interpolator checkpoint (default: $IBVC_CACHE_DIR/vfi.pt)")
    if multi_codec:
        p.add_argument("--ckpt-codec", nargs="+", help="codec checkpoints, one per ladder point")
    else:
        p.add_argument("--ckpt-codec", help="codec checkpoint (default: cache path for --lambda-id)")
    p.add_argument("--lambda-id", type=int, default=None, help="lambda ladder index")
    p.add_argument("--intra-quality", type=int, default=IntraConfig().quality,
                   help=f"I/P quantization step, one of {IntraConfig().qualities}")


def _add_video(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="raw YUV file or PNG directory")
    p.add_argument("--pixel-format", default="yuv420p8", help="yuv420p8 | yuv444p8 | rgb_png_dir")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--frames", type=int)


def _add_gop(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gop", type=int, default=32, help="GoP size")
    p.add_argument("--n-bframes", type=int, default=1, help="consecutive B frames (1, 3, 7, ...)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ibvc", description="Interpolation-driven B-frame video codec")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a sequence to a bitstream")
    _add_video(p)
    _add_models(p)
    _add_gop(p)
    p.add_argument("--output", required=True, help="bitstream path")
    p.add_argument("--stats", help="per-frame stats CSV (default: bitstream path with .csv)")
    p.add_argument("--b-mode", default="codec", choices=["codec", "interp_only"])
    _add_common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a bitstream to frames")
    p.add_argument("--input", required=True, help="bitstream path")
    p.add_argument("--output", required=True, help="output PNG directory or YUV file")
    p.add_argument("--pixel-format", default="rgb_png_dir", help="rgb_png_dir | yuv420p8 | yuv444p8")
    _add_models(p)
    _add_common(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("interp", help="interpolate the middle frame of two images")
    p.add_argument("--input", nargs=2, required=True, metavar=("PREV", "NEXT"))
    p.add_argument("--output", required=True, help="output image path")
    p.add_argument("--ckpt-vfi", help="interpolator checkpoint")
    _add_common(p)
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("train", help="train the interpolator and codec on a desk corpus")
    p.add_argument("--input", help="corpus directory with clips/<name>/%%02d.png (default: synthetic)")
    p.add_argument("--output", help="codec checkpoint path, or ladder directory with --ladder")
    p.add_argument("--ckpt-vfi", help="pretrained interpolator; trained and saved here when missing")
    p.add_argument("--lambda-id", type=int, default=None)
    p.add_argument("--ladder", choices=["mse", "ms-ssim"], help="train every lambda of a ladder")
    p.add_argument("--steps", type=int, default=0, help="stop after this many steps (0: full schedule)")
    p.add_argument("--vfi-steps", type=int, default=0, help="cap on interpolator pretraining steps")
    p.add_argument("--epochs", type=int, default=TrainConfig().epochs_main)
    p.add_argument("--epochs-finetune", type=int, default=TrainConfig().epochs_finetune)
    p.add_argument("--batch", type=int, default=TrainConfig().batch)
    p.add_argument("--crop", type=int, default=TrainConfig().crop)
    p.add_argument("--synthetic-clips", type=int, default=32)
    p.add_argument("--joint-vfi", action="store_true", help="fine-tune the interpolator jointly")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="R-D evaluation over a lambda ladder")
    _add_video(p)
    _add_models(p, multi_codec=True)
    _add_gop(p)
    p.add_argument("--output", required=True, help="report directory")
    p.add_argument("--accounting", default="sequence", choices=["sequence", "b-only"])
    p.add_argument("--dataset", default="desk")
    p.add_argument("--label", default="ibvc")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bdrate", help="BD-rate table from curve CSVs")
    p.add_argument("anchor", help="anchor curve CSV")
    p.add_argument("tests", nargs="+", help="test curve CSVs (columns of the table)")
    p.add_argument("--metric", default="psnr", choices=["psnr", "ms-ssim"])
    p.add_argument("--fit", default="cubic", choices=["cubic", "pchip"])
    _add_common(p)
    p.set_defaults(func=cmd_bdrate)

    p = sub.add_parser("report", help="CSV and R-D plots from curve CSVs")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dataset", default="desk")
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    seed_everything(args.seed)
    try:
        return args.func(args)
    except (IBVCError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        logger.debug("unexpected failure", exc_info=True)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
