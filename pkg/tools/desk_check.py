#!/usr/bin/env python3
"""
IBVC desk checker
Loads (or builds) models, prints config and hash summary, runs an
encode/decode roundtrip on a synthetic clip and reports bit-exactness.
"""

import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

# Add the repository root to sys.path
sys.path.insert(0, str(Path(__file__).parent.parent))

from arcodec.model import ArtifactCodec, load_codec
from core.config import CodecConfig, GopConfig, VfiConfig
from core.frame import Frame
from pipeline.codec import decode_sequence, encode_sequence
from pipeline.models import CodecModels
from train.corpus import sprite_clip
from vfi.backend import PyramidFlowBackend, load_backend


def main(vfi_path=None, codec_path=None):
    torch.manual_seed(0)
    backend = load_backend(vfi_path) if vfi_path else PyramidFlowBackend(VfiConfig())
    if codec_path:
        codec, meta = load_codec(codec_path)
        lambda_id = int(meta["lambda_id"])
    else:
        codec, lambda_id = ArtifactCodec(CodecConfig.tiny()), 2
    models = CodecModels(backend, codec, lambda_id).eval()

    print("\n=== IBVC Desk Summary ===")
    print(f"Interpolator: {backend.name} v{backend.version} {backend.config_dict()}")
    print(f"Codec: {asdict(codec.config)}")
    print(f"Lambda id: {lambda_id}")
    print(f"Model hash: {models.model_hash().hex()}")

    clip = sprite_clip(64, 5, rng=np.random.default_rng(0))
    frames = [Frame(clip[i], i) for i in range(len(clip))]

    print("\n=== Roundtrip (5 frames, 64x64, gop 5, N 1) ===")
    encoded = encode_sequence(frames, models, GopConfig(gop_size=5, n_bframes=1))
    data = encoded.to_bytes()
    decoded = decode_sequence(data, models)
    for stat in encoded.stats:
        print(f"  frame {stat.frame_index} {stat.coding_type}: {stat.bits} bits, {stat.psnr_db:.2f} dB")
    exact = all(torch.equal(a.pixels, b.pixels) for a, b in zip(encoded.reconstructions, decoded.frames))
    same_prior = encoded.prior_digests == decoded.prior_digests
    print(f"bytes: {len(data)}  bpp: {encoded.bpp:.4f}")
    print(f"bit-exact reconstructions: {exact}  prior buffers match: {same_prior}")
    return 0 if exact and same_prior else 1


if __name__ == "__main__":
    if len(sys.argv) not in (1, 3):
        print("Usage: python3 tools/desk_check.py [<vfi_ckpt> <codec_ckpt>]")
        sys.exit(1)
    sys.exit(main(*sys.argv[1:]))
