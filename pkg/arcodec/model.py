#!/usr/bin/env python3
"""
ArtifactCodec: RGME encoder + hyperprior entropy model + CSCD decoder.

``forward`` is the differentiable training path; ``compress`` and
``decompress`` produce and consume B-frame payloads. The encoder-side
reconstruction is computed by the same ``reconstruct`` call the decoder
uses, from the same integer latent.
"""

import hashlib
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import torch
import torch.nn as nn

from core.checkpoint import load_checkpoint, parameter_digest, save_checkpoint
from core.config import CodecConfig, from_dict, lambda_for_id
from core.errors import ConfigurationError, DecodeError
from core.frame import Frame, check_congruent
from entropy.coding import LatentPayload, compress_latents, decompress_latents
from entropy.gaussian import RateEstimate
from entropy.hyperprior import EntropyModel
from .cscd import CSCDecoder
from .prior_buffer import PriorBuffer
from .quantization import quantize
from .rgme import RGMEncoder
from .weight_map import weight_map_tensor

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = "codec"
CHECKPOINT_VERSION = 1


@dataclass
class CodecOutput:
    x_hat: torch.Tensor
    y_hat: torch.Tensor
    rate: RateEstimate
    weights: torch.Tensor


@dataclass
class CompressedFrame:
    payload: LatentPayload
    x_hat: Frame
    y_hat: torch.Tensor


class ArtifactCodec(nn.Module):
    def __init__(self, config: Optional[CodecConfig] = None):
        super().__init__()
        self.config = config or CodecConfig()
        self.config.validate()
        cfg = self.config
        self.encoder = RGMEncoder(cfg.encoder_channels, cfg.latent_channels)
        self.entropy = EntropyModel(cfg.latent_channels, cfg.entropy)
        self.decoder = CSCDecoder(cfg)

    def parameter_groups(self) -> Dict[str, nn.Module]:
        return {"rgme": self.encoder, "entropy": self.entropy, "cscd": self.decoder}

    def forward(self, x: torch.Tensor, x_bar: torch.Tensor, prior: Optional[torch.Tensor] = None,
                mode: str = "train", noise_y: Optional[torch.Tensor] = None,
                noise_z: Optional[torch.Tensor] = None,
                generator: Optional[torch.Generator] = None) -> CodecOutput:
        weights = weight_map_tensor(x, x_bar, self.config.mask_mode)
        y = self.encoder(x, x_bar, weights)
        ent = self.entropy(y, mode, noise_y=noise_y, noise_z=noise_z, generator=generator)
        x_hat = self.decoder(ent.y_hat, prior, x_bar)
        return CodecOutput(x_hat=x_hat, y_hat=ent.y_hat, rate=ent.rate, weights=weights)

    def latent_shape(self, height: int, width: int):
        return (self.config.latent_channels, height // 16, width // 16)

    @torch.no_grad()
    def reconstruct(self, y_hat: torch.Tensor, prior: PriorBuffer, x_bar: Frame) -> Frame:
        latent = y_hat.to(x_bar.pixels.dtype)
        out = self.decoder(latent, prior.stacked(latent), x_bar.batch())
        return x_bar.with_pixels(out[0])

    @torch.no_grad()
    def compress(self, x: Frame, x_bar: Frame, prior: PriorBuffer) -> CompressedFrame:
        self.eval()
        check_congruent(x.pixels, x_bar.pixels)
        xb, xbb = x.batch(), x_bar.batch()
        weights = weight_map_tensor(xb, xbb, self.config.mask_mode)
        y = self.encoder(xb, xbb, weights)
        # + 0.0 drops signed zeros so encoder and decoder latents match bit for bit
        y_hat = quantize(y, "inference") + 0.0
        z_hat = quantize(self.entropy.h_a(y), "inference") + 0.0
        payload = compress_latents(self.entropy, y_hat, z_hat)
        x_hat = self.reconstruct(y_hat, prior, x_bar)
        return CompressedFrame(payload=payload, x_hat=x_hat, y_hat=y_hat)

    @torch.no_grad()
    def decompress(self, data: bytes, x_bar: Frame, prior: PriorBuffer):
        """Return (x_hat, y_hat) for a payload produced by ``compress``."""
        self.eval()
        shape = self.latent_shape(*x_bar.size)
        y_hat, _, consumed = decompress_latents(self.entropy, data, shape, x_bar.pixels.dtype)
        if consumed != len(data):
            raise DecodeError(f"{len(data) - consumed} unexpected bytes after latent streams", offset=consumed)
        return self.reconstruct(y_hat, prior, x_bar), y_hat

    def digest(self) -> bytes:
        """Parameters plus the entropy settings that change the coded symbols."""
        ent = self.config.entropy
        h = hashlib.sha256(parameter_digest(self.state_dict()))
        h.update(f"support={ent.support}:escape={ent.escape_mode}:context={ent.use_context}".encode())
        return h.digest()


def save_codec(codec: ArtifactCodec, path: Union[str, Path], lambda_id: int,
               metadata: Optional[Dict] = None) -> Path:
    distortion, lam = lambda_for_id(lambda_id)
    meta = {"lambda_id": lambda_id, "lambda": lam, "distortion": distortion}
    meta.update(metadata or {})
    return save_checkpoint(path, CHECKPOINT_KIND, CHECKPOINT_VERSION, asdict(codec.config),
                           codec.state_dict(), meta)


def load_codec(path: Union[str, Path]):
    """Return (codec, metadata)."""
    archive = load_checkpoint(path, CHECKPOINT_KIND, CHECKPOINT_VERSION)
    meta = archive["metadata"]
    if "lambda_id" not in meta:
        raise ConfigurationError(f"{path}: codec checkpoint lacks a lambda id")
    distortion, lam = lambda_for_id(int(meta["lambda_id"]))
    if meta.get("lambda") != lam or meta.get("distortion") != distortion:
        raise ConfigurationError(f"{path}: lambda metadata {meta.get('lambda')} does not match id {meta['lambda_id']}")
    codec = ArtifactCodec(from_dict(CodecConfig, archive["config"]))
    codec.load_state_dict(archive["state_dict"])
    codec.eval()
    logger.info("loaded codec (lambda id %d) from %s", meta["lambda_id"], path)
    return codec, meta
