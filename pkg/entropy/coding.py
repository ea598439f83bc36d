#!/usr/bin/env python3
"""
Bitstream coding of (hyper, main) latents with an EntropyModel.

Payload = [hyper stream][main stream], each length-prefixed. Main symbols are
s = y_hat - round(mu) coded with per-element Gaussian tables; with the context
model they are coded position by position (all channels of one position
before the next) so the decoder can rebuild the causal context.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import torch

from arcodec.quantization import quantize
from core.errors import ContractError, DecodeError
from .hyperprior import CONTEXT_KERNEL, EntropyModel, HyperLatent, model_likelihoods
from .range_coder import RangeDecoder, RangeEncoder, encode_varint, range_encode, split_stream
from .symbol_model import GaussianSymbolModel, split_means

logger = logging.getLogger(__name__)


@dataclass
class LatentPayload:
    data: bytes
    hyper_bits: int
    main_bits: int

    @property
    def bits(self) -> int:
        return 8 * len(self.data)


def _hyper_model(model: EntropyModel, z_shape):
    c, h, w = z_shape
    tables = model.hyper_prior.symbol_model(model.config.support, model.config.escape_mode)
    index = np.repeat(np.arange(c, dtype=np.int64), h * w)
    return tables.with_index(index)


def _gaussian_model(model: EntropyModel, means: torch.Tensor, scales: torch.Tensor):
    centre, delta = split_means(means.detach().double().cpu().numpy().reshape(-1))
    sigma = scales.detach().double().cpu().numpy().reshape(-1)
    return centre, GaussianSymbolModel(delta, sigma, model.config.support, model.config.escape_mode)


def _to_int(t: torch.Tensor) -> np.ndarray:
    return t.detach().cpu().numpy().reshape(-1).astype(np.int64)


def hyper_shape(model: EntropyModel, latent_shape: Tuple[int, int, int]) -> Tuple[int, int, int]:
    c, h, w = latent_shape
    d = model.downsample
    if h % d or w % d:
        raise ContractError(f"latent {h}x{w} not divisible by {d}")
    return (model.config.hyper_channels, h // d, w // d)


@torch.no_grad()
def compress_latents(model: EntropyModel, y_hat: torch.Tensor, z_hat: torch.Tensor) -> LatentPayload:
    """Code integer latents y_hat [1, C, h, w] and z_hat [1, C_h, h/4, w/4]."""
    if y_hat.shape[0] != 1 or z_hat.shape[0] != 1:
        raise ContractError("latent coding works on single frames (batch of 1)")
    hyper = range_encode(_to_int(z_hat), _hyper_model(model, tuple(z_hat.shape[1:])))
    hyper_params = model.hyper_params(z_hat)

    if not model.config.use_context:
        means, scales = model.gaussian_params(hyper_params)
        centre, gm = _gaussian_model(model, means, scales)
        main = range_encode(_to_int(y_hat) - centre, gm)
    else:
        enc = RangeEncoder()
        _, c, h, w = y_hat.shape
        pad = CONTEXT_KERNEL // 2
        y_padded = torch.zeros(1, c, h + 2 * pad, w + 2 * pad, dtype=y_hat.dtype)
        for i in range(h):
            for j in range(w):
                means, scales = model.position_params(hyper_params, y_padded, i, j)
                centre, gm = _gaussian_model(model, means, scales)
                enc.encode_symbols(_to_int(y_hat[:, :, i, j]) - centre, gm)
                y_padded[:, :, i + pad, j + pad] = y_hat[:, :, i, j]
        body = enc.finish()
        main = encode_varint(len(body)) + body

    hyper_body, _ = split_stream(hyper)
    main_body, _ = split_stream(main)
    return LatentPayload(data=hyper + main, hyper_bits=8 * len(hyper_body), main_bits=8 * len(main_body))


@torch.no_grad()
def decompress_latents(model: EntropyModel, data: bytes, latent_shape: Tuple[int, int, int],
                       dtype: torch.dtype = torch.float32) -> Tuple[torch.Tensor, torch.Tensor, int]:
    """Inverse of compress_latents; returns (y_hat, z_hat, bytes consumed)."""
    c, h, w = latent_shape
    zc, zh, zw = hyper_shape(model, latent_shape)
    hyper_body, pos = split_stream(data, 0)
    dec = RangeDecoder(hyper_body)
    z_int = dec.decode_symbols(_hyper_model(model, (zc, zh, zw)))
    dec.finish()
    z_hat = torch.from_numpy(z_int.reshape(1, zc, zh, zw)).to(dtype)
    hyper_params = model.hyper_params(z_hat)

    main_start = pos
    main_body, pos = split_stream(data, pos)
    dec = RangeDecoder(main_body)
    try:
        if not model.config.use_context:
            means, scales = model.gaussian_params(hyper_params)
            centre, gm = _gaussian_model(model, means, scales)
            y_int = dec.decode_symbols(gm) + centre
            y_hat = torch.from_numpy(y_int.reshape(1, c, h, w)).to(dtype)
        else:
            pad = CONTEXT_KERNEL // 2
            y_padded = torch.zeros(1, c, h + 2 * pad, w + 2 * pad, dtype=dtype)
            for i in range(h):
                for j in range(w):
                    means, scales = model.position_params(hyper_params, y_padded, i, j)
                    centre, gm = _gaussian_model(model, means, scales)
                    vals = dec.decode_symbols(gm) + centre
                    y_padded[0, :, i + pad, j + pad] = torch.from_numpy(vals).to(dtype)
            y_hat = y_padded[:, :, pad:pad + h, pad:pad + w].contiguous()
        dec.finish()
    except DecodeError as e:
        raise DecodeError(e.reason, offset=main_start + (e.offset or 0)) from e
    return y_hat, z_hat, pos


@torch.no_grad()
def estimate_vs_actual(model: EntropyModel, y: torch.Tensor) -> Tuple[float, int]:
    """Model-estimated bits vs range-coded bits for a real latent y [1, C, h, w]."""
    model.eval()
    z_hat = quantize(model.h_a(y), "inference")
    y_hat = quantize(y, "inference")
    rate, _, _ = model_likelihoods(y_hat, HyperLatent(z_hat), model, "inference")
    z_bits = _hyper_bits(model, z_hat)
    estimated = float(rate.bits) + z_bits
    payload = compress_latents(model, y_hat, z_hat)
    actual = payload.hyper_bits + payload.main_bits
    logger.debug("estimated %.1f bits, coded %d bits", estimated, actual)
    return estimated, actual


def _hyper_bits(model: EntropyModel, z_hat: torch.Tensor) -> float:
    return float((-torch.log2(model.hyper_prior.likelihood(z_hat))).sum())
