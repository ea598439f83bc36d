#!/usr/bin/env python3
"""
Sequence encoder and decoder.

Steps run in GoP coding order. I/P frames go through the reference adapter;
each B frame is interpolated from its two decoded references, then the
artifact codec transmits the masked contextual difference conditioned on the
prior buffer. The decoder repeats the same steps from the chunks alone.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from arcodec.prior_buffer import PriorBuffer
from core.config import GopConfig
from core.errors import ConfigurationError, ContractError, DecodeError
from core.frame import CodingType, Frame
from metrics_eval.quality import psnr
from video_io.padding import crop_to_original, pad_to_multiple, padded_size
from vfi.interpolate import interpolate_middle
from .bitstream import HEADER_BYTES, Bitstream, BitstreamHeader, FrameChunk, iter_chunks
from .gop import CodingStep, plan_gop
from .models import CodecModels

logger = logging.getLogger(__name__)

SIZE_MULTIPLE = 64


@dataclass
class FrameStat:
    frame_index: int
    coding_type: str
    coding_position: int
    hierarchy_level: int
    bits: int
    bpp: float
    psnr_db: float

    FIELDS = ("frame_index", "coding_type", "coding_position", "hierarchy_level", "bits", "bpp", "psnr_db")


@dataclass
class EncodeResult:
    bitstream: Bitstream
    reconstructions: List[Frame]           # display order, cropped to the original size
    stats: List[FrameStat]
    prior_digests: List[str] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        return self.bitstream.to_bytes()

    @property
    def total_bits(self) -> int:
        return self.bitstream.payload_bits

    @property
    def bpp(self) -> float:
        h = self.bitstream.header
        return self.total_bits / float(h.num_frames * h.width * h.height)

    def bits_by_type(self) -> Dict[str, int]:
        split = {t.value: 0 for t in CodingType}
        for s in self.stats:
            split[s.coding_type] += s.bits
        return split


@dataclass
class DecodeResult:
    frames: List[Frame]
    header: BitstreamHeader
    prior_digests: List[str] = field(default_factory=list)


class _PriorTracker:
    """Prior buffer scoped to one GoP: emptied when B frames of a new GoP start."""

    def __init__(self, k: int):
        self.buffer = PriorBuffer(k)

    def enter(self, step: CodingStep) -> PriorBuffer:
        if self.buffer.gop_index != step.gop_index:
            self.buffer.reset()
            self.buffer.gop_index = step.gop_index
        return self.buffer


def _prepare(frames: Sequence[Frame]) -> List[Frame]:
    if not frames:
        raise ContractError("cannot encode an empty sequence")
    size = frames[0].original_size
    out = []
    for i, f in enumerate(frames):
        if f.original_size != size:
            raise ContractError(f"frame {i} has size {f.original_size}, expected {size}")
        f.check_range()
        padded = pad_to_multiple(f, SIZE_MULTIPLE)
        out.append(Frame(padded.pixels, i, None, padded.original_size))
    return out


def _interpolate(step: CodingStep, recon: Dict[int, Frame], models: CodecModels) -> Frame:
    prev, nxt = (recon[r] for r in step.reference_indices)
    return interpolate_middle(prev, nxt, models.backend, step.frame_index)


def _finalize(frame: Frame, step: CodingStep, original_size) -> Frame:
    return Frame(frame.pixels, step.frame_index, step.coding_type, original_size)


def encode_sequence(frames: Sequence[Frame], models: CodecModels,
                    config: Optional[GopConfig] = None) -> EncodeResult:
    config = config or GopConfig()
    config.validate()
    frames = _prepare(frames)
    h0, w0 = frames[0].original_size
    plan = plan_gop(len(frames), config.gop_size, config.n_bframes)
    header = BitstreamHeader(w0, h0, len(frames), config.gop_size, config.n_bframes,
                             models.lambda_id, models.model_hash())
    header.pack()
    interp_only = config.b_mode == "interp_only" or models.codec is None
    logger.info("encoding %d frames %dx%d, gop=%d N=%d, counts %s%s", len(frames), w0, h0,
                config.gop_size, config.n_bframes, plan.counts(), " (interpolation only)" if interp_only else "")

    models.eval()
    prior = _PriorTracker(models.prior_k)
    recon: Dict[int, Frame] = {}
    chunks: List[FrameChunk] = []
    stats: List[FrameStat] = []
    digests: List[str] = []

    for pos, step in enumerate(plan.steps):
        x = frames[step.frame_index]
        if step.coding_type is CodingType.B:
            buffer = prior.enter(step)
            x_bar = _interpolate(step, recon, models)
            if interp_only:
                payload, x_hat = b"", x_bar
            else:
                compressed = models.codec.compress(x, x_bar, buffer)
                payload, x_hat = compressed.payload.data, compressed.x_hat
                buffer.append(compressed.y_hat[0])
            digests.append(buffer.digest())
        else:
            refs = [recon[r] for r in step.reference_indices]
            payload, x_hat = models.adapter.encode(x, refs)
        x_hat = _finalize(x_hat, step, (h0, w0))
        recon[step.frame_index] = x_hat
        chunks.append(FrameChunk(step.frame_index, step.coding_type, payload))

        bits = 8 * len(payload)
        stats.append(FrameStat(step.frame_index, step.coding_type.value, pos, step.hierarchy_level, bits,
                               bits / float(h0 * w0), psnr(crop_to_original(x), crop_to_original(x_hat))))
        logger.debug("frame %d (%s, level %d): %d bits", step.frame_index, step.coding_type.value,
                     step.hierarchy_level, bits)

    bitstream = Bitstream(header, chunks)
    reconstructions = [crop_to_original(recon[i]) for i in range(len(frames))]
    logger.info("encoded %d bits, %.4f bpp", bitstream.payload_bits,
                bitstream.payload_bits / float(len(frames) * h0 * w0))
    return EncodeResult(bitstream, reconstructions, stats, digests)


def decode_sequence(data: bytes, models: CodecModels) -> DecodeResult:
    """Decode a bitstream; failures raise DecodeError naming the frame and carrying earlier frames."""
    header = BitstreamHeader.unpack(data)
    if header.model_hash != models.model_hash():
        raise ConfigurationError("bitstream model hash does not match the loaded checkpoints")
    if header.lambda_id != models.lambda_id:
        raise ConfigurationError(f"bitstream lambda id {header.lambda_id} != loaded codec {models.lambda_id}")
    plan = plan_gop(header.num_frames, header.gop_size, header.n_bframes)
    size = padded_size(header.height, header.width, SIZE_MULTIPLE)
    original = (header.height, header.width)

    models.eval()
    prior = _PriorTracker(models.prior_k)
    recon: Dict[int, Frame] = {}
    digests: List[str] = []
    chunks = iter_chunks(data, HEADER_BYTES)

    def decoded():
        return [crop_to_original(recon[i]) for i in sorted(recon)]

    for step in plan.steps:
        try:
            chunk = next(chunks, None)
            if chunk is None:
                raise DecodeError("missing chunk", offset=len(data))
            if chunk.frame_index != step.frame_index or chunk.coding_type is not step.coding_type:
                raise DecodeError(f"expected {step.coding_type.value} chunk for frame {step.frame_index}, "
                                  f"found {chunk.coding_type.value} chunk for frame {chunk.frame_index}")
            if step.coding_type is CodingType.B:
                buffer = prior.enter(step)
                x_bar = _interpolate(step, recon, models)
                if not chunk.payload:
                    x_hat = x_bar
                elif models.codec is None:
                    raise ConfigurationError(f"frame {step.frame_index} carries a codec payload but no codec is loaded")
                else:
                    x_hat, y_hat = models.codec.decompress(chunk.payload, x_bar, buffer)
                    buffer.append(y_hat[0])
                digests.append(buffer.digest())
            else:
                refs = [recon[r] for r in step.reference_indices]
                x_hat = models.adapter.decode(chunk.payload, refs, size, step.frame_index)
        except DecodeError as e:
            raise e.at_frame(step.frame_index, decoded()) from e
        recon[step.frame_index] = _finalize(x_hat, step, original)

    extra = next(chunks, None)
    if extra is not None:
        raise DecodeError(f"unexpected chunk for frame {extra.frame_index} after the last planned frame",
                          decoded=decoded())
    logger.info("decoded %d frames %dx%d", header.num_frames, header.width, header.height)
    return DecodeResult(decoded(), header, digests)
