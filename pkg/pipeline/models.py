#!/usr/bin/env python3
"""
The set of models a bitstream is tied to, and its 32-byte hash.
"""

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from arcodec.model import ArtifactCodec, load_codec
from core.config import lambda_for_id
from core.errors import ConfigurationError
from vfi.backend import InterpolatorBackend, load_backend
from .adapters import IntraStubAdapter, ReferenceCodecAdapter

logger = logging.getLogger(__name__)


@dataclass
class CodecModels:
    backend: InterpolatorBackend
    codec: Optional[ArtifactCodec]
    lambda_id: int
    adapter: ReferenceCodecAdapter = field(default_factory=IntraStubAdapter)

    def __post_init__(self):
        lambda_for_id(self.lambda_id)

    def model_hash(self) -> bytes:
        h = hashlib.sha256()
        h.update(self.backend.digest())
        h.update(self.codec.digest() if self.codec is not None else b"")
        h.update(self.adapter.digest())
        return h.digest()

    @property
    def prior_k(self) -> int:
        return self.codec.config.prior_k if self.codec is not None else 0

    def eval(self) -> "CodecModels":
        self.backend.eval()
        if self.codec is not None:
            self.codec.eval()
        return self


def load_models(ckpt_vfi: Union[str, Path], ckpt_codec: Optional[Union[str, Path]],
                adapter: Optional[ReferenceCodecAdapter] = None,
                lambda_id: Optional[int] = None) -> CodecModels:
    """Load the interpolator and (optionally) the codec; lambda id comes from the codec checkpoint."""
    backend = load_backend(ckpt_vfi)
    codec = None
    if ckpt_codec is not None:
        codec, meta = load_codec(ckpt_codec)
        ckpt_id = int(meta["lambda_id"])
        if lambda_id is not None and lambda_id != ckpt_id:
            raise ConfigurationError(
                f"--lambda-id {lambda_id} does not match codec checkpoint {ckpt_codec} (lambda id {ckpt_id})")
        lambda_id = ckpt_id
    if lambda_id is None:
        lambda_id = 0
    return CodecModels(backend, codec, lambda_id, adapter or IntraStubAdapter()).eval()
