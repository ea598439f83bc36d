#!/usr/bin/env python3
"""
Pluggable I/P reference coders.

The sequence codec only relies on this interface; any external intra/inter
coder can be wrapped as long as its decoder reproduces the encoder-side
reconstruction bit for bit.
"""

import hashlib
from abc import ABC, abstractmethod
from typing import Sequence, Tuple

from core.config import IntraConfig
from core.frame import Frame
from .intra_stub import IntraStub


class ReferenceCodecAdapter(ABC):
    name: str = "adapter"

    @abstractmethod
    def encode(self, frame: Frame, refs: Sequence[Frame]) -> Tuple[bytes, Frame]:
        """Return (payload, reconstruction); refs are decoded frames (empty for I)."""

    @abstractmethod
    def decode(self, payload: bytes, refs: Sequence[Frame], size: Tuple[int, int], index: int = 0) -> Frame:
        ...

    def digest(self) -> bytes:
        """Identity folded into the bitstream model hash."""
        return hashlib.sha256(self.name.encode()).digest()


class IntraStubAdapter(ReferenceCodecAdapter):
    """Codes I and P frames alike as intra pictures with the DCT stub."""

    name = "intra-stub"

    def __init__(self, config: IntraConfig = None):
        self.stub = IntraStub(config)

    @property
    def quality(self) -> int:
        return self.stub.config.quality

    def encode(self, frame: Frame, refs: Sequence[Frame]) -> Tuple[bytes, Frame]:
        return self.stub.encode(frame)

    def decode(self, payload: bytes, refs: Sequence[Frame], size: Tuple[int, int], index: int = 0) -> Frame:
        return self.stub.decode(payload, size, index)

    def digest(self) -> bytes:
        cfg = self.stub.config
        return hashlib.sha256(f"{self.name}:{cfg.qualities}:{cfg.support}".encode()).digest()
