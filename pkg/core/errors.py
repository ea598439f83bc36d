#!/usr/bin/env python3
"""
Error hierarchy shared by every IBVC package.
"""

from typing import List, Optional


class IBVCError(Exception):
    """Base class for all codec, training and evaluation errors."""


class MalformedInputError(IBVCError, ValueError):
    """Input bytes, planes or images do not match their declared format."""


class ConfigurationError(IBVCError, ValueError):
    """Invalid settings, missing or mismatched checkpoints."""


class ContractError(IBVCError, ValueError):
    """A caller violated an operation precondition (shape, range, finiteness)."""


class EvaluationError(IBVCError):
    """R-D curves or reports cannot be evaluated."""


class TrainingAbort(IBVCError, RuntimeError):
    """Non-finite loss or gradient during optimization."""

    def __init__(self, message: str, group: Optional[str] = None):
        super().__init__(message)
        self.group = group


class DecodeError(IBVCError):
    """Corrupt or truncated stream.

    ``offset`` is the byte position where decoding failed (relative to the
    stream that was being parsed), ``frame_index`` the frame whose chunk was
    being decoded, and ``decoded`` the frames reconstructed before the failure.
    """

    def __init__(self, message: str, offset: Optional[int] = None,
                 frame_index: Optional[int] = None, decoded: Optional[List] = None):
        detail = message
        if frame_index is not None:
            detail = f"frame {frame_index}: {detail}"
        if offset is not None:
            detail = f"{detail} (byte offset {offset})"
        super().__init__(detail)
        self.reason = message
        self.offset = offset
        self.frame_index = frame_index
        self.decoded = decoded if decoded is not None else []

    def at_frame(self, frame_index: int, decoded: Optional[List] = None) -> "DecodeError":
        """Return a copy of this error attributed to ``frame_index``."""
        return DecodeError(self.reason, offset=self.offset, frame_index=frame_index,
                           decoded=decoded if decoded is not None else self.decoded)
