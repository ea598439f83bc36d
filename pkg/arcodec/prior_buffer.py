#!/usr/bin/env python3
"""
Temporal prior: the K most recent quantized latents of coded B frames.
"""

import hashlib
from collections import deque
from typing import List, Optional

import torch

from core.errors import ContractError


class PriorBuffer:
    def __init__(self, k: int = 1):
        if k < 0:
            raise ContractError(f"prior capacity must be >= 0, got {k}")
        self.k = k
        self._latents = deque(maxlen=k)
        self.gop_index: Optional[int] = None

    def __len__(self) -> int:
        return len(self._latents)

    def append(self, latent: torch.Tensor) -> None:
        if self.k:
            self._latents.append(latent.detach().clone())

    def reset(self) -> None:
        self._latents.clear()

    def entries(self) -> List[torch.Tensor]:
        """Oldest first."""
        return list(self._latents)

    def stacked(self, like: torch.Tensor) -> Optional[torch.Tensor]:
        """K latents concatenated on the channel axis, zero sentinels first when short.

        ``like`` is a batched latent [B, C, h, w]; returns [B, K*C, h, w] or None when K = 0.
        """
        if not self.k:
            return None
        parts = []
        for _ in range(self.k - len(self._latents)):
            parts.append(torch.zeros_like(like))
        for latent in self._latents:
            lat = latent if latent.dim() == 4 else latent.unsqueeze(0)
            if lat.shape[-3:] != like.shape[-3:]:
                raise ContractError(f"prior latent {tuple(lat.shape[-3:])} does not match {tuple(like.shape[-3:])}")
            parts.append(lat.to(like.dtype).expand_as(like))
        return torch.cat(parts, dim=1)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.k).encode())
        for latent in self._latents:
            h.update(latent.detach().cpu().to(torch.int64).numpy().tobytes())
        return h.hexdigest()
