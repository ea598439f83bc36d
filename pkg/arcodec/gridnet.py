#!/usr/bin/env python3
"""
GridNet-style fusion of multi-scale features.

Rows are resolutions (row 0 finest); the first half of the columns passes
information downwards with strided convolutions, the second half upwards
with bilinear upsampling. Lateral connections are residual blocks. The
result is read from row 0 of the last column.
"""

from typing import List

import torch
import torch.nn as nn
import torch.nn.functional as F


class LateralBlock(nn.Module):
    def __init__(self, ch: int):
        super().__init__()
        self.body = nn.Sequential(nn.PReLU(ch), nn.Conv2d(ch, ch, 3, 1, 1),
                                  nn.PReLU(ch), nn.Conv2d(ch, ch, 3, 1, 1))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.body(x)


class DownBlock(nn.Module):
    def __init__(self, ch: int):
        super().__init__()
        self.body = nn.Sequential(nn.PReLU(ch), nn.Conv2d(ch, ch, 3, 2, 1),
                                  nn.PReLU(ch), nn.Conv2d(ch, ch, 3, 1, 1))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.body(x)


class UpBlock(nn.Module):
    def __init__(self, ch: int):
        super().__init__()
        self.body = nn.Sequential(nn.PReLU(ch), nn.Conv2d(ch, ch, 3, 1, 1),
                                  nn.PReLU(ch), nn.Conv2d(ch, ch, 3, 1, 1))

    def forward(self, x: torch.Tensor, size) -> torch.Tensor:
        return self.body(F.interpolate(x, size=size, mode="bilinear", align_corners=False))


class GridFusion(nn.Module):
    def __init__(self, in_channels: int, channels: int, rows: int = 3, cols: int = 4):
        super().__init__()
        self.rows, self.cols = rows, cols
        self.stems = nn.ModuleList([nn.Conv2d(in_channels, channels, 3, 1, 1) for _ in range(rows)])
        self.lateral = nn.ModuleDict({f"{r}_{c}": LateralBlock(channels)
                                      for r in range(rows) for c in range(1, cols)})
        half = cols // 2
        self.down = nn.ModuleDict({f"{r}_{c}": DownBlock(channels)
                                   for r in range(1, rows) for c in range(half)})
        self.up = nn.ModuleDict({f"{r}_{c}": UpBlock(channels)
                                 for r in range(rows - 1) for c in range(half, cols)})

    def forward(self, inputs: List[torch.Tensor]) -> torch.Tensor:
        """inputs: one map per row, finest first; row r has half the size of row r-1."""
        half = self.cols // 2
        state = [[None] * self.cols for _ in range(self.rows)]
        for c in range(self.cols):
            if c < half:
                for r in range(self.rows):
                    x = self.stems[r](inputs[r]) if c == 0 else self.lateral[f"{r}_{c}"](state[r][c - 1])
                    if r > 0:
                        x = x + self.down[f"{r}_{c}"](state[r - 1][c])
                    state[r][c] = x
            else:
                for r in reversed(range(self.rows)):
                    x = self.lateral[f"{r}_{c}"](state[r][c - 1])
                    if r < self.rows - 1:
                        x = x + self.up[f"{r}_{c}"](state[r + 1][c], x.shape[-2:])
                    state[r][c] = x
        return state[0][self.cols - 1]
