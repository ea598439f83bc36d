import os

import numpy as np
import pytest
import torch

from arcodec.model import ArtifactCodec
from core.config import CodecConfig, VfiConfig
from core.frame import Frame
from pipeline.models import CodecModels
from train.corpus import sprite_clip
from vfi.backend import PyramidFlowBackend

slow = pytest.mark.skipif(not os.getenv("IBVC_RUN_SLOW"), reason="set IBVC_RUN_SLOW=1 to run training tests")


@pytest.fixture
def tiny_models():
    """Untrained tiny codec plus a small pyramid backend."""
    torch.manual_seed(0)
    backend = PyramidFlowBackend(VfiConfig(levels=2, channels=(4, 8)))
    codec = ArtifactCodec(CodecConfig.tiny())
    return CodecModels(backend, codec, lambda_id=2).eval()


@pytest.fixture
def toy_frames():
    """Five 64x64 frames of moving sprites."""
    clip = sprite_clip(64, 5, rng=np.random.default_rng(3))
    return [Frame(clip[i], i) for i in range(5)]
