from .gop import CodingStep, GopPlan, plan_gop
from .bitstream import Bitstream, BitstreamHeader, FrameChunk
from .adapters import ReferenceCodecAdapter, IntraStubAdapter
from .intra_stub import IntraStub, builtin_intra_stub
