from .sequence import PixelFormat, SequenceSpec, read_sequence, write_sequence
from .color import yuv_to_rgb, rgb_to_yuv
from .padding import pad_to_multiple, crop_to_original
