from .quantization import quantize, round_half_away
from .weight_map import WeightMap, compute_weight_map, weight_map_tensor
