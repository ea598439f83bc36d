from .losses import rd_loss, distortion
from .trainer import TrainState, StepMetrics, build_state, train_step, fit
from .corpus import ClipDataset, SyntheticClipDataset, sprite_clip, translating_square, write_desk_corpus
