from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .kernels import JIT_ENABLED
from .model import (
    TaggerConfig,
    TaggerModel,
    backward,
    build_vocabs,
    clamp_events,
    compose_word,
    encode_and_predict,
    forward,
    loss_and_grads,
    nll_loss,
    predict_tags,
    preprocess,
    softmax,
)
from .train import (
    EpochRecord,
    NonFiniteGradientError,
    TrainingError,
    evaluate,
    global_norm,
    sgd_step,
    train,
    write_history,
)
