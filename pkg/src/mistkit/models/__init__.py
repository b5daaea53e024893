from .adam import Adam
from .bundle import (
    KINDS,
    MajorityHead,
    ModelBundle,
    TrainConfig,
    TrainExample,
    forward_head,
    from_json,
    load_bundle,
    predict,
    predict_many,
    save_bundle,
    to_json,
)
from .cnn import OUTPUT_DIM, REGION_SIZES, CnnEncoder, encode, init_encoder
from .heads import HeadConfig, LinearHead, head_loss_and_grads, init_head, sigmoid, softmax
from .train import derive_rng, examples_from_corpus, train_majority, train_model

__all__ = [
    "Adam",
    "CnnEncoder",
    "HeadConfig",
    "KINDS",
    "LinearHead",
    "MajorityHead",
    "ModelBundle",
    "OUTPUT_DIM",
    "REGION_SIZES",
    "TrainConfig",
    "TrainExample",
    "derive_rng",
    "encode",
    "examples_from_corpus",
    "forward_head",
    "from_json",
    "head_loss_and_grads",
    "init_encoder",
    "init_head",
    "load_bundle",
    "predict",
    "predict_many",
    "save_bundle",
    "sigmoid",
    "softmax",
    "to_json",
    "train_majority",
    "train_model",
]
