from .features import VARIANCE_FLOOR, features_logvar
from .lda import LdaModel, train_lda
from .model import (
    FORMAT_TAG,
    PipelineModel,
    decision_scores,
    load_model,
    model_to_json,
    predict,
    predict_recording,
    prepare_epochs,
    save_model,
    train_from_epochs,
    train_pipeline,
    train_spatial,
)

__all__ = [
    "FORMAT_TAG",
    "LdaModel",
    "PipelineModel",
    "VARIANCE_FLOOR",
    "decision_scores",
    "features_logvar",
    "load_model",
    "model_to_json",
    "predict",
    "predict_recording",
    "prepare_epochs",
    "save_model",
    "train_from_epochs",
    "train_lda",
    "train_pipeline",
    "train_spatial",
]
