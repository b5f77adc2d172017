"""Vietnamese hate speech classifiers: TextCNN, Bi-GRU-CNN and Bi-GRU-LSTM-CNN.

The heavy lifting lives in the C++ extension ``vihsd._core``.
"""
from ._core import (
    Classifier,
    Error,
    Vocabulary,
    class_weights,
    evaluate_predictions,
    normalize_text,
    stratified_split,
    tokenize,
    train,
    verify,
)

LABELS = ("clean", "offensive", "hate")

__all__ = [
    "Classifier",
    "Error",
    "LABELS",
    "Vocabulary",
    "class_weights",
    "evaluate_predictions",
    "normalize_text",
    "stratified_split",
    "tokenize",
    "train",
    "verify",
]
