"""Hybrid aspect-based sentiment analysis toolkit for Persian.

Pipeline: corpus loading/splitting -> Persian preprocessing -> dictionary
augmentation -> hybrid features (TF-IDF + polarity scores) -> decision tree
or Naive Bayes -> evaluation reports.
"""

from .corpus import AspectInstance, Dataset, Polarity, dataset_stats, load_dataset, split
from .evaluation import confusion_matrix, metrics, run_experiment

__version__ = "0.1.0"

__all__ = [
    "AspectInstance",
    "Dataset",
    "Polarity",
    "dataset_stats",
    "load_dataset",
    "split",
    "confusion_matrix",
    "metrics",
    "run_experiment",
    "__version__",
]
