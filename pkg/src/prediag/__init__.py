"""Retrieval-based consultation chatbot plus a breast-pathology classifier head.

Two halves share this package: a statement-matching dialogue system
(textprep, matching, store, dialogue) and a small float64 neural core with
transfer-learning heads (nn, datasets, heads), tied together by an HTTP
service and a CLI.
"""

__version__ = "0.1.0"

from .matching import find_best_match, levenshtein_distance, similarity
from .textprep import ProcessedText, preprocess

__all__ = [
    "__version__",
    "preprocess",
    "ProcessedText",
    "levenshtein_distance",
    "similarity",
    "find_best_match",
]
