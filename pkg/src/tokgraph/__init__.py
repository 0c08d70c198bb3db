"""Discrete-tokenizer analysis toolkit.

Three pillars: an augmentation-graph simulator for a finite toy data space
with exact closed-form reconciliation, a K-means patch tokenizer with
persistent codebooks, and a token-class alignment score for rating
tokenizers against true labels.  The ``tokgraph`` CLI drives all of them.
"""

from . import dataio, tcas, tokenizer, toymodel
from .errors import DataFormatError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "DataFormatError",
    "ValidationError",
    "dataio",
    "tcas",
    "tokenizer",
    "toymodel",
    "__version__",
]
