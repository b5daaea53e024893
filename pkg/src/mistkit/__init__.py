"""mistkit: modal verbs in scientific text -- detection, function
classification, inter-annotator agreement, corpus analytics, and Open-IE
enrichment, with a from-scratch training and evaluation harness.
"""

__version__ = "0.1.0"

from . import agreement, analytics, detect, enrich, features, harness, metrics, models, scheme
from .corpus import Corpus, Document, ModalInstance, Sentence, load_corpus, parse_corpus, save_corpus, serialize_corpus

__all__ = [
    "Corpus",
    "Document",
    "ModalInstance",
    "Sentence",
    "__version__",
    "agreement",
    "analytics",
    "detect",
    "enrich",
    "features",
    "harness",
    "load_corpus",
    "metrics",
    "models",
    "parse_corpus",
    "save_corpus",
    "scheme",
    "serialize_corpus",
]
