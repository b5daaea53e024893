"""Embedding sidecar exporter: runs a contextual encoder over a modal-verb
corpus and writes per-instance sentence and modal-token vectors in the
MISTEMB1 binary format consumed by the classifier toolkit.
"""

__version__ = "0.1.0"

from .corpus_reader import CorpusReadError, read_corpus
from .encoders import EncodedSentence, StubEncoder, load_encoder
from .export import AlignmentError, ExportConfig, export
from .sidecar_writer import write_sidecar

__all__ = [
    "AlignmentError",
    "CorpusReadError",
    "EncodedSentence",
    "ExportConfig",
    "StubEncoder",
    "__version__",
    "export",
    "load_encoder",
    "read_corpus",
    "write_sidecar",
]
