"""Exception hierarchy shared across the toolkit.

DataError covers malformed or inconsistent inputs (exit code 2 in the CLI);
TrainingError covers runtime failures inside optimization (exit code 3).
"""


class MistkitError(Exception):
    pass


class DataError(MistkitError):
    pass


class CorpusFormatError(DataError):
    """Malformed corpus record; message names the offending line or record."""


class MissingEmbeddingError(DataError):
    """A required instance id is absent from the embedding sidecar."""


class TrainingError(MistkitError):
    pass
