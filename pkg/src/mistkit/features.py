"""Input representations: text-format word vectors for the convolutional
model, and the binary embedding sidecar consumed by the linear-head models.

Sidecar layout (little-endian throughout):

    magic   8 bytes ASCII "MISTEMB1"
    dim     u32
    count   u32
    entry   u16 id byte-length, UTF-8 inst_id,
            dim x f32 sentence vector, dim x f32 modal vector

The float payloads are raw IEEE-754 binary32, so write/read round-trips are
bit-exact on any platform.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, MissingEmbeddingError

SIDECAR_MAGIC = b"MISTEMB1"


@dataclass
class WordVectorTable:
    dim: int
    vectors: dict[str, np.ndarray]
    unk_vector: np.ndarray = None

    def __post_init__(self):
        if self.unk_vector is None:
            self.unk_vector = np.zeros(self.dim, dtype=np.float64)

    def lookup(self, token: str) -> np.ndarray:
        return self.vectors.get(token, self.unk_vector)

    def embed(self, tokens: list[str]) -> np.ndarray:
        """Token sequence as a (len, dim) matrix; unknown tokens map to zeros."""
        return np.stack([self.lookup(tok) for tok in tokens])


def load_word_vectors(path, dim: int) -> WordVectorTable:
    """Load whitespace-separated text vectors (token followed by dim floats)."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != 1 + dim:
                raise DataError(
                    f"{path}: line {line_no} has {len(parts) - 1} values, expected {dim}"
                )
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise DataError(f"{path}: line {line_no} contains an unparseable float") from None
            vectors[parts[0]] = vec
    return WordVectorTable(dim=dim, vectors=vectors)


@dataclass
class EmbeddingSidecar:
    dim: int
    entries: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def add(self, inst_id: str, sentence_vec, modal_vec) -> None:
        if inst_id in self.entries:
            raise DataError(f"duplicate inst_id {inst_id!r} in sidecar")
        sentence_vec = np.asarray(sentence_vec, dtype=np.float32)
        modal_vec = np.asarray(modal_vec, dtype=np.float32)
        if sentence_vec.shape != (self.dim,) or modal_vec.shape != (self.dim,):
            raise DataError(
                f"sidecar entry {inst_id!r} has wrong vector shape for dim {self.dim}"
            )
        self.entries[inst_id] = (sentence_vec, modal_vec)

    def get(self, inst_id: str) -> tuple[np.ndarray, np.ndarray]:
        try:
            return self.entries[inst_id]
        except KeyError:
            raise MissingEmbeddingError(
                f"sidecar has no embedding for instance {inst_id!r}"
            ) from None


def write_sidecar(sidecar: EmbeddingSidecar, path) -> None:
    with open(path, "wb") as handle:
        handle.write(SIDECAR_MAGIC)
        handle.write(struct.pack("<II", sidecar.dim, len(sidecar.entries)))
        for inst_id, (sent_vec, modal_vec) in sidecar.entries.items():
            encoded = inst_id.encode("utf-8")
            handle.write(struct.pack("<H", len(encoded)))
            handle.write(encoded)
            handle.write(np.asarray(sent_vec, dtype="<f4").tobytes())
            handle.write(np.asarray(modal_vec, dtype="<f4").tobytes())


def read_sidecar(path) -> EmbeddingSidecar:
    with open(path, "rb") as handle:
        data = handle.read()
    if data[:8] != SIDECAR_MAGIC:
        raise DataError(f"{path}: bad magic {data[:8]!r}, expected {SIDECAR_MAGIC!r}")
    offset = 8
    try:
        dim, count = struct.unpack_from("<II", data, offset)
        offset += 8
        sidecar = EmbeddingSidecar(dim=dim)
        vec_bytes = 4 * dim
        for _ in range(count):
            (id_len,) = struct.unpack_from("<H", data, offset)
            offset += 2
            raw_id = data[offset : offset + id_len]
            if len(raw_id) != id_len:
                raise struct.error("id out of bounds")
            inst_id = raw_id.decode("utf-8")
            offset += id_len
            if offset + 2 * vec_bytes > len(data):
                raise struct.error("vector payload out of bounds")
            sent_vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset)
            offset += vec_bytes
            modal_vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset)
            offset += vec_bytes
            sidecar.add(inst_id, sent_vec.copy(), modal_vec.copy())
    except struct.error:
        raise DataError(f"{path}: truncated sidecar file") from None
    if offset != len(data):
        raise DataError(f"{path}: {len(data) - offset} trailing bytes after last entry")
    return sidecar
