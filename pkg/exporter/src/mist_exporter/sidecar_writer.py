"""MISTEMB1 binary writer.

Layout (little-endian): 8-byte ASCII magic "MISTEMB1", u32 dim, u32 entry
count, then per entry a u16 id byte-length, the UTF-8 instance id, and two
dim-length float32 vectors (sentence, modal).
"""

from __future__ import annotations

import struct
from typing import Iterable

import numpy as np

MAGIC = b"MISTEMB1"


def write_sidecar(entries: Iterable[tuple[str, np.ndarray, np.ndarray]], dim: int, handle) -> int:
    """Write entries (inst_id, sentence_vec, modal_vec) to a binary handle."""
    entries = list(entries)
    handle.write(MAGIC)
    handle.write(struct.pack("<II", dim, len(entries)))
    for inst_id, sentence_vec, modal_vec in entries:
        sentence_vec = np.asarray(sentence_vec, dtype="<f4")
        modal_vec = np.asarray(modal_vec, dtype="<f4")
        if sentence_vec.shape != (dim,) or modal_vec.shape != (dim,):
            raise ValueError(f"entry {inst_id!r} has vectors of the wrong dimension")
        encoded = inst_id.encode("utf-8")
        handle.write(struct.pack("<H", len(encoded)))
        handle.write(encoded)
        handle.write(sentence_vec.tobytes())
        handle.write(modal_vec.tobytes())
    return len(entries)
