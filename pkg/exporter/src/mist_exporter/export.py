"""Corpus-to-sidecar export.

Per modal instance, the sentence vector is the encoder's sequence-start
aggregate and the modal vector is the contextual embedding of the first
subtoken of the modal's word. Truncation that leaves the modal token in
place is logged per sentence; truncation that removes it is a hard error.
The output file is written atomically (temp file + rename).
"""

from __future__ import annotations

import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .corpus_reader import read_corpus
from .encoders import load_encoder
from .sidecar_writer import write_sidecar

log = logging.getLogger("mist_exporter")


class AlignmentError(Exception):
    """The modal token could not be mapped to a kept subtoken."""


@dataclass
class ExportConfig:
    encoder: str
    corpus: str
    out: str
    max_len: int = 512
    dim: int = 8  # stub encoder only; transformer encoders fix their own
    device: str = "cpu"


def export(config: ExportConfig) -> Path:
    encoder = load_encoder(
        config.encoder, max_len=config.max_len, dim=config.dim, device=config.device
    )
    sentences = read_corpus(config.corpus)
    entries = []
    n_truncated = 0
    for sent in sentences:
        if not sent.instances:
            continue
        encoded = encoder.encode(list(sent.tokens))
        if encoded.truncated:
            n_truncated += 1
            log.warning(
                "sentence %s/%s truncated to %d subtokens",
                sent.doc_id, sent.sent_id, len(encoded.token_vecs),
            )
        for inst in sent.instances:
            span = encoded.word_spans[inst.token_index]
            if span is None or span[1] <= span[0]:
                raise AlignmentError(
                    f"instance {inst.inst_id!r}: modal token at word index "
                    f"{inst.token_index} was removed by truncation "
                    f"(max_len={config.max_len})"
                )
            entries.append(
                (inst.inst_id, encoded.sentence_vec, encoded.token_vecs[span[0]])
            )
    out = Path(config.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=out.parent, prefix=out.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            count = write_sidecar(entries, encoder.dim, handle)
        os.replace(tmp_name, out)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    log.info(
        "wrote %d entries (dim %d) to %s; %d truncated sentences",
        count, encoder.dim, out, n_truncated,
    )
    return out
