"""Minimal reader for the corpus interchange format (one JSON document per
line). Only the fields the exporter needs are extracted; unknown fields are
ignored so the reader stays compatible with producers that attach extras.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


class CorpusReadError(Exception):
    pass


@dataclass(frozen=True)
class InstanceRef:
    inst_id: str
    token_index: int
    modal: str


@dataclass(frozen=True)
class SentenceRef:
    doc_id: str
    sent_id: str
    tokens: tuple[str, ...]
    instances: tuple[InstanceRef, ...]


def read_corpus(path) -> list[SentenceRef]:
    """Sentences with their modal instances, in file order."""
    sentences: list[SentenceRef] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusReadError(f"{path}: line {line_no}: invalid JSON ({exc.msg})") from None
            try:
                doc_id = record["doc_id"]
                for sent in record["sentences"]:
                    tokens = tuple(sent["tokens"])
                    if not tokens:
                        raise CorpusReadError(
                            f"{path}: line {line_no}: sentence {sent.get('sent_id')!r} has no tokens"
                        )
                    instances = []
                    for inst in sent.get("instances", []):
                        ref = InstanceRef(
                            inst_id=inst["inst_id"],
                            token_index=int(inst["token_index"]),
                            modal=inst["modal"],
                        )
                        if not 0 <= ref.token_index < len(tokens):
                            raise CorpusReadError(
                                f"{path}: line {line_no}: instance {ref.inst_id!r} token index "
                                f"{ref.token_index} out of range"
                            )
                        if ref.inst_id in seen_ids:
                            raise CorpusReadError(
                                f"{path}: line {line_no}: duplicate inst_id {ref.inst_id!r}"
                            )
                        seen_ids.add(ref.inst_id)
                        instances.append(ref)
                    sentences.append(
                        SentenceRef(
                            doc_id=doc_id,
                            sent_id=sent["sent_id"],
                            tokens=tokens,
                            instances=tuple(instances),
                        )
                    )
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusReadError(
                    f"{path}: line {line_no}: malformed document record ({exc})"
                ) from None
    return sentences
