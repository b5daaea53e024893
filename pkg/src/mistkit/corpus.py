"""Annotated-corpus data model and the line-delimited JSON interchange format.

One document per line. Corpora are treated as immutable after construction
and may be shared freely between threads. `dataset_id` travels on every
document record so that a serialized corpus round-trips exactly; readers
accept records without it (defaulting to "mist").

Documents may carry an optional ``meta`` object; the only key the toolkit
interprets is ``total_sentences`` (the document's full sentence count,
needed for modal-sentence ratios). Unknown meta keys are preserved.
"""

from __future__ import annotations

import hashlib
import io
import json
import shutil
import tarfile
import tempfile
import time
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

from . import scheme
from .errors import CorpusFormatError, DataError

DOMAINS = ("CL", "MS", "AGR", "ES", "CS", "OTHER")
SUBSETS = ("fulltext", "sampled")

SCHEMA_VERSION = "1"


@dataclass
class ModalInstance:
    inst_id: str
    token_index: int
    modal: str
    surface: str
    negated: bool = False
    gold: frozenset[str] = frozenset()
    annotations: dict[str, frozenset[str]] = field(default_factory=dict)


@dataclass
class Sentence:
    sent_id: str
    tokens: list[str]
    instances: list[ModalInstance] = field(default_factory=list)


@dataclass
class Document:
    doc_id: str
    domain: str
    subset: str
    sentences: list[Sentence] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


@dataclass
class Corpus:
    documents: list[Document]
    dataset_id: str = "mist"

    def iter_instances(self) -> Iterator[tuple[Document, Sentence, ModalInstance]]:
        for doc in self.documents:
            for sent in doc.sentences:
                for inst in sent.instances:
                    yield doc, sent, inst

    @property
    def n_instances(self) -> int:
        return sum(1 for _ in self.iter_instances())

    def instance_map(self) -> dict[str, ModalInstance]:
        return {inst.inst_id: inst for _, _, inst in self.iter_instances()}


def _label_set(raw, line_no: int, labels: tuple[str, ...], what: str) -> frozenset[str]:
    if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
        raise CorpusFormatError(f"line {line_no}: {what} must be a list of strings")
    for lab in raw:
        if lab not in labels:
            raise CorpusFormatError(f"line {line_no}: unknown label {lab!r} in {what}")
    return frozenset(raw)


def _parse_instance(raw, line_no: int, sent: Sentence, labels: tuple[str, ...]) -> ModalInstance:
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"line {line_no}: instance record must be an object")
    try:
        inst_id = raw["inst_id"]
        token_index = raw["token_index"]
        modal = raw["modal"]
    except KeyError as exc:
        raise CorpusFormatError(f"line {line_no}: instance missing field {exc}") from None
    if not isinstance(inst_id, str) or not inst_id:
        raise CorpusFormatError(f"line {line_no}: inst_id must be a non-empty string")
    if not isinstance(token_index, int) or isinstance(token_index, bool):
        raise CorpusFormatError(f"line {line_no}: token_index must be an integer")
    if not 0 <= token_index < len(sent.tokens):
        raise CorpusFormatError(
            f"line {line_no}: token_index {token_index} out of range for sentence "
            f"{sent.sent_id!r} with {len(sent.tokens)} tokens"
        )
    if modal not in scheme.MODALS:
        raise CorpusFormatError(f"line {line_no}: unknown modal {modal!r}")
    surface = raw.get("surface", sent.tokens[token_index])
    negated = raw.get("negated", False)
    if not isinstance(negated, bool):
        raise CorpusFormatError(f"line {line_no}: negated must be a boolean")
    gold = _label_set(raw.get("gold", []), line_no, labels, "gold")
    annotations_raw = raw.get("annotations", {})
    if not isinstance(annotations_raw, dict):
        raise CorpusFormatError(f"line {line_no}: annotations must be an object")
    annotations = {
        ann: _label_set(labs, line_no, labels, f"annotations[{ann!r}]")
        for ann, labs in annotations_raw.items()
    }
    return ModalInstance(
        inst_id=inst_id,
        token_index=token_index,
        modal=modal,
        surface=surface,
        negated=negated,
        gold=gold,
        annotations=annotations,
    )


def _parse_document(raw, line_no: int, labels: tuple[str, ...]) -> Document:
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"line {line_no}: document record must be an object")
    try:
        doc_id = raw["doc_id"]
        domain = raw["domain"]
        subset = raw["subset"]
        sentences_raw = raw["sentences"]
    except KeyError as exc:
        raise CorpusFormatError(f"line {line_no}: document missing field {exc}") from None
    if domain not in DOMAINS:
        raise CorpusFormatError(f"line {line_no}: unknown domain {domain!r}")
    if subset not in SUBSETS:
        raise CorpusFormatError(f"line {line_no}: unknown subset {subset!r}")
    meta = raw.get("meta", {})
    if not isinstance(meta, dict):
        raise CorpusFormatError(f"line {line_no}: meta must be an object")
    doc = Document(doc_id=doc_id, domain=domain, subset=subset, meta=dict(meta))
    if not isinstance(sentences_raw, list):
        raise CorpusFormatError(f"line {line_no}: sentences must be a list")
    for sent_raw in sentences_raw:
        if not isinstance(sent_raw, dict):
            raise CorpusFormatError(f"line {line_no}: sentence record must be an object")
        try:
            sent_id = sent_raw["sent_id"]
            tokens = sent_raw["tokens"]
        except KeyError as exc:
            raise CorpusFormatError(f"line {line_no}: sentence missing field {exc}") from None
        if not isinstance(tokens, list) or not tokens or not all(isinstance(t, str) for t in tokens):
            raise CorpusFormatError(
                f"line {line_no}: tokens of sentence {sent_id!r} must be a non-empty string list"
            )
        sent = Sentence(sent_id=sent_id, tokens=list(tokens))
        for inst_raw in sent_raw.get("instances", []):
            sent.instances.append(_parse_instance(inst_raw, line_no, sent, labels))
        doc.sentences.append(sent)
    return doc


def parse_corpus(stream: Iterable[str], dataset_id: Optional[str] = None) -> Corpus:
    """Parse line-delimited document records into a validated Corpus.

    `dataset_id` overrides or defaults the per-record field; records carrying
    conflicting dataset ids are rejected.
    """
    documents: list[Document] = []
    seen_docs: set[str] = set()
    seen_insts: set[str] = set()
    found_id: Optional[str] = None
    labels: Optional[tuple[str, ...]] = None
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"line {line_no}: invalid JSON ({exc.msg})") from None
        rec_id = raw.get("dataset_id") if isinstance(raw, dict) else None
        if rec_id is not None:
            if found_id is not None and rec_id != found_id:
                raise CorpusFormatError(
                    f"line {line_no}: dataset_id {rec_id!r} conflicts with {found_id!r}"
                )
            if dataset_id is not None and rec_id != dataset_id:
                raise CorpusFormatError(
                    f"line {line_no}: record dataset_id {rec_id!r} conflicts with "
                    f"requested {dataset_id!r}"
                )
            found_id = rec_id
        if labels is None:
            effective = dataset_id or found_id or "mist"
            labels = scheme.scheme_labels(scheme.scheme_for_dataset(effective))
        doc = _parse_document(raw, line_no, labels)
        if doc.doc_id in seen_docs:
            raise CorpusFormatError(f"line {line_no}: duplicate doc_id {doc.doc_id!r}")
        seen_docs.add(doc.doc_id)
        for sent in doc.sentences:
            for inst in sent.instances:
                if inst.inst_id in seen_insts:
                    raise CorpusFormatError(
                        f"line {line_no}: duplicate inst_id {inst.inst_id!r}"
                    )
                seen_insts.add(inst.inst_id)
        documents.append(doc)
    effective = dataset_id or found_id or "mist"
    if dataset_id is not None and found_id is not None and dataset_id != found_id:
        raise CorpusFormatError(
            f"requested dataset_id {dataset_id!r} conflicts with records marked {found_id!r}"
        )
    return Corpus(documents=documents, dataset_id=effective)


def _instance_record(inst: ModalInstance, label_order: dict[str, int]) -> dict:
    return {
        "inst_id": inst.inst_id,
        "token_index": inst.token_index,
        "modal": inst.modal,
        "surface": inst.surface,
        "negated": inst.negated,
        "gold": sorted(inst.gold, key=label_order.get),
        "annotations": {
            ann: sorted(labs, key=label_order.get)
            for ann, labs in sorted(inst.annotations.items())
        },
    }


def serialize_corpus(corpus: Corpus) -> Iterator[str]:
    """Yield one canonical JSON line per document (stable byte output)."""
    labels = scheme.scheme_labels(scheme.scheme_for_dataset(corpus.dataset_id))
    label_order = {lab: i for i, lab in enumerate(labels)}
    for doc in corpus.documents:
        record = {
            "doc_id": doc.doc_id,
            "dataset_id": corpus.dataset_id,
            "domain": doc.domain,
            "subset": doc.subset,
            "sentences": [
                {
                    "sent_id": sent.sent_id,
                    "tokens": sent.tokens,
                    "instances": [
                        _instance_record(inst, label_order) for inst in sent.instances
                    ],
                }
                for sent in doc.sentences
            ],
        }
        if doc.meta:
            record["meta"] = {k: doc.meta[k] for k in sorted(doc.meta)}
        yield json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def load_corpus(path, dataset_id: Optional[str] = None) -> Corpus:
    with open(path, encoding="utf-8") as handle:
        return parse_corpus(handle, dataset_id=dataset_id)


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for line in serialize_corpus(corpus):
            handle.write(line + "\n")


def fetch_dataset(source_url: str, dest, sha256: Optional[str] = None, retries: int = 3):
    """Download an archive over HTTPS, verify its digest, extract into dest.

    The archive is verified before anything is extracted, so a digest
    mismatch leaves no partial data behind.
    """
    import requests

    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    last_err = None
    payload = None
    for attempt in range(1, retries + 1):
        try:
            resp = requests.get(source_url, timeout=60)
            resp.raise_for_status()
            payload = resp.content
            break
        except Exception as exc:
            last_err = exc
            if attempt < retries:
                time.sleep(min(2**attempt, 10))
    if payload is None:
        raise DataError(
            f"failed to download {source_url} after {retries} attempts: {last_err}"
        )
    if sha256 is not None:
        digest = hashlib.sha256(payload).hexdigest()
        if digest != sha256.lower():
            raise DataError(
                f"digest mismatch for {source_url}: expected {sha256}, got {digest}"
            )
    with tempfile.TemporaryDirectory(dir=dest) as tmp:
        tmp_dir = Path(tmp) / "extracted"
        tmp_dir.mkdir()
        buf = io.BytesIO(payload)
        try:
            if zipfile.is_zipfile(buf):
                buf.seek(0)
                with zipfile.ZipFile(buf) as archive:
                    archive.extractall(tmp_dir)
            else:
                buf.seek(0)
                with tarfile.open(fileobj=buf) as archive:
                    archive.extractall(tmp_dir)
        except (zipfile.BadZipFile, tarfile.TarError) as exc:
            raise DataError(f"failed to extract archive from {source_url}: {exc}") from None
        for item in tmp_dir.iterdir():
            target = dest / item.name
            if target.exists():
                if target.is_dir():
                    shutil.rmtree(target)
                else:
                    target.unlink()
            shutil.move(str(item), str(target))
    return dest


# Release conversion. The supported layouts are documented in the README:
# either interchange JSONL files, or instance-level CSV/TSV tables with the
# columns below (one row per modal instance; annotator columns are optional
# and prefixed "ann:").
_TABLE_REQUIRED = ("doc_id", "domain", "subset", "sent_id", "tokens", "token_index", "modal")


def _convert_table(paths, dataset_id: str) -> Corpus:
    import csv

    labels = scheme.scheme_labels(scheme.scheme_for_dataset(dataset_id))
    docs: dict[str, Document] = {}
    order: list[str] = []
    counter = 0
    for path in paths:
        delim = "\t" if path.suffix.lower() == ".tsv" else ","
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle, delimiter=delim)
            if reader.fieldnames is None or not set(_TABLE_REQUIRED) <= set(reader.fieldnames):
                missing = set(_TABLE_REQUIRED) - set(reader.fieldnames or [])
                raise DataError(
                    f"{path.name}: release table missing columns {sorted(missing)}"
                )
            ann_cols = [c for c in reader.fieldnames if c.startswith("ann:")]
            for row_no, row in enumerate(reader, start=2):
                counter += 1
                doc_id = row["doc_id"]
                if doc_id not in docs:
                    docs[doc_id] = Document(
                        doc_id=doc_id, domain=row["domain"], subset=row["subset"]
                    )
                    order.append(doc_id)
                doc = docs[doc_id]
                sent = next((s for s in doc.sentences if s.sent_id == row["sent_id"]), None)
                if sent is None:
                    sent = Sentence(sent_id=row["sent_id"], tokens=row["tokens"].split(" "))
                    doc.sentences.append(sent)
                gold = frozenset(x for x in row.get("gold", "").split("|") if x)
                annotations = {}
                for col in ann_cols:
                    if row.get(col, ""):
                        annotations[col[len("ann:") :]] = frozenset(
                            x for x in row[col].split("|") if x
                        )
                for lab_set in [gold, *annotations.values()]:
                    for lab in lab_set:
                        if lab not in labels:
                            raise DataError(f"{path.name} row {row_no}: unknown label {lab!r}")
                try:
                    token_index = int(row["token_index"])
                except ValueError:
                    raise DataError(
                        f"{path.name} row {row_no}: token_index {row['token_index']!r} "
                        "is not an integer"
                    ) from None
                inst_id = row.get("inst_id") or f"{doc_id}.{row['sent_id']}.{token_index}"
                sent.instances.append(
                    ModalInstance(
                        inst_id=inst_id,
                        token_index=token_index,
                        modal=row["modal"],
                        surface=row.get("surface") or sent.tokens[token_index],
                        negated=row.get("negated", "").strip().lower() in ("1", "true", "yes"),
                        gold=gold,
                        annotations=annotations,
                    )
                )
    corpus = Corpus(documents=[docs[d] for d in order], dataset_id=dataset_id)
    # Re-run full validation (index bounds, duplicate ids) through the parser.
    return parse_corpus(serialize_corpus(corpus), dataset_id=dataset_id)


def convert_release(release_dir, dataset_id: str = "mist") -> Corpus:
    """Convert a published release directory into the interchange model.

    Recognizes interchange JSONL files or instance-level CSV/TSV tables.
    """
    release_dir = Path(release_dir)
    if not release_dir.is_dir():
        raise DataError(f"release directory {release_dir} does not exist")
    jsonl = sorted(release_dir.rglob("*.jsonl"))
    if jsonl:
        def lines():
            for path in jsonl:
                with open(path, encoding="utf-8") as handle:
                    yield from handle
        return parse_corpus(lines(), dataset_id=dataset_id)
    tables = sorted(release_dir.rglob("*.csv")) + sorted(release_dir.rglob("*.tsv"))
    if tables:
        return _convert_table(tables, dataset_id)
    raise DataError(
        f"unrecognized release layout under {release_dir}: expected interchange "
        "*.jsonl or instance-level *.csv/*.tsv tables (see README)"
    )
