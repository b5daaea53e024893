"""Open-IE triple enrichment from classified modal functions.

Two effects compose:
  * relation templates -- capability rewrites the relation to
    hasCapabilityTo_<verb>; deontic to isRequiredTo_<verb> for must/should
    and isAllowedTo_<verb> otherwise. Deontic takes precedence when both
    apply, and at most one rewrite happens.
  * a factuality rating on the whole fact -- speculation, possible
    (feasibility or options), inferred (inference), or true (rhetorical,
    and the default). With several candidates the least certain wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import DataError

# Least certain first; the leftmost candidate present wins.
FACTUALITY_ORDER = ("speculation", "possible", "inferred", "true")

_FACTUALITY = {
    "speculation": "speculation",
    "feasibility": "possible",
    "options": "possible",
    "inference": "inferred",
    "rhetorical": "true",
}

_REQUIRED_MODALS = {"must", "should"}


@dataclass(frozen=True)
class Extraction:
    subject: str
    relation: str
    object: str
    inst_id: str
    relation_lemma: Optional[str] = None


@dataclass(frozen=True)
class EnrichedFact:
    subject: str
    relation: str
    object: str
    factuality: str


def enrich(extraction: Extraction, modal: str, labels: frozenset[str]) -> EnrichedFact:
    """Rewrite one triple according to the predicted modal function(s)."""
    if not labels:
        raise ValueError(f"instance {extraction.inst_id!r} has an empty label set")
    if not extraction.relation:
        raise ValueError(f"instance {extraction.inst_id!r} has an empty relation")
    verb = extraction.relation_lemma or extraction.relation
    relation = extraction.relation
    if "deontic" in labels:
        template = "isRequiredTo_" if modal in _REQUIRED_MODALS else "isAllowedTo_"
        relation = template + verb
    elif "capability" in labels:
        relation = "hasCapabilityTo_" + verb
    candidates = {_FACTUALITY[lab] for lab in labels if lab in _FACTUALITY}
    factuality = next((f for f in FACTUALITY_ORDER if f in candidates), "true")
    return EnrichedFact(
        subject=extraction.subject,
        relation=relation,
        object=extraction.object,
        factuality=factuality,
    )


def read_triples(path) -> tuple[list[Extraction], dict[str, str]]:
    """Triples from JSONL, plus any modals carried inline on the records."""
    triples = []
    modals: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {line_no}: invalid JSON ({exc.msg})") from None
            try:
                triples.append(
                    Extraction(
                        subject=raw["subject"],
                        relation=raw["relation"],
                        object=raw["object"],
                        inst_id=raw["inst_id"],
                        relation_lemma=raw.get("relation_lemma"),
                    )
                )
            except KeyError as exc:
                raise DataError(f"{path}: line {line_no}: triple missing field {exc}") from None
            if "modal" in raw:
                modals[raw["inst_id"]] = raw["modal"]
    return triples, modals


def enrich_stream(
    triples: Iterable[Extraction],
    predictions: dict[str, frozenset[str]],
    modals: dict[str, str],
) -> list[EnrichedFact]:
    """Join triples to predictions and modals by instance id, then enrich."""
    facts = []
    for triple in triples:
        if triple.inst_id not in predictions:
            raise DataError(f"no prediction for instance {triple.inst_id!r}")
        if triple.inst_id not in modals:
            raise DataError(
                f"modal verb of instance {triple.inst_id!r} unknown; supply a corpus "
                "or a 'modal' field on the triple"
            )
        facts.append(enrich(triple, modals[triple.inst_id], predictions[triple.inst_id]))
    return facts


def fact_record(fact: EnrichedFact) -> str:
    return json.dumps(
        {
            "subject": fact.subject,
            "relation": fact.relation,
            "object": fact.object,
            "factuality": fact.factuality,
        },
        ensure_ascii=False,
        separators=(",", ":"),
    )
