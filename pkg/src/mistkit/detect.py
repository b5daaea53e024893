"""Modal-verb target detection in tokenized sentences.

Classifiers assume targets are pre-marked; this supplies that preprocessing
without a POS tagger. Exclusions are blocklist-style only: a following
base-form verb is NOT required, since elliptical uses ("... if we can .")
are legitimate targets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus, Document, ModalInstance, Sentence
from .scheme import MODALS

# Contracted negations that fold into a single token.
_CONTRACTIONS = {
    "cannot": "can",
    "can't": "can",
    "couldn't": "could",
    "mightn't": "might",
    "mustn't": "must",
    "shouldn't": "should",
}

# "a can of solvent", "the must of grapes": noun readings of can/must.
_NOUN_CONTEXT = {"a", "an", "the", "this", "that", "tin", "trash"}

_NEGATORS = {"not", "n't"}


@dataclass(frozen=True)
class ModalTarget:
    token_index: int
    modal: str
    surface: str
    negated: bool


def _is_day_number(token: str) -> bool:
    stripped = token[:-2] if token[-2:].lower() in ("st", "nd", "rd", "th") else token
    if not stripped.isdigit():
        return False
    return 1 <= int(stripped) <= 31


def _is_year(token: str) -> bool:
    return len(token) == 4 and token.isdigit()


def _month_may(tokens: list[str], i: int) -> bool:
    if tokens[i] != "May":
        return False
    prev = tokens[i - 1] if i > 0 else ""
    nxt = tokens[i + 1] if i + 1 < len(tokens) else ""
    for neighbor in (prev, nxt):
        if neighbor and (_is_year(neighbor) or _is_day_number(neighbor)):
            return True
    if prev.lower() in ("in", "of") and not _verb_candidate_follows(tokens, i):
        return True
    return False


def _verb_candidate_follows(tokens: list[str], i: int) -> bool:
    # A modal is followed by a base-form verb or adverb; after the month
    # reading the next word tends to be punctuation, a number, or a
    # capitalized proper noun.
    if i + 1 >= len(tokens):
        return False
    nxt = tokens[i + 1]
    return nxt.isalpha() and nxt == nxt.lower()


def detect_modals(tokens: list[str]) -> list[ModalTarget]:
    """All modal targets in a tokenized sentence, in position order."""
    targets: list[ModalTarget] = []
    for i, token in enumerate(tokens):
        folded = token.lower()
        if folded in _CONTRACTIONS:
            targets.append(ModalTarget(i, _CONTRACTIONS[folded], token, True))
            continue
        if folded not in MODALS:
            continue
        if folded in ("can", "must") and i > 0 and tokens[i - 1].lower() in _NOUN_CONTEXT:
            continue
        if folded == "may" and _month_may(tokens, i):
            continue
        negated = i + 1 < len(tokens) and tokens[i + 1].lower() in _NEGATORS
        targets.append(ModalTarget(i, folded, token, negated))
    return targets


def detect_corpus(corpus: Corpus) -> Corpus:
    """Copy of the corpus with detected targets as unlabeled instances.

    Existing instances are replaced; ids are `<doc_id>.<sent_id>.<index>`.
    """
    docs = []
    for doc in corpus.documents:
        sents = []
        for sent in doc.sentences:
            instances = [
                ModalInstance(
                    inst_id=f"{doc.doc_id}.{sent.sent_id}.{t.token_index}",
                    token_index=t.token_index,
                    modal=t.modal,
                    surface=t.surface,
                    negated=t.negated,
                )
                for t in detect_modals(sent.tokens)
            ]
            sents.append(Sentence(sent_id=sent.sent_id, tokens=sent.tokens, instances=instances))
        docs.append(
            Document(
                doc_id=doc.doc_id,
                domain=doc.domain,
                subset=doc.subset,
                sentences=sents,
                meta=dict(doc.meta),
            )
        )
    return Corpus(documents=docs, dataset_id=corpus.dataset_id)
