"""Sentence encoders with word-to-subtoken alignment.

An encoder turns a pre-tokenized sentence into a sentence-level vector (the
aggregate at the sequence start), one contextual vector per kept subtoken,
and a span per input word mapping it into the subtoken sequence. Words whose
subtokens were all truncated away get a None span.

StubEncoder is a deterministic hash-based encoder for tests and pipeline
dry-runs; it deliberately splits words into several subtokens so that
first-subtoken selection is exercised. Transformer models are loaded
lazily through load_encoder("hf:<model-name>").
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class EncodedSentence:
    sentence_vec: np.ndarray
    token_vecs: np.ndarray  # (n_kept_subtokens, dim)
    word_spans: list[Optional[tuple[int, int]]]
    truncated: bool


class StubEncoder:
    """Deterministic stand-in encoder.

    Subtoken vectors carry their alignment in the first two components:
    component 0 is the word index, component 1 the subtoken index within the
    word; the rest is a stable hash of the subtoken text. The sentence
    vector marks component 0 with -1 and hashes the whole sentence.
    """

    CHUNK = 4

    def __init__(self, dim: int = 8, max_len: int = 512):
        if dim < 3:
            raise ValueError("stub encoder needs dim >= 3")
        self.dim = dim
        self.max_len = max_len

    def _hash_tail(self, text: str, n: int) -> np.ndarray:
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        raw = np.frombuffer((digest * (n * 4 // len(digest) + 1))[: n * 4], dtype="<u4")
        return (raw.astype(np.float64) / 2**32).astype(np.float32)

    def subtokenize(self, word: str) -> list[str]:
        return [word[i : i + self.CHUNK] for i in range(0, len(word), self.CHUNK)] or [word]

    def encode(self, words: list[str]) -> EncodedSentence:
        vecs: list[np.ndarray] = []
        spans: list[Optional[tuple[int, int]]] = []
        truncated = False
        for wi, word in enumerate(words):
            subs = self.subtokenize(word)
            start = len(vecs)
            kept = 0
            for si, sub in enumerate(subs):
                if len(vecs) >= self.max_len:
                    truncated = True
                    break
                vec = np.empty(self.dim, dtype=np.float32)
                vec[0] = wi
                vec[1] = si
                vec[2:] = self._hash_tail(sub, self.dim - 2)
                vecs.append(vec)
                kept += 1
            spans.append((start, start + kept) if kept else None)
        sentence_vec = np.empty(self.dim, dtype=np.float32)
        sentence_vec[0] = -1.0
        sentence_vec[1] = float(len(words))
        sentence_vec[2:] = self._hash_tail("\x1f".join(words), self.dim - 2)
        token_vecs = np.stack(vecs) if vecs else np.zeros((0, self.dim), dtype=np.float32)
        return EncodedSentence(sentence_vec, token_vecs, spans, truncated)


class HFEncoder:
    """Frozen transformer encoder over the 🤗 transformers stack."""

    def __init__(self, model_name: str, max_len: int = 512, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ImportError(
                "transformer export requires the 'hf' extra (pip install mist-exporter[hf])"
            ) from exc
        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_name, use_fast=True)
        self.model = AutoModel.from_pretrained(model_name).to(device).eval()
        self.max_len = max_len
        self.device = device
        self.dim = int(self.model.config.hidden_size)

    def encode(self, words: list[str]) -> EncodedSentence:
        encoding = self.tokenizer(
            words,
            is_split_into_words=True,
            truncation=True,
            max_length=self.max_len,
            return_tensors="pt",
        )
        with self._torch.no_grad():
            hidden = self.model(
                **{k: v.to(self.device) for k, v in encoding.items()}
            ).last_hidden_state[0]
        hidden = hidden.cpu().numpy().astype(np.float32)
        word_ids = encoding.word_ids(0)
        spans: list[Optional[tuple[int, int]]] = [None] * len(words)
        for pos, wid in enumerate(word_ids):
            if wid is None:
                continue
            if spans[wid] is None:
                spans[wid] = (pos, pos + 1)
            else:
                spans[wid] = (spans[wid][0], pos + 1)
        n_subtokens = sum(
            len(self.tokenizer.tokenize(word)) or 1 for word in words
        )
        kept = sum(1 for wid in word_ids if wid is not None)
        return EncodedSentence(
            sentence_vec=hidden[0],
            token_vecs=hidden,
            word_spans=spans,
            truncated=kept < n_subtokens,
        )


def load_encoder(name: str, max_len: int = 512, dim: int = 8, device: str = "cpu"):
    """"stub" or "hf:<model-name>" (a bare name is treated as a model name)."""
    if name == "stub":
        return StubEncoder(dim=dim, max_len=max_len)
    model_name = name.removeprefix("hf:")
    return HFEncoder(model_name, max_len=max_len, device=device)
