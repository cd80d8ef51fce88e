"""Sense vectors as averages of synonym word vectors.

A sense annotated in a corpus as ``lemma=sense_id`` gets the componentwise
mean of the vectors of its first k annotation-sharing lemmas that exist in
the store; the result is registered under the sense key.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .embeddings import EmbeddingStore
from .kb import KnowledgeBase, Sense, synonyms_of


class NoSynonymVectorError(Exception):
    """None of the sense's synonyms has a vector in the store."""

    def __init__(self, sense_key: str):
        self.sense_key = sense_key
        super().__init__(f"no synonym of {sense_key!r} has a stored vector")


@dataclass(frozen=True)
class SenseVectorReport:
    sense_key: str
    synonyms_requested: int
    synonyms_with_vectors: int
    used_lemmas: tuple[str, ...]

    def to_obj(self) -> dict:
        return {
            "sense_key": self.sense_key,
            "synonyms_requested": self.synonyms_requested,
            "synonyms_with_vectors": self.synonyms_with_vectors,
            "used_lemmas": list(self.used_lemmas),
        }


def sense_key_of(sense: Sense) -> str:
    return f"{sense.lemma}={sense.sense_id}"


def sense_vector(
    sense: Sense,
    kb: KnowledgeBase,
    store: EmbeddingStore,
    k: int = 10,
    strict_tenth: bool = False,
) -> tuple[np.ndarray, SenseVectorReport]:
    """Mean vector over the first k in-store synonyms, in KB file order.

    The divisor is the count of synonyms actually used. With
    ``strict_tenth`` the sum is divided by 10 regardless of that count,
    replicating the fixed-denominator formula; both agree when exactly 10
    synonym vectors are found.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    key = sense_key_of(sense)
    used: list[str] = []
    vectors: list[np.ndarray] = []
    for lemma in synonyms_of(kb, sense, k=len(kb) + 1):
        vec = store.get(lemma)
        if vec is None:
            continue
        used.append(lemma)
        vectors.append(vec)
        if len(used) == k:
            break
    if not vectors:
        raise NoSynonymVectorError(key)
    total = np.sum(vectors, axis=0)
    result = total / 10.0 if strict_tenth else total / len(vectors)
    report = SenseVectorReport(
        sense_key=key,
        synonyms_requested=k,
        synonyms_with_vectors=len(used),
        used_lemmas=tuple(used),
    )
    return result, report


def sense_keys_in(tokens: Iterable[str]) -> list[str]:
    """Distinct ``lemma=sense_id`` tokens, first-seen order."""
    seen: list[str] = []
    have: set[str] = set()
    for token in tokens:
        if "=" in token and token not in have:
            have.add(token)
            seen.append(token)
    return seen


def embed_senses(
    annotated_corpus: Iterable[Iterable[str]],
    kb: KnowledgeBase,
    store: EmbeddingStore,
    k: int = 10,
    strict_tenth: bool = False,
) -> tuple[list[SenseVectorReport], dict[str, str]]:
    """Register a vector for every new sense key appearing in the corpus.

    Existing keys are left untouched, so re-running is a no-op. Sense keys
    whose synonyms have no stored vectors are skipped and reported; their
    tokens fall back to the base lemma vector downstream. Returns reports
    sorted by sense key plus a map of skipped keys to the failure reason.
    """
    pending: dict[str, Optional[Sense]] = {}
    for tokens in annotated_corpus:
        for key in sense_keys_in(tokens):
            if key in store or key in pending:
                continue
            lemma, _, sense_id = key.partition("=")
            sense = kb.get_sense(sense_id)
            if sense is None or sense.lemma != lemma:
                pending[key] = None
            else:
                pending[key] = sense

    reports: list[SenseVectorReport] = []
    failures: dict[str, str] = {}
    for key in sorted(pending):
        sense = pending[key]
        if sense is None:
            failures[key] = "sense key not found in KB"
            continue
        try:
            vec, report = sense_vector(sense, kb, store, k=k, strict_tenth=strict_tenth)
        except NoSynonymVectorError as exc:
            failures[key] = str(exc)
            continue
        store.insert(key, vec)
        reports.append(report)
    return reports, failures
