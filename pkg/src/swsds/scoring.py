"""Masked-LM scoring: the scorer contract, a hermetic stub, an HTTP client,
and a persistent score cache.

All scorers answer the same question: given a token sequence with one mask,
how plausible is each candidate lemma at the masked position? Scores are
probabilities in [0, 1] and deterministic for fixed scorer state and inputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from dataclasses import dataclass
from typing import Mapping, Optional, Protocol, Sequence

import requests

MASK_TOKEN = "<mask>"

logger = logging.getLogger(__name__)


class ScorerError(Exception):
    """Base class for scoring failures. ``retryable`` separates transient
    transport conditions from contract violations."""

    retryable = False


class TransportError(ScorerError):
    retryable = True


class ProtocolError(ScorerError):
    retryable = False


@dataclass(frozen=True)
class MaskedQuery:
    """A token sequence with exactly one mask token at ``mask_index``."""

    tokens: tuple[str, ...]
    mask_index: int

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not (0 <= self.mask_index < len(self.tokens)):
            raise ValueError("mask_index out of range")
        if self.tokens[self.mask_index] != MASK_TOKEN:
            raise ValueError(f"tokens[mask_index] must be {MASK_TOKEN!r}")
        if self.tokens.count(MASK_TOKEN) != 1:
            raise ValueError("exactly one mask token required")

    def canonical(self) -> str:
        """Stable serialization used for hashing and cache keys."""
        return json.dumps(
            {"tokens": list(self.tokens), "mask_index": self.mask_index},
            ensure_ascii=False,
            sort_keys=True,
            separators=(",", ":"),
        )


@dataclass(frozen=True)
class CandidateScores:
    scores: Mapping[str, float]

    def __post_init__(self):
        for cand, value in self.scores.items():
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"score for {cand!r} outside [0,1]: {value}")

    def __getitem__(self, candidate: str) -> float:
        return self.scores[candidate]


@dataclass(frozen=True)
class ScorerConfig:
    endpoint: Optional[str] = None
    cache_path: Optional[str] = None
    timeout: float = 10.0
    stub_seed: int = 0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")


class Scorer(Protocol):
    def score_candidates(
        self, query: MaskedQuery, candidates: Sequence[str]
    ) -> CandidateScores: ...

    def vocabulary(self) -> Optional[frozenset[str]]:
        """Known scorable lemmas, or None when any lemma is accepted."""
        ...


def _check_candidates(candidates: Sequence[str]) -> list[str]:
    cands = list(candidates)
    if not cands:
        raise ValueError("candidates must be non-empty")
    if len(set(cands)) != len(cands):
        raise ValueError("candidates must be deduplicated")
    return cands


def stub_score(
    table: Mapping[str, float],
    seed: int,
    query: MaskedQuery,
    candidates: Sequence[str],
) -> CandidateScores:
    """Deterministic test-double scoring.

    Candidates present in ``table`` get the table value verbatim; the rest
    get a stable value in (0, 1) derived from a 64-bit SHA-256 prefix of
    (seed, canonical query, candidate).
    """
    cands = _check_candidates(candidates)
    canon = query.canonical()
    scores: dict[str, float] = {}
    for cand in cands:
        if cand in table:
            scores[cand] = float(table[cand])
        else:
            payload = f"{seed}|{canon}|{cand}".encode("utf-8")
            h = int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")
            scores[cand] = (h + 0.5) / 2.0**64
    return CandidateScores(scores=scores)


class StubScorer:
    """In-process scorer backed by a unigram table plus a seeded hash fallback."""

    def __init__(self, table: Optional[Mapping[str, float]] = None, seed: int = 0):
        self.table = dict(table or {})
        self.seed = seed

    def score_candidates(self, query, candidates) -> CandidateScores:
        return stub_score(self.table, self.seed, query, candidates)

    def vocabulary(self) -> Optional[frozenset[str]]:
        return None


class CountingScorer:
    """Wraps a scorer and counts invocations; used to verify call budgets."""

    def __init__(self, inner: Scorer):
        self.inner = inner
        self.calls = 0

    def score_candidates(self, query, candidates) -> CandidateScores:
        self.calls += 1
        return self.inner.score_candidates(query, candidates)

    def vocabulary(self) -> Optional[frozenset[str]]:
        return self.inner.vocabulary()


class RemoteScorer:
    """Client for the HTTP scoring protocol.

    POST {endpoint}/v1/score with ``{"tokens": [...], "mask_index": i,
    "candidates": [...]}``; expects ``{"scores": {...}, "model": "..."}``.
    """

    def __init__(self, endpoint: str, timeout: float = 10.0, session=None):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._session = session or requests.Session()
        self.model_id: Optional[str] = None

    def score_candidates(self, query, candidates) -> CandidateScores:
        cands = _check_candidates(candidates)
        body = {
            "tokens": list(query.tokens),
            "mask_index": query.mask_index,
            "candidates": cands,
        }
        try:
            resp = self._session.post(
                f"{self.endpoint}/v1/score", json=body, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"scoring service unreachable: {exc}") from exc
        if resp.status_code == 503:
            raise TransportError("scoring service still loading (503)")
        if resp.status_code != 200:
            raise ProtocolError(f"unexpected status {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise ProtocolError("response is not valid JSON") from exc
        scores = payload.get("scores")
        if not isinstance(scores, dict):
            raise ProtocolError("response missing 'scores' object")
        missing = [c for c in cands if c not in scores]
        if missing:
            raise ProtocolError(f"response missing candidates: {missing}")
        self.model_id = payload.get("model")
        try:
            return CandidateScores(
                scores={c: float(scores[c]) for c in cands}
            )
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed scores: {exc}") from exc

    def vocabulary(self) -> Optional[frozenset[str]]:
        return None


def cache_key(query: MaskedQuery, candidate: str) -> str:
    digest = hashlib.sha256(query.canonical().encode("utf-8")).hexdigest()
    return f"{digest}:{candidate}"


class CachedScorer:
    """Persistent JSONL score cache around any scorer.

    Cache lines are ``{"k": "<hex digest>:<candidate>", "v": <score>}``.
    Corrupt lines and cache I/O failures are logged and ignored; the inner
    scorer is always the fallback, so caching never changes values.
    """

    def __init__(self, inner: Scorer, cache_path):
        self.inner = inner
        self.cache_path = str(cache_path)
        self._entries: dict[str, float] = {}
        self._lock = threading.Lock()
        self._load()

    def _load(self) -> None:
        try:
            with open(self.cache_path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        obj = json.loads(line)
                        key, value = obj["k"], float(obj["v"])
                    except (ValueError, KeyError, TypeError):
                        logger.warning(
                            "skipping corrupt cache line %d in %s", lineno, self.cache_path
                        )
                        continue
                    self._entries[key] = value
        except FileNotFoundError:
            pass
        except OSError as exc:
            logger.warning("cannot read cache %s: %s", self.cache_path, exc)

    def _append(self, items: list[tuple[str, float]]) -> None:
        try:
            with self._lock, open(self.cache_path, "a", encoding="utf-8") as fh:
                for key, value in items:
                    fh.write(json.dumps({"k": key, "v": value}) + "\n")
        except OSError as exc:
            logger.warning("cannot write cache %s: %s", self.cache_path, exc)

    def score_candidates(self, query, candidates) -> CandidateScores:
        cands = _check_candidates(candidates)
        keys = {c: cache_key(query, c) for c in cands}
        hits = {c: self._entries[k] for c, k in keys.items() if k in self._entries}
        misses = [c for c in cands if c not in hits]
        if misses:
            fresh = self.inner.score_candidates(query, misses)
            new_items = []
            for cand in misses:
                value = fresh[cand]
                hits[cand] = value
                self._entries[keys[cand]] = value
                new_items.append((keys[cand], value))
            self._append(new_items)
        return CandidateScores(scores={c: hits[c] for c in cands})

    def vocabulary(self) -> Optional[frozenset[str]]:
        return self.inner.vocabulary()


def cached(scorer: Scorer, cache_path) -> CachedScorer:
    """Wrap ``scorer`` with the persistent cache at ``cache_path``."""
    return CachedScorer(scorer, cache_path)
