"""Sense disambiguation by averaged substitute scores.

For each candidate sense of a polysemous target, the lemmas sharing that
sense's sememe annotation stand in for the sense at the masked target
position; the sense whose substitutes score highest on average wins.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .kb import POS_TAGS, KnowledgeBase, PolysemyDictionary, Sense, senses_of, synonyms_of
from .scoring import MASK_TOKEN, MaskedQuery, Scorer

TARGET_TOKEN = "<target>"

logger = logging.getLogger(__name__)


class WsdError(Exception):
    pass


class UnknownWordError(WsdError):
    """The target word has no senses in the KB for the given POS."""


@dataclass(frozen=True)
class WsdInstance:
    """One disambiguation task: a tokenized context with a target placeholder."""

    context: tuple[str, ...]
    pos_tags: tuple[str, ...]
    target_word: str
    target_position: int
    target_pos: str

    def __post_init__(self):
        object.__setattr__(self, "context", tuple(self.context))
        object.__setattr__(self, "pos_tags", tuple(self.pos_tags))
        if len(self.context) != len(self.pos_tags):
            raise ValueError("context and pos_tags must have equal length")
        if not (0 <= self.target_position < len(self.context)):
            raise ValueError("target_position out of range")
        if self.context[self.target_position] != TARGET_TOKEN:
            raise ValueError(f"context[target_position] must be {TARGET_TOKEN!r}")
        if self.target_pos not in POS_TAGS:
            raise ValueError(f"unknown target POS {self.target_pos!r}")


@dataclass(frozen=True)
class WsdResult:
    chosen: str
    sense_scores: dict[str, Optional[float]]
    substitutes_used: dict[str, list[str]]

    def annotated_token(self, lemma: str) -> str:
        return f"{lemma}={self.chosen}"


@dataclass(frozen=True)
class WsdConfig:
    max_substitutes: int = 10
    fallback: str = "first_sense"  # or "base_word_score"
    mask_token: str = MASK_TOKEN

    def __post_init__(self):
        if self.max_substitutes < 1:
            raise ValueError("max_substitutes must be >= 1")
        if self.fallback not in ("first_sense", "base_word_score"):
            raise ValueError(f"unknown fallback {self.fallback!r}")


def substitutes_for_sense(
    kb: KnowledgeBase,
    sense: Sense,
    vocab_filter: Optional[Callable[[str], bool]] = None,
    max_n: int = 10,
) -> list[str]:
    """Annotation-sharing lemmas that pass the vocabulary filter, KB order,
    truncated to max_n."""
    out: list[str] = []
    for lemma in synonyms_of(kb, sense, k=len(kb) + 1):
        if vocab_filter is not None and not vocab_filter(lemma):
            continue
        out.append(lemma)
        if len(out) == max_n:
            break
    return out


def _masked_query(instance: WsdInstance, mask_token: str) -> MaskedQuery:
    tokens = list(instance.context)
    tokens[instance.target_position] = mask_token
    return MaskedQuery(tokens=tuple(tokens), mask_index=instance.target_position)


def _vocab_filter_from(scorer: Scorer) -> Optional[Callable[[str], bool]]:
    vocab = scorer.vocabulary()
    if vocab is None:
        return None
    return lambda lemma: lemma in vocab


def disambiguate(
    instance: WsdInstance,
    kb: KnowledgeBase,
    scorer: Scorer,
    config: WsdConfig = WsdConfig(),
) -> WsdResult:
    """Pick the sense of the target whose substitutes best fit the context.

    Monosemous targets short-circuit with no scorer calls. Senses without
    in-vocabulary substitutes are excluded from the argmax; when every sense
    is excluded the configured fallback applies. Ties break toward the
    smallest sense_id.
    """
    candidates = senses_of(kb, instance.target_word, instance.target_pos)
    if not candidates:
        raise UnknownWordError(
            f"no senses for {instance.target_word!r}/{instance.target_pos}"
        )
    if len(candidates) == 1:
        only = candidates[0].sense_id
        return WsdResult(chosen=only, sense_scores={only: None}, substitutes_used={})

    vocab_filter = _vocab_filter_from(scorer)
    query = _masked_query(instance, config.mask_token)

    sense_scores: dict[str, Optional[float]] = {}
    substitutes_used: dict[str, list[str]] = {}
    for sense in candidates:  # already sorted by sense_id
        subs = substitutes_for_sense(
            kb, sense, vocab_filter=vocab_filter, max_n=config.max_substitutes
        )
        if not subs:
            sense_scores[sense.sense_id] = None
            continue
        scored = scorer.score_candidates(query, subs)
        substitutes_used[sense.sense_id] = subs
        sense_scores[sense.sense_id] = sum(scored[s] for s in subs) / len(subs)

    scored_ids = [sid for sid, v in sense_scores.items() if v is not None]
    if not scored_ids:
        if config.fallback == "base_word_score":
            scored = scorer.score_candidates(query, [instance.target_word])
            value = scored[instance.target_word]
            for sense in candidates:
                sense_scores[sense.sense_id] = value
                substitutes_used[sense.sense_id] = [instance.target_word]
            scored_ids = [s.sense_id for s in candidates]
        else:
            chosen = candidates[0].sense_id
            return WsdResult(
                chosen=chosen,
                sense_scores=sense_scores,
                substitutes_used=substitutes_used,
            )

    best_score = max(sense_scores[sid] for sid in scored_ids)
    chosen = min(sid for sid in scored_ids if sense_scores[sid] == best_score)
    return WsdResult(
        chosen=chosen, sense_scores=sense_scores, substitutes_used=substitutes_used
    )


def instance_from_obj(obj: dict) -> WsdInstance:
    return WsdInstance(
        context=tuple(obj["context"]),
        pos_tags=tuple(obj["pos_tags"]),
        target_word=obj["target_word"],
        target_position=int(obj["target_position"]),
        target_pos=obj["target_pos"],
    )


def instance_to_obj(instance: WsdInstance) -> dict:
    return {
        "context": list(instance.context),
        "pos_tags": list(instance.pos_tags),
        "target_word": instance.target_word,
        "target_position": instance.target_position,
        "target_pos": instance.target_pos,
    }


def result_to_obj(result: WsdResult, target_word: str = "") -> dict:
    obj = {
        "chosen": result.chosen,
        "sense_scores": dict(result.sense_scores),
        "substitutes_used": {k: list(v) for k, v in result.substitutes_used.items()},
    }
    if target_word:
        obj["target_word"] = target_word
    return obj


@dataclass
class AnnotatedSentence:
    tokens: list[str]
    results: list[WsdResult] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def text(self) -> str:
        return " ".join(self.tokens)


def annotate_corpus(
    sentences: Sequence[tuple[Sequence[str], Sequence[str]]],
    kb: KnowledgeBase,
    polysemy: PolysemyDictionary,
    scorer: Scorer,
    config: WsdConfig = WsdConfig(),
) -> list[AnnotatedSentence]:
    """Rewrite every dictionary-listed polysemous token as ``lemma=sense_id``.

    Per-token failures are collected on the sentence and leave the original
    token in place; output order equals input order.
    """
    out: list[AnnotatedSentence] = []
    for tokens, pos_tags in sentences:
        tokens = list(tokens)
        pos_tags = list(pos_tags)
        if len(tokens) != len(pos_tags):
            raise ValueError("tokens and pos_tags must align per sentence")
        annotated = AnnotatedSentence(tokens=list(tokens))
        for i, (token, pos) in enumerate(zip(tokens, pos_tags)):
            if (token, pos) not in polysemy:
                continue
            context = list(tokens)
            context[i] = TARGET_TOKEN
            try:
                instance = WsdInstance(
                    context=tuple(context),
                    pos_tags=tuple(pos_tags),
                    target_word=token,
                    target_position=i,
                    target_pos=pos,
                )
                result = disambiguate(instance, kb, scorer, config)
            except WsdError as exc:
                annotated.errors.append(f"token {i} ({token!r}): {exc}")
                logger.warning("annotation failed for token %d %r: %s", i, token, exc)
                continue
            annotated.tokens[i] = result.annotated_token(token)
            annotated.results.append(result)
        out.append(annotated)
    return out
