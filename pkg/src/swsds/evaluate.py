"""Scoring for WSD predictions and for threshold-based similarity matching.

WSD metrics: accuracy, micro-F1 over all items, macro-F1 as the unweighted
mean of per-target-lemma F1, and a per-POS breakdown. Similarity: accuracy
on a held-out test split with the decision threshold swept on a dev split.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .embeddings import EmbeddingStore
from .kb import KnowledgeBase, PolysemyDictionary
from .scoring import Scorer, ScorerError
from .sense_vectors import embed_senses
from .wmd import Document, wmd
from .wsd import WsdConfig, WsdError, WsdInstance, annotate_corpus, disambiguate

logger = logging.getLogger(__name__)


class DegenerateSplitError(Exception):
    """The dev split does not contain both classes."""


@dataclass(frozen=True)
class WsdGoldItem:
    instance: WsdInstance
    gold_sense_ids: tuple[str, ...]

    def __post_init__(self):
        ids = tuple(self.gold_sense_ids)
        if not ids:
            raise ValueError("at least one gold sense id required")
        object.__setattr__(self, "gold_sense_ids", ids)

    @property
    def gold_sense_id(self) -> str:
        return self.gold_sense_ids[0]


@dataclass(frozen=True)
class WsdMetrics:
    micro_f1: float
    macro_f1: float
    accuracy: float
    per_pos: dict[str, tuple[float, float]]
    n_items: int

    def to_obj(self) -> dict:
        return {
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "per_pos": {pos: list(pair) for pos, pair in sorted(self.per_pos.items())},
            "n_items": self.n_items,
        }


@dataclass(frozen=True)
class SimilarityMetrics:
    accuracy: float
    threshold: float
    split_sizes: tuple[int, int]

    def to_obj(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "threshold": self.threshold,
            "split_sizes": list(self.split_sizes),
        }


def _f1_from_counts(right: int, predicted: int, gold: int) -> float:
    if predicted == 0 or gold == 0:
        return 0.0
    precision = right / predicted
    recall = right / gold
    if precision == recall:
        return precision
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _metrics_over(items: list[tuple[WsdGoldItem, Optional[str]]]) -> tuple[float, float, float]:
    """(micro_f1, macro_f1, accuracy) over (gold item, prediction) pairs.

    Every item counts as exactly one prediction; a failed prediction (None)
    is a wrong one, so erroring can never raise a metric.
    """
    total = len(items)
    right = sum(1 for item, pred in items if pred in item.gold_sense_ids)
    accuracy = right / total
    micro = _f1_from_counts(right, total, total)

    by_lemma: dict[str, list[tuple[WsdGoldItem, Optional[str]]]] = {}
    for item, pred in items:
        by_lemma.setdefault(item.instance.target_word, []).append((item, pred))
    per_lemma_f1 = []
    for lemma_items in by_lemma.values():
        lr = sum(1 for item, pred in lemma_items if pred in item.gold_sense_ids)
        per_lemma_f1.append(_f1_from_counts(lr, len(lemma_items), len(lemma_items)))
    macro = sum(per_lemma_f1) / len(per_lemma_f1)
    return micro, macro, accuracy


def eval_wsd(
    gold: Sequence[WsdGoldItem],
    kb: KnowledgeBase,
    scorer: Scorer,
    config: WsdConfig = WsdConfig(),
) -> WsdMetrics:
    """Disambiguate every gold item and score the predictions.

    Item-level engine errors are logged and counted as wrong predictions.
    """
    if not gold:
        raise ValueError("gold items must be non-empty")
    predictions: list[tuple[WsdGoldItem, Optional[str]]] = []
    for item in gold:
        try:
            result = disambiguate(item.instance, kb, scorer, config)
            predictions.append((item, result.chosen))
        except (WsdError, ScorerError) as exc:
            logger.warning(
                "item failed (%s/%s): %s",
                item.instance.target_word,
                item.instance.target_pos,
                exc,
            )
            predictions.append((item, None))

    micro, macro, accuracy = _metrics_over(predictions)
    per_pos: dict[str, tuple[float, float]] = {}
    for pos in sorted({item.instance.target_pos for item, _ in predictions}):
        subset = [p for p in predictions if p[0].instance.target_pos == pos]
        p_micro, p_macro, _ = _metrics_over(subset)
        per_pos[pos] = (p_micro, p_macro)
    return WsdMetrics(
        micro_f1=micro,
        macro_f1=macro,
        accuracy=accuracy,
        per_pos=per_pos,
        n_items=len(predictions),
    )


def load_gold(path) -> list[WsdGoldItem]:
    """Gold WSD JSONL: instance fields plus gold_sense_id (or the
    multi-gold variant gold_sense_ids)."""
    from .wsd import instance_from_obj

    items: list[WsdGoldItem] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "gold_sense_ids" in obj:
                gold_ids = tuple(obj["gold_sense_ids"])
            else:
                gold_ids = (obj["gold_sense_id"],)
            items.append(
                WsdGoldItem(instance=instance_from_obj(obj), gold_sense_ids=gold_ids)
            )
    return items


@dataclass(frozen=True)
class PairRecord:
    """One sentence pair from the pair JSONL file. POS tags are optional
    and only needed when the pair feeds the sense-annotation arm."""

    a: tuple[str, ...]
    b: tuple[str, ...]
    label: Optional[int] = None
    id: Optional[str] = None
    a_pos: Optional[tuple[str, ...]] = None
    b_pos: Optional[tuple[str, ...]] = None


def load_pairs(path) -> list[PairRecord]:
    pairs: list[PairRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            label = obj.get("label")
            pairs.append(
                PairRecord(
                    a=tuple(obj["a"]),
                    b=tuple(obj["b"]),
                    label=int(label) if label is not None else None,
                    id=str(obj["id"]) if "id" in obj else str(lineno),
                    a_pos=tuple(obj["a_pos"]) if "a_pos" in obj else None,
                    b_pos=tuple(obj["b_pos"]) if "b_pos" in obj else None,
                )
            )
    return pairs


def split_pairs(
    n: int, split_ratio: float, seed: int
) -> tuple[list[int], list[int]]:
    """Seeded deterministic dev/test index split."""
    if not (0.0 < split_ratio < 1.0):
        raise ValueError("split_ratio must be in (0, 1)")
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    n_dev = max(1, round(split_ratio * n))
    if n_dev >= n:
        raise ValueError("split leaves no test pairs")
    return indices[:n_dev], indices[n_dev:]


def sweep_threshold(distances: Sequence[float], labels: Sequence[int]) -> float:
    """Dev threshold: the candidate (midpoints of consecutive distinct
    sorted distances) maximizing dev accuracy; ties pick the smallest."""
    values = sorted(set(distances))
    if len(values) == 1:
        return values[0]
    candidates = [(lo + hi) / 2.0 for lo, hi in zip(values, values[1:])]
    best_t = candidates[0]
    best_acc = -1.0
    for t in candidates:
        acc = sum(1 for d, y in zip(distances, labels) if (d <= t) == bool(y))
        if acc > best_acc:
            best_acc = acc
            best_t = t
    return best_t


def eval_similarity(
    pairs: Sequence[PairRecord],
    store: EmbeddingStore,
    split_ratio: float = 0.2,
    seed: int = 0,
) -> SimilarityMetrics:
    """Accuracy of wmd-thresholded matching, threshold tuned on the dev split."""
    labeled = [p for p in pairs]
    if any(p.label is None for p in labeled):
        raise ValueError("all pairs must carry binary labels")
    dev_idx, test_idx = split_pairs(len(labeled), split_ratio, seed)
    dev_labels = [labeled[i].label for i in dev_idx]
    if len(set(dev_labels)) < 2:
        raise DegenerateSplitError("dev split holds a single class")

    distances = [
        wmd(Document(p.a), Document(p.b), store)[0] for p in labeled
    ]
    threshold = sweep_threshold(
        [distances[i] for i in dev_idx], [labeled[i].label for i in dev_idx]
    )
    correct = sum(
        1
        for i in test_idx
        if (distances[i] <= threshold) == bool(labeled[i].label)
    )
    return SimilarityMetrics(
        accuracy=correct / len(test_idx),
        threshold=threshold,
        split_sizes=(len(dev_idx), len(test_idx)),
    )


@dataclass(frozen=True)
class PipelineComparison:
    baseline: SimilarityMetrics
    swsds: SimilarityMetrics
    delta: float
    annotation_failures: tuple[str, ...] = field(default_factory=tuple)

    def to_obj(self) -> dict:
        return {
            "baseline": self.baseline.to_obj(),
            "swsds": self.swsds.to_obj(),
            "delta": self.delta,
            "annotation_failures": list(self.annotation_failures),
        }


def annotate_pairs(
    pairs: Sequence[PairRecord],
    kb: KnowledgeBase,
    polysemy: PolysemyDictionary,
    scorer: Scorer,
    config: WsdConfig = WsdConfig(),
) -> tuple[list[PairRecord], list[str]]:
    """Sense-annotate both sides of every pair that carries POS tags."""
    annotated: list[PairRecord] = []
    failures: list[str] = []
    for pair in pairs:
        sides: dict[str, tuple[str, ...]] = {"a": pair.a, "b": pair.b}
        for side, tags in (("a", pair.a_pos), ("b", pair.b_pos)):
            if tags is None:
                continue
            [sentence] = annotate_corpus(
                [(sides[side], tags)], kb, polysemy, scorer, config
            )
            failures.extend(f"pair {pair.id} side {side}: {e}" for e in sentence.errors)
            sides[side] = tuple(sentence.tokens)
        annotated.append(
            PairRecord(
                a=sides["a"],
                b=sides["b"],
                label=pair.label,
                id=pair.id,
                a_pos=pair.a_pos,
                b_pos=pair.b_pos,
            )
        )
    return annotated, failures


def compare_pipelines(
    pairs: Sequence[PairRecord],
    base_store: EmbeddingStore,
    kb: KnowledgeBase,
    polysemy: PolysemyDictionary,
    scorer: Scorer,
    config: WsdConfig = WsdConfig(),
    k_synonyms: int = 10,
    split_ratio: float = 0.2,
    seed: int = 0,
) -> PipelineComparison:
    """Baseline (plain lemma lookup) vs sense-annotated pipeline, same split.

    The sense arm annotates the pairs, builds sense vectors into a copy of
    the base store, and is evaluated with the identical seed and ratio.
    """
    baseline = eval_similarity(pairs, base_store, split_ratio, seed)

    annotated, failures = annotate_pairs(pairs, kb, polysemy, scorer, config)
    sense_store = EmbeddingStore(base_store.dim)
    for key, vec in base_store.table.items():
        sense_store.insert(key, vec)
    corpus = [list(p.a) + list(p.b) for p in annotated]
    _, embed_failures = embed_senses(corpus, kb, sense_store, k=k_synonyms)
    failures.extend(f"embed {key}: {reason}" for key, reason in embed_failures.items())

    swsds_metrics = eval_similarity(annotated, sense_store, split_ratio, seed)
    return PipelineComparison(
        baseline=baseline,
        swsds=swsds_metrics,
        delta=swsds_metrics.accuracy - baseline.accuracy,
        annotation_failures=tuple(failures),
    )
