"""Sememe knowledge base: senses, annotations, synonym sets, polysemy dictionary.

The KB interchange format is JSONL, one sense per line:

    {"sense_id": "244397", "lemma": "苹果", "pos": "n", "gloss": "fruit",
     "annotation": {"sememe": "fruit|水果", "children": []}}

where ``annotation`` is a recursive node ``{sememe, relation?, children[]}``
and ``gloss`` is optional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

POS_TAGS = frozenset({"n", "v", "a", "p", "d", "c", "u", "x"})


class KbError(Exception):
    """Base class for knowledge base errors."""


class KbParseError(KbError):
    """Malformed KB file. Carries the offending line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateSenseIdError(KbError):
    def __init__(self, sense_id: str, line: Optional[int] = None):
        self.sense_id = sense_id
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate sense_id {sense_id!r}{where}")


@dataclass(frozen=True)
class Sememe:
    """A minimum semantic unit. The id doubles as a bilingual gloss string."""

    id: str
    label: str


@dataclass(frozen=True)
class AnnotationNode:
    sememe: str
    relation: Optional[str] = None
    children: tuple["AnnotationNode", ...] = ()


@dataclass(frozen=True)
class SememeAnnotation:
    """An ordered sememe tree plus its canonical serialization.

    Two annotations are equal iff their canonical keys are byte-equal; the
    key is invariant under permutation of child order in the source tree.
    """

    tree: AnnotationNode
    canonical_key: str = field(compare=False, default="")

    def __post_init__(self):
        object.__setattr__(self, "canonical_key", _canonical_key(self.tree))

    def __eq__(self, other):
        if not isinstance(other, SememeAnnotation):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self):
        return hash(self.canonical_key)

    def size(self) -> int:
        """Number of sememe nodes in the tree."""
        return _count_nodes(self.tree)

    def sememe_ids(self) -> set[str]:
        ids: set[str] = set()
        _collect_ids(self.tree, ids)
        return ids


def _canonical_key(node: AnnotationNode) -> str:
    # Pre-order; children sorted by (relation, sememe id), with the child's
    # own canonical form as a final tie-break so the key is total.
    parts = sorted(
        (child.relation or "", child.sememe, _canonical_key(child))
        for child in node.children
    )
    if not parts:
        return node.sememe
    inner = ",".join(f"{rel}={key}" for rel, _, key in parts)
    return f"{node.sememe}({inner})"


def _count_nodes(node: AnnotationNode) -> int:
    return 1 + sum(_count_nodes(c) for c in node.children)


def _collect_ids(node: AnnotationNode, out: set[str]) -> None:
    out.add(node.sememe)
    for child in node.children:
        _collect_ids(child, out)


@dataclass(frozen=True)
class Sense:
    sense_id: str
    lemma: str
    pos: str
    annotation: SememeAnnotation
    gloss: Optional[str] = None


class KnowledgeBase:
    """Immutable after construction; indices are built once at load time."""

    def __init__(self, senses: Iterable[Sense]):
        self.senses: list[Sense] = list(senses)
        self.by_lemma: dict[str, list[Sense]] = {}
        self.by_annotation: dict[str, list[Sense]] = {}
        seen: dict[str, Sense] = {}
        for sense in self.senses:
            if sense.sense_id in seen:
                raise DuplicateSenseIdError(sense.sense_id)
            seen[sense.sense_id] = sense
            self.by_lemma.setdefault(sense.lemma, []).append(sense)
            self.by_annotation.setdefault(sense.annotation.canonical_key, []).append(sense)
        self._by_id = seen

    def __len__(self) -> int:
        return len(self.senses)

    def get_sense(self, sense_id: str) -> Optional[Sense]:
        return self._by_id.get(sense_id)

    def sememes(self) -> dict[str, Sememe]:
        """All distinct sememes referenced by any annotation."""
        out: dict[str, Sememe] = {}
        for sense in self.senses:
            for sid in sense.annotation.sememe_ids():
                out.setdefault(sid, Sememe(id=sid, label=sid))
        return out


@dataclass
class PolysemyDictionary:
    """(lemma, pos) -> sense count, restricted to counts >= 2."""

    entries: dict[tuple[str, str], int]

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def to_tsv(self) -> str:
        rows = sorted(self.entries.items())
        return "".join(f"{lemma}\t{pos}\t{count}\n" for (lemma, pos), count in rows)

    @classmethod
    def from_tsv(cls, text: str) -> "PolysemyDictionary":
        entries: dict[tuple[str, str], int] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise KbParseError("expected lemma<TAB>pos<TAB>count", line=lineno)
            lemma, pos, count = parts
            entries[(lemma, pos)] = int(count)
        return cls(entries=entries)


def _parse_annotation(obj, line: int) -> AnnotationNode:
    if not isinstance(obj, dict) or "sememe" not in obj:
        raise KbParseError("annotation node must be an object with a 'sememe' field", line=line)
    sememe = obj["sememe"]
    if not isinstance(sememe, str) or not sememe:
        raise KbParseError("sememe id must be a non-empty string", line=line)
    relation = obj.get("relation")
    if relation is not None and not isinstance(relation, str):
        raise KbParseError("relation must be a string when present", line=line)
    children = tuple(
        _parse_annotation(child, line) for child in obj.get("children", [])
    )
    return AnnotationNode(sememe=sememe, relation=relation, children=children)


def _parse_sense_line(line: str, lineno: int) -> Sense:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise KbParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
    if not isinstance(obj, dict):
        raise KbParseError("each line must hold a JSON object", line=lineno)
    for key in ("sense_id", "lemma", "pos", "annotation"):
        if key not in obj:
            raise KbParseError(f"missing field {key!r}", line=lineno)
    sense_id = obj["sense_id"]
    lemma = obj["lemma"]
    pos = obj["pos"]
    if not isinstance(sense_id, str) or not sense_id:
        raise KbParseError("sense_id must be a non-empty string", line=lineno)
    if not isinstance(lemma, str) or not lemma:
        raise KbParseError("lemma must be a non-empty string", line=lineno)
    if pos not in POS_TAGS:
        raise KbParseError(f"unknown POS tag {pos!r}", line=lineno)
    tree = _parse_annotation(obj["annotation"], lineno)
    gloss = obj.get("gloss")
    return Sense(
        sense_id=sense_id,
        lemma=lemma,
        pos=pos,
        annotation=SememeAnnotation(tree=tree),
        gloss=gloss,
    )


def load_kb(path) -> KnowledgeBase:
    """Load a KB from the JSONL format, building both indices.

    Raises KbParseError with the line number on malformed input and
    DuplicateSenseIdError when a sense id occurs twice.
    """
    senses: list[Sense] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            sense = _parse_sense_line(line, lineno)
            if sense.sense_id in seen_ids:
                raise DuplicateSenseIdError(sense.sense_id, line=lineno)
            seen_ids.add(sense.sense_id)
            senses.append(sense)
    return KnowledgeBase(senses)


def _annotation_to_obj(node: AnnotationNode) -> dict:
    obj: dict = {"sememe": node.sememe}
    if node.relation is not None:
        obj["relation"] = node.relation
    obj["children"] = [_annotation_to_obj(c) for c in node.children]
    return obj


def save_kb(kb: KnowledgeBase, path) -> None:
    """Write the KB back out in file order; load(save(kb)) rebuilds identical indices."""
    with open(path, "w", encoding="utf-8") as fh:
        for sense in kb.senses:
            obj = {
                "sense_id": sense.sense_id,
                "lemma": sense.lemma,
                "pos": sense.pos,
            }
            if sense.gloss is not None:
                obj["gloss"] = sense.gloss
            obj["annotation"] = _annotation_to_obj(sense.annotation.tree)
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def senses_of(kb: KnowledgeBase, lemma: str, pos: Optional[str] = None) -> list[Sense]:
    """All senses of a lemma (optionally POS-filtered), sorted by sense_id."""
    matches = [
        s for s in kb.by_lemma.get(lemma, ())
        if pos is None or s.pos == pos
    ]
    return sorted(matches, key=lambda s: s.sense_id)


def synonyms_of(kb: KnowledgeBase, sense: Sense, k: int) -> list[str]:
    """Lemmas of other senses sharing the annotation, in KB file order.

    Deduplicated, the sense's own lemma excluded, at most k entries.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    out: list[str] = []
    seen: set[str] = {sense.lemma}
    for other in kb.by_annotation.get(sense.annotation.canonical_key, ()):
        if other.lemma in seen:
            continue
        seen.add(other.lemma)
        out.append(other.lemma)
        if len(out) == k:
            break
    return out


def build_polysemy_dict(kb: KnowledgeBase) -> PolysemyDictionary:
    """(lemma, pos) pairs with at least two senses, mapped to their sense count."""
    counts: dict[tuple[str, str], int] = {}
    for sense in kb.senses:
        key = (sense.lemma, sense.pos)
        counts[key] = counts.get(key, 0) + 1
    return PolysemyDictionary(
        entries={key: n for key, n in counts.items() if n >= 2}
    )
