"""FUNSD-style annotation data model, parser, and corpus validator.

Annotation schema: a top-level object with key ``form`` holding an array
of entities; each entity carries ``id`` (int), ``text`` (str), ``label``
(str), ``box`` ([x_min, y_min, x_max, y_max]), ``words`` (array of
{text, box}) and ``linking`` (array of [int, int] id pairs).

All types are immutable after construction; parsing distinct files may
run concurrently with no shared state.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import InvariantViolation, MalformedJson, SchemaViolation


class EntityLabel(Enum):
    QUESTION = "question"
    ANSWER = "answer"
    HEADER = "header"
    OTHER = "other"

    @classmethod
    def parse(cls, name: str) -> "EntityLabel":
        try:
            return cls(name.lower())
        except ValueError:
            raise SchemaViolation(f"unknown entity label {name!r}") from None


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in image pixel coordinates (y grows downward)."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if any(c != c or c in (float("inf"), float("-inf")) for c in coords):
            raise InvariantViolation(f"non-finite box coordinate in {coords}")
        if any(c < 0 for c in coords):
            raise InvariantViolation(f"negative box coordinate in {coords}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise InvariantViolation(f"inverted box {coords}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)

    def is_degenerate(self) -> bool:
        return self.width == 0 or self.height == 0


@dataclass(frozen=True)
class Word:
    # text may be empty: degenerate OCR output is preserved, validator warns
    text: str
    box: BBox


@dataclass(frozen=True)
class Entity:
    id: int
    label: EntityLabel
    box: BBox
    words: tuple[Word, ...]
    links: tuple[tuple[int, int], ...]
    raw_text: str | None = None

    @property
    def text(self) -> str:
        """Entity-level text if present, else the space-join of its words."""
        if self.raw_text is not None:
            return self.raw_text
        return " ".join(w.text for w in self.words)


@dataclass(frozen=True)
class Form:
    name: str
    entities: tuple[Entity, ...]

    def entity(self, entity_id: int) -> Entity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def by_label(self, label: EntityLabel) -> list[Entity]:
        return [e for e in self.entities if e.label == label]


@dataclass(frozen=True)
class GoldLinkSet:
    """Directed question→answer pairs derived from a form's raw links.

    A raw [a, b] pair contributes a gold link iff one endpoint is a
    Question and the other an Answer; the pair is normalized to
    (question_id, answer_id). Pairs with any other label combination are
    counted in ``discarded`` (header→question links are out of linking
    scope). A raw pair normalizing to an already-seen gold link counts
    in ``duplicates``.
    """

    pairs: frozenset[tuple[int, int]]
    discarded: int = 0
    duplicates: int = 0

    def multiplicity(self) -> Counter:
        """Gold question count per answer id."""
        return Counter(a for _, a in self.pairs)

    def questions_of(self, answer_id: int) -> frozenset[int]:
        return frozenset(q for q, a in self.pairs if a == answer_id)


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise SchemaViolation(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaViolation(f"{where}: field {key!r} is not a number")
        return float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaViolation(f"{where}: field {key!r} has wrong type")
    return value


def _parse_box(raw, where: str) -> BBox:
    if not isinstance(raw, list) or len(raw) != 4:
        raise SchemaViolation(f"{where}: box must be [x_min, y_min, x_max, y_max]")
    coords = []
    for c in raw:
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise SchemaViolation(f"{where}: non-numeric box coordinate")
        coords.append(float(c))
    return BBox(*coords)


def parse_form(raw: bytes | str, name: str = "") -> Form:
    """Parse one annotation file into a Form, preserving entity order."""
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"{name or '<input>'}: {exc.msg} at byte {exc.pos}",
                            offset=exc.pos) from exc

    if not isinstance(doc, dict) or "form" not in doc:
        raise SchemaViolation(f"{name or '<input>'}: top-level object must have key 'form'")
    raw_entities = doc["form"]
    if not isinstance(raw_entities, list):
        raise SchemaViolation(f"{name or '<input>'}: 'form' must be an array")

    entities = []
    for i, ent in enumerate(raw_entities):
        where = f"{name or '<input>'}: entity[{i}]"
        if not isinstance(ent, dict):
            raise SchemaViolation(f"{where}: not an object")
        eid = _require(ent, "id", int, where)
        label = EntityLabel.parse(_require(ent, "label", str, where))
        box = _parse_box(_require(ent, "box", list, where), where)
        raw_words = _require(ent, "words", list, where)
        words = []
        for j, w in enumerate(raw_words):
            wwhere = f"{where}.words[{j}]"
            if not isinstance(w, dict):
                raise SchemaViolation(f"{wwhere}: not an object")
            words.append(Word(text=_require(w, "text", str, wwhere),
                              box=_parse_box(_require(w, "box", list, wwhere), wwhere)))
        raw_links = _require(ent, "linking", list, where)
        links = []
        for pair in raw_links:
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)):
                raise SchemaViolation(f"{where}: linking entries must be [int, int]")
            links.append((pair[0], pair[1]))
        text = ent.get("text")
        if text is not None and not isinstance(text, str):
            raise SchemaViolation(f"{where}: field 'text' has wrong type")
        entities.append(Entity(id=eid, label=label, box=box, words=tuple(words),
                               links=tuple(links), raw_text=text))

    ids = [e.id for e in entities]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise InvariantViolation(f"{name or '<input>'}: duplicate entity id {dup}")
    known = set(ids)
    for e in entities:
        for a, b in e.links:
            if a not in known or b not in known:
                missing = a if a not in known else b
                raise InvariantViolation(
                    f"{name or '<input>'}: link [{a},{b}] references unknown id {missing}")

    return Form(name=name, entities=tuple(entities))


def parse_form_file(path: str | Path) -> Form:
    path = Path(path)
    return parse_form(path.read_bytes(), name=path.stem)


def serialize_form(form: Form) -> dict:
    """Render a Form back into the annotation schema (round-trip safe)."""
    out = []
    for e in form.entities:
        ent = {
            "id": e.id,
            "label": e.label.value,
            "box": [e.box.x_min, e.box.y_min, e.box.x_max, e.box.y_max],
            "words": [{"text": w.text,
                       "box": [w.box.x_min, w.box.y_min, w.box.x_max, w.box.y_max]}
                      for w in e.words],
            "linking": [list(pair) for pair in e.links],
        }
        if e.raw_text is not None:
            ent["text"] = e.raw_text
        out.append(ent)
    return {"form": out}


def gold_links(form: Form) -> GoldLinkSet:
    """Extract the question→answer link set from a form.

    Raw linking entries are deduplicated as ordered (a, b) tuples first:
    FUNSD repeats each link in both endpoints' lists.
    """
    labels = {e.id: e.label for e in form.entities}
    raw_pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for e in form.entities:
        for pair in e.links:
            if pair not in seen:
                seen.add(pair)
                raw_pairs.append(pair)

    pairs: set[tuple[int, int]] = set()
    discarded = 0
    duplicates = 0
    for a, b in raw_pairs:
        if labels[a] is EntityLabel.QUESTION and labels[b] is EntityLabel.ANSWER:
            normalized = (a, b)
        elif labels[b] is EntityLabel.QUESTION and labels[a] is EntityLabel.ANSWER:
            normalized = (b, a)
        else:
            discarded += 1
            continue
        if normalized in pairs:
            duplicates += 1
        else:
            pairs.add(normalized)
    return GoldLinkSet(pairs=frozenset(pairs), discarded=discarded, duplicates=duplicates)


@dataclass
class CorpusStats:
    files: int = 0
    entities: int = 0
    words: int = 0
    gold_link_count: int = 0
    discarded_links: int = 0
    label_counts: Counter = field(default_factory=Counter)
    answers_by_multiplicity: Counter = field(default_factory=Counter)
    warnings: list[str] = field(default_factory=list)
    errors: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "files": self.files,
            "entities": self.entities,
            "words": self.words,
            "gold_links": self.gold_link_count,
            "discarded_links": self.discarded_links,
            "label_counts": {k: self.label_counts[k]
                             for k in sorted(self.label_counts)},
            "answers_by_multiplicity": {k: self.answers_by_multiplicity[k]
                                        for k in ("0", "1", "2", ">2")},
            "warnings": list(self.warnings),
            "errors": [{"file": f, "error": m} for f, m in self.errors],
        }


def validate_form(form: Form, stats: CorpusStats) -> None:
    """Accumulate one form's counts and warnings into stats. Never raises
    on a form the parser accepted."""
    stats.entities += len(form.entities)
    for e in form.entities:
        stats.label_counts[e.label.value] += 1
        stats.words += len(e.words)
        if e.box.is_degenerate():
            stats.warnings.append(f"{form.name}: entity {e.id} has a degenerate box")
        for w in e.words:
            if w.text == "":
                stats.warnings.append(f"{form.name}: entity {e.id} has an empty word")
        for a, b in e.links:
            if e.id not in (a, b):
                stats.warnings.append(
                    f"{form.name}: entity {e.id} lists link [{a},{b}] without its own id")

    gold = gold_links(form)
    stats.gold_link_count += len(gold.pairs)
    stats.discarded_links += gold.discarded
    mult = gold.multiplicity()
    for e in form.by_label(EntityLabel.ANSWER):
        m = mult.get(e.id, 0)
        if m > 2:
            stats.answers_by_multiplicity[">2"] += 1
            stats.warnings.append(f"{form.name}: answer {e.id} has gold multiplicity {m}")
        else:
            stats.answers_by_multiplicity[str(m)] += 1


def validate_corpus(directory: str | Path) -> CorpusStats:
    """Parse and validate every *.json file in a directory.

    Per-file parse errors are collected, not raised; the input is never
    mutated.
    """
    stats = CorpusStats()
    for path in sorted(Path(directory).glob("*.json")):
        try:
            form = parse_form_file(path)
        except Exception as exc:  # noqa: BLE001 - collected per spec contract
            stats.errors.append((path.name, str(exc)))
            continue
        stats.files += 1
        validate_form(form, stats)
    return stats


def load_corpus(directory: str | Path) -> list[Form]:
    """Parse every *.json file in a directory, failing on the first error."""
    return [parse_form_file(p) for p in sorted(Path(directory).glob("*.json"))]
