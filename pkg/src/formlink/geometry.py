"""Bounding-box distances and per-answer candidate-question generation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import NotAnAnswer, UnknownId
from .funsd import BBox, EntityLabel, Form, gold_links


class DistanceMode(Enum):
    CENTER_EUCLIDEAN = "center"
    CLOSEST_EDGE = "edge"

    @classmethod
    def parse(cls, name: str) -> "DistanceMode":
        return cls(name.lower())


def bbox_distance(a: BBox, b: BBox, mode: DistanceMode = DistanceMode.CENTER_EUCLIDEAN) -> float:
    """Distance between two boxes; symmetric and >= 0.

    CENTER_EUCLIDEAN: Euclidean distance between box centers.
    CLOSEST_EDGE: minimum distance between the rectangles, 0 on overlap.
    """
    if mode is DistanceMode.CENTER_EUCLIDEAN:
        (ax, ay), (bx, by) = a.center, b.center
        return math.hypot(ax - bx, ay - by)
    dx = max(0.0, a.x_min - b.x_max, b.x_min - a.x_max)
    dy = max(0.0, a.y_min - b.y_max, b.y_min - a.y_max)
    return math.hypot(dx, dy)


@dataclass(frozen=True)
class Candidate:
    question_id: int
    distance: float


@dataclass(frozen=True)
class CandidateSet:
    """Candidates sorted ascending by (distance, question_id); no duplicates."""

    answer_id: int
    candidates: tuple[Candidate, ...]

    def question_ids(self) -> list[int]:
        return [c.question_id for c in self.candidates]


def candidates_for(form: Form, answer_id: int, k: int | None = 10,
                   radius: float | None = None,
                   mode: DistanceMode = DistanceMode.CENTER_EUCLIDEAN) -> CandidateSet:
    """The k nearest Question entities within radius of the given answer.

    k=None and radius=None mean unbounded; fewer than k candidates are
    returned when the form has fewer questions in range.
    """
    try:
        answer = form.entity(answer_id)
    except KeyError:
        raise UnknownId(f"{form.name}: no entity with id {answer_id}") from None
    if answer.label is not EntityLabel.ANSWER:
        raise NotAnAnswer(
            f"{form.name}: entity {answer_id} is labeled {answer.label.value}, not answer")

    scored = []
    for q in form.by_label(EntityLabel.QUESTION):
        d = bbox_distance(answer.box, q.box, mode)
        if radius is None or d <= radius:
            scored.append(Candidate(question_id=q.id, distance=d))
    scored.sort(key=lambda c: (c.distance, c.question_id))
    if k is not None:
        scored = scored[:k]
    return CandidateSet(answer_id=answer_id, candidates=tuple(scored))


def candidate_recall(forms: list[Form], k: int | None = 10,
                     radius: float | None = None,
                     mode: DistanceMode = DistanceMode.CENTER_EUCLIDEAN) -> float:
    """Fraction of gold links whose question survives candidate generation.

    Returns 1.0 for a corpus with no gold links (nothing was missed).
    """
    total = 0
    hit = 0
    for form in forms:
        for qid, aid in gold_links(form).pairs:
            total += 1
            cs = candidates_for(form, aid, k=k, radius=radius, mode=mode)
            if qid in cs.question_ids():
                hit += 1
    return hit / total if total else 1.0
