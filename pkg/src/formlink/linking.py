"""Decode pair scores into link predictions.

Per answer: candidates scoring at or above the threshold are valid; the
max_links nearest valid candidates (by distance, then question id) are
selected. Full per-answer score vectors are kept for metric computation.

Predictions file: one JSON object per form per line —
{form, links: [{qid, aid, score, distance}],
 answers: [{aid, candidates: [{qid, score, distance}]}]}.
An optional leading {"_meta": ...} line carries the run configuration.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

from .errors import FormlinkError, MissingScore
from .funsd import Form
from .geometry import CandidateSet, DistanceMode
from .pairs import inference_pairs
from .scoring import PairScore, Scorer, score_pairs


@dataclass(frozen=True)
class ScoredCandidate:
    question_id: int
    score: float
    distance: float


@dataclass(frozen=True)
class AnswerCandidates:
    answer_id: int
    candidates: tuple[ScoredCandidate, ...]


@dataclass(frozen=True)
class Link:
    question_id: int
    answer_id: int
    score: float
    distance: float


@dataclass(frozen=True)
class LinkPrediction:
    form_name: str
    links: tuple[Link, ...]
    answers: tuple[AnswerCandidates, ...]

    def link_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset((l.question_id, l.answer_id) for l in self.links)


def decode(form_name: str, candidate_sets: Sequence[CandidateSet],
           scores: Sequence[PairScore], threshold: float = 0.5,
           max_links: int = 1) -> LinkPrediction:
    """Threshold scores and apply the closest-question tie-break."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0,1]")
    if max_links < 1:
        raise ValueError("max_links must be >= 1")
    by_pair = {(s.question_id, s.answer_id): s.score for s in scores}

    links: list[Link] = []
    answers: list[AnswerCandidates] = []
    for cs in candidate_sets:
        scored = []
        for cand in cs.candidates:
            key = (cand.question_id, cs.answer_id)
            if key not in by_pair:
                raise MissingScore(
                    f"{form_name}: no score for candidate pair {key}")
            scored.append(ScoredCandidate(question_id=cand.question_id,
                                          score=by_pair[key],
                                          distance=cand.distance))
        answers.append(AnswerCandidates(answer_id=cs.answer_id,
                                        candidates=tuple(scored)))
        valid = [c for c in scored if c.score >= threshold]
        valid.sort(key=lambda c: (c.distance, c.question_id))
        for c in valid[:max_links]:
            links.append(Link(question_id=c.question_id, answer_id=cs.answer_id,
                              score=c.score, distance=c.distance))
    return LinkPrediction(form_name=form_name, links=tuple(links),
                          answers=tuple(answers))


def decode_form(form: Form, scorer: Scorer, k: int | None = 10,
                radius: float | None = None,
                mode: DistanceMode = DistanceMode.CENTER_EUCLIDEAN,
                threshold: float = 0.5, max_links: int = 1) -> LinkPrediction:
    """Candidate generation → pair building → scoring → decoding."""
    per_answer = inference_pairs(form, k=k, radius=radius, mode=mode)
    flat = [ex for _, _, exs in per_answer for ex in exs]
    scores = score_pairs(scorer, flat) if flat else []
    return decode(form.name, [cs for _, cs, _ in per_answer], scores,
                  threshold=threshold, max_links=max_links)


def decode_corpus(forms: Sequence[Form], scorer: Scorer, k: int | None = 10,
                  radius: float | None = None,
                  mode: DistanceMode = DistanceMode.CENTER_EUCLIDEAN,
                  threshold: float = 0.5, max_links: int = 1,
                  keep_going: bool = False, jobs: int = 1,
                  ) -> tuple[list[LinkPrediction], list[tuple[str, str]]]:
    """Decode every form; results merged in input order.

    With keep_going, per-form failures are collected as (form, message)
    instead of raised. jobs > 1 fans out across forms.
    """
    def one(form: Form):
        return decode_form(form, scorer, k=k, radius=radius, mode=mode,
                           threshold=threshold, max_links=max_links)

    predictions: list[LinkPrediction] = []
    failures: list[tuple[str, str]] = []
    if jobs > 1:
        # external scorer sessions are single-consumer; fan out only the
        # pure scorers
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [(form.name, pool.submit(one, form)) for form in forms]
        for name, fut in futures:
            try:
                predictions.append(fut.result())
            except FormlinkError as exc:
                if not keep_going:
                    raise
                failures.append((name, str(exc)))
    else:
        for form in forms:
            try:
                predictions.append(one(form))
            except FormlinkError as exc:
                if not keep_going:
                    raise
                failures.append((form.name, str(exc)))
    return predictions, failures


def prediction_to_json(pred: LinkPrediction) -> str:
    record = {
        "form": pred.form_name,
        "links": [{"qid": l.question_id, "aid": l.answer_id,
                   "score": l.score, "distance": l.distance}
                  for l in pred.links],
        "answers": [{"aid": a.answer_id,
                     "candidates": [{"qid": c.question_id, "score": c.score,
                                     "distance": c.distance}
                                    for c in a.candidates]}
                    for a in pred.answers],
    }
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def prediction_from_json(line: str) -> LinkPrediction:
    record = json.loads(line)
    return LinkPrediction(
        form_name=record["form"],
        links=tuple(Link(question_id=l["qid"], answer_id=l["aid"],
                         score=float(l["score"]), distance=float(l["distance"]))
                    for l in record["links"]),
        answers=tuple(AnswerCandidates(
            answer_id=a["aid"],
            candidates=tuple(ScoredCandidate(question_id=c["qid"],
                                             score=float(c["score"]),
                                             distance=float(c["distance"]))
                             for c in a["candidates"]))
            for a in record["answers"]),
    )


def write_predictions(preds: Iterable[LinkPrediction], out: IO[str],
                      meta: dict | None = None) -> None:
    if meta is not None:
        out.write(json.dumps({"_meta": meta}, ensure_ascii=False,
                             separators=(",", ":"), sort_keys=True) + "\n")
    for pred in preds:
        out.write(prediction_to_json(pred) + "\n")


def read_predictions(path: str | Path) -> list[LinkPrediction]:
    preds = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith('{"_meta"'):
                continue
            preds.append(prediction_from_json(line))
    return preds
