"""Question-answer pair dataset construction and the pairs file format.

Pairs file: one JSON object per line, UTF-8, LF line endings. Data lines
carry {form, qid, aid, question, answer, distance, same_row, label};
label is one of "valid", "invalid", "unlabeled". An optional leading
line whose only key is "_meta" carries the run configuration and is
skipped by readers.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import IO, Iterable

from .errors import SchemaViolation
from .funsd import EntityLabel, Form, gold_links
from .geometry import CandidateSet, DistanceMode, bbox_distance, candidates_for


class PairLabel(Enum):
    VALID = "valid"
    INVALID = "invalid"
    UNLABELED = "unlabeled"


def normalize_text(s: str) -> str:
    """NFC-normalize, collapse whitespace runs to one space, strip ends."""
    return " ".join(unicodedata.normalize("NFC", s).split())


@dataclass(frozen=True)
class PairExample:
    form_name: str
    question_id: int
    answer_id: int
    question_text: str
    answer_text: str
    distance: float
    same_row: bool
    label: PairLabel = PairLabel.UNLABELED


@dataclass(frozen=True)
class NegativePolicy:
    """How many non-gold candidates become Invalid examples.

    max_per_positive=None keeps every negative; Balanced(r) keeps at most
    r negatives per positive, chosen nearest-first.
    """

    max_per_positive: int | None = None

    @classmethod
    def all(cls) -> "NegativePolicy":
        return cls(None)

    @classmethod
    def balanced(cls, ratio: int) -> "NegativePolicy":
        if ratio < 0:
            raise ValueError("negative ratio must be >= 0")
        return cls(ratio)


@dataclass
class PairBuildResult:
    examples: list[PairExample]
    gold_missed_by_candidates: int


def _same_row(question_box, answer_box) -> bool:
    # vertical center offset smaller than the answer box height
    qc = question_box.center[1]
    ac = answer_box.center[1]
    return abs(qc - ac) < answer_box.height


def build_pairs(form: Form, k: int | None = 10, radius: float | None = None,
                mode: DistanceMode = DistanceMode.CENTER_EUCLIDEAN,
                policy: NegativePolicy = NegativePolicy.all()) -> PairBuildResult:
    """Labeled pair examples for one form.

    For each Answer entity, one example per geometric candidate, labeled
    Valid iff the pair is a gold link. Gold pairs the candidate set
    misses are appended as Valid with their true distance and tallied.
    """
    gold = gold_links(form)
    examples: list[PairExample] = []
    missed = 0
    for answer in form.by_label(EntityLabel.ANSWER):
        cs = candidates_for(form, answer.id, k=k, radius=radius, mode=mode)
        a_text = normalize_text(answer.text)
        positives: list[PairExample] = []
        negatives: list[PairExample] = []
        for cand in cs.candidates:
            question = form.entity(cand.question_id)
            ex = PairExample(
                form_name=form.name,
                question_id=question.id,
                answer_id=answer.id,
                question_text=normalize_text(question.text),
                answer_text=a_text,
                distance=cand.distance,
                same_row=_same_row(question.box, answer.box),
                label=PairLabel.VALID if (question.id, answer.id) in gold.pairs
                else PairLabel.INVALID,
            )
            (positives if ex.label is PairLabel.VALID else negatives).append(ex)

        in_set = {c.question_id for c in cs.candidates}
        for qid in sorted(gold.questions_of(answer.id)):
            if qid in in_set:
                continue
            missed += 1
            question = form.entity(qid)
            positives.append(PairExample(
                form_name=form.name,
                question_id=qid,
                answer_id=answer.id,
                question_text=normalize_text(question.text),
                answer_text=a_text,
                distance=bbox_distance(answer.box, question.box, mode),
                same_row=_same_row(question.box, answer.box),
                label=PairLabel.VALID,
            ))

        if policy.max_per_positive is not None:
            budget = policy.max_per_positive * len(positives)
            negatives = negatives[:budget]  # candidates are already nearest-first
        examples.extend(positives)
        examples.extend(negatives)
    return PairBuildResult(examples=examples, gold_missed_by_candidates=missed)


def inference_pairs(form: Form, k: int | None = 10, radius: float | None = None,
                    mode: DistanceMode = DistanceMode.CENTER_EUCLIDEAN,
                    ) -> list[tuple[int, CandidateSet, list[PairExample]]]:
    """Unlabeled examples per answer, aligned with the candidate sets.

    Returns (answer_id, CandidateSet, examples) triples; examples[i]
    corresponds to candidates[i].
    """
    out = []
    for answer in form.by_label(EntityLabel.ANSWER):
        cs = candidates_for(form, answer.id, k=k, radius=radius, mode=mode)
        a_text = normalize_text(answer.text)
        exs = []
        for cand in cs.candidates:
            question = form.entity(cand.question_id)
            exs.append(PairExample(
                form_name=form.name,
                question_id=question.id,
                answer_id=answer.id,
                question_text=normalize_text(question.text),
                answer_text=a_text,
                distance=cand.distance,
                same_row=_same_row(question.box, answer.box),
                label=PairLabel.UNLABELED,
            ))
        out.append((answer.id, cs, exs))
    return out


def pair_to_json(ex: PairExample) -> str:
    record = {
        "form": ex.form_name,
        "qid": ex.question_id,
        "aid": ex.answer_id,
        "question": ex.question_text,
        "answer": ex.answer_text,
        "distance": ex.distance,
        "same_row": ex.same_row,
        "label": ex.label.value,
    }
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def pair_from_json(line: str) -> PairExample:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"bad pairs line: {exc.msg}") from exc
    try:
        return PairExample(
            form_name=record["form"],
            question_id=record["qid"],
            answer_id=record["aid"],
            question_text=record["question"],
            answer_text=record["answer"],
            distance=float(record["distance"]),
            same_row=bool(record.get("same_row", False)),
            label=PairLabel(record["label"]),
        )
    except (KeyError, ValueError) as exc:
        raise SchemaViolation(f"bad pairs record: {exc}") from exc


def write_pairs(examples: Iterable[PairExample], out: IO[str],
                meta: dict | None = None) -> None:
    if meta is not None:
        out.write(json.dumps({"_meta": meta}, ensure_ascii=False,
                             separators=(",", ":"), sort_keys=True) + "\n")
    for ex in examples:
        out.write(pair_to_json(ex) + "\n")


def read_pairs(path: str | Path) -> list[PairExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith('{"_meta"'):
                continue
            examples.append(pair_from_json(line))
    return examples


def relabel_unlabeled(ex: PairExample) -> PairExample:
    """Strip the label for inference-time reuse of stored pairs."""
    return replace(ex, label=PairLabel.UNLABELED)
