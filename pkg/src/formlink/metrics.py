"""Entity-linking evaluation: TP/FP/FN/TN, precision/recall/F1,
per-answer average precision and Rank, mAP and mRank.

Conventions, recorded in every report:
  - precision/recall/F1 are 0 when their denominators vanish;
  - answers with no gold question (m = 0) are excluded from mAP/mRank
    and counted in diagnostics;
  - candidate rankings order by descending score, ties broken by
    ascending distance then ascending question id;
  - F1 aggregates corpus-level link counts; mAP/mRank average per answer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import FormMismatch, NoGold
from .funsd import EntityLabel, Form, gold_links
from .linking import LinkPrediction


@dataclass(frozen=True)
class LinkCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0


@dataclass(frozen=True)
class RankedCandidate:
    question_id: int
    score: float
    distance: float


@dataclass(frozen=True)
class AnswerRanking:
    """Candidates in ranking order with the answer's gold question set."""

    answer_id: int
    ordered: tuple[RankedCandidate, ...]
    gold: frozenset[int]

    @classmethod
    def build(cls, answer_id: int, candidates, gold: frozenset[int]) -> "AnswerRanking":
        ordered = sorted(candidates,
                         key=lambda c: (-c.score, c.distance, c.question_id))
        return cls(answer_id=answer_id,
                   ordered=tuple(RankedCandidate(c.question_id, c.score, c.distance)
                                 for c in ordered),
                   gold=gold)


def prf1(counts: LinkCounts) -> tuple[float, float, float]:
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return precision, recall, f1


def _gold_positions(ranking: AnswerRanking) -> tuple[list[int], int]:
    """1-based positions of gold questions in the ranking; missing gold
    questions take positions after the last candidate, penalizing misses."""
    m = len(ranking.gold)
    if m == 0:
        raise NoGold(f"answer {ranking.answer_id} has no gold question")
    present = [i + 1 for i, c in enumerate(ranking.ordered)
               if c.question_id in ranking.gold]
    n_missing = m - len(present)
    n = len(ranking.ordered)
    positions = present + [n + j + 1 for j in range(n_missing)]
    return positions, m


def average_precision(ranking: AnswerRanking) -> float:
    """AP via the sum over hit positions of (1/m) * precision-at-hit.

    Gold questions absent from the candidate list cap the reachable
    recall, so AP < 1 whenever any gold question is missing.
    """
    m = len(ranking.gold)
    if m == 0:
        raise NoGold(f"answer {ranking.answer_id} has no gold question")
    ap = 0.0
    hits = 0
    for pos, cand in enumerate(ranking.ordered, start=1):
        if cand.question_id in ranking.gold:
            hits += 1
            ap += (1.0 / m) * (hits / pos)
    return ap


def rank_value(ranking: AnswerRanking) -> int:
    """Rank = sum of gold positions minus m(1+m)/2: the number of wrong
    candidates ranked above gold ones."""
    positions, m = _gold_positions(ranking)
    return sum(positions) - m * (1 + m) // 2


def link_counts(predictions: Sequence[LinkPrediction],
                forms: Sequence[Form]) -> LinkCounts:
    """Corpus-level TP/FP/FN/TN over predicted vs gold link sets.

    TN counts answers and questions that have no gold link and correctly
    received no predicted link.
    """
    by_name = {f.name: f for f in forms}
    if len(by_name) != len(forms):
        raise FormMismatch("duplicate form names in gold corpus")
    tp = fp = fn = tn = 0
    for pred in predictions:
        form = by_name.get(pred.form_name)
        if form is None:
            raise FormMismatch(f"predictions reference unknown form {pred.form_name!r}")
        gold = gold_links(form).pairs
        predicted = pred.link_pairs()
        tp += len(predicted & gold)
        fp += len(predicted - gold)
        fn += len(gold - predicted)

        gold_q = {q for q, _ in gold}
        gold_a = {a for _, a in gold}
        pred_q = {q for q, _ in predicted}
        pred_a = {a for _, a in predicted}
        for e in form.by_label(EntityLabel.ANSWER):
            if e.id not in gold_a and e.id not in pred_a:
                tn += 1
        for e in form.by_label(EntityLabel.QUESTION):
            if e.id not in gold_q and e.id not in pred_q:
                tn += 1
    return LinkCounts(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass
class MetricsReport:
    counts: LinkCounts
    precision: float
    recall: float
    f1: float
    ap_values: list[float]
    rank_values: list[int]
    map: float
    mrank: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "counts": {"tp": self.counts.tp, "fp": self.counts.fp,
                       "fn": self.counts.fn, "tn": self.counts.tn},
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "map": self.map,
            "mrank": self.mrank,
            "answers_evaluated": len(self.ap_values),
            "diagnostics": self.diagnostics,
        }

    def to_json(self, meta: dict | None = None) -> str:
        doc = self.to_dict()
        if meta is not None:
            doc["_meta"] = meta
        return json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=2)


def evaluate(predictions: Sequence[LinkPrediction], forms: Sequence[Form],
             ) -> MetricsReport:
    """Full report: corpus F1 plus per-answer mAP and mRank.

    Answer rankings come from the predictions' retained candidate score
    vectors; an answer with gold links but no prediction entry scores
    AP = 0 for it (all gold unreachable).
    """
    by_name = {f.name: f for f in forms}
    counts = link_counts(predictions, forms)
    precision, recall, f1 = prf1(counts)

    ap_values: list[float] = []
    rank_values: list[int] = []
    excluded = 0
    gold_total = 0
    gold_in_candidates = 0
    for pred in predictions:
        form = by_name[pred.form_name]
        gold = gold_links(form)
        seen_answers = set()
        for ans in pred.answers:
            seen_answers.add(ans.answer_id)
            gold_q = gold.questions_of(ans.answer_id)
            in_set = {c.question_id for c in ans.candidates}
            gold_total += len(gold_q)
            gold_in_candidates += len(gold_q & in_set)
            if not gold_q:
                excluded += 1
                continue
            ranking = AnswerRanking.build(ans.answer_id, ans.candidates, gold_q)
            ap_values.append(average_precision(ranking))
            rank_values.append(rank_value(ranking))
        for e in form.by_label(EntityLabel.ANSWER):
            if e.id in seen_answers:
                continue
            gold_q = gold.questions_of(e.id)
            gold_total += len(gold_q)
            if not gold_q:
                excluded += 1
                continue
            ranking = AnswerRanking.build(e.id, (), gold_q)
            ap_values.append(average_precision(ranking))
            rank_values.append(rank_value(ranking))

    return MetricsReport(
        counts=counts,
        precision=precision,
        recall=recall,
        f1=f1,
        ap_values=ap_values,
        rank_values=rank_values,
        map=sum(ap_values) / len(ap_values) if ap_values else 0.0,
        mrank=sum(rank_values) / len(rank_values) if rank_values else 0.0,
        diagnostics={
            "answers_without_gold": excluded,
            "candidate_recall": (gold_in_candidates / gold_total
                                 if gold_total else 1.0),
            "gold_links": gold_total,
        },
    )


def report_table(report: MetricsReport) -> str:
    """Human-readable summary for stdout."""
    c = report.counts
    lines = [
        f"TP {c.tp}  FP {c.fp}  FN {c.fn}  TN {c.tn}",
        f"precision {report.precision:.4f}  recall {report.recall:.4f}  "
        f"F1 {report.f1:.4f}",
        f"mAP {report.map:.4f}  mRank {report.mrank:.4f}  "
        f"over {len(report.ap_values)} answers",
        f"candidate recall {report.diagnostics['candidate_recall']:.4f}  "
        f"answers without gold {report.diagnostics['answers_without_gold']}",
    ]
    return "\n".join(lines)


def load_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
