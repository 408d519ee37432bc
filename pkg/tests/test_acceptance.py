"""Acceptance suite: one test per criterion, each printing a pass line.

Criteria that need a locally supplied FUNSD dataset (FUNSD_DIR) are
skipped when it is absent; every fixture-based criterion always runs.
"""

import random
import time

import pytest

from formlink.errors import ExternalScorerFailure
from formlink.fixtures import fixture_split
from formlink.funsd import EntityLabel, gold_links, load_corpus, validate_corpus
from formlink.geometry import candidate_recall
from formlink.linking import decode_corpus
from formlink.metrics import (AnswerRanking, LinkCounts, RankedCandidate,
                              average_precision, evaluate, prf1, rank_value)
from formlink.pairs import PairLabel, build_pairs
from formlink.scoring import ConstantScorer, OracleScorer, train_baseline

from test_metrics import oracle_ap, oracle_rank, ranking


def _passed(name):
    print(f"ACCEPTANCE {name}: PASS")


def test_metric_oracle_equivalence():
    """10^4 random rankings (<=8 candidates, m in {1,2}): AP within 1e-9
    of the threshold-sweep oracle, Rank exactly equal to the direct
    count; runtime under 10 s."""
    rng = random.Random(987654)
    start = time.monotonic()
    for _ in range(10_000):
        n = rng.randint(1, 8)
        scores = [round(rng.random(), 2) for _ in range(n)]
        m = rng.randint(1, 2)
        present = rng.sample(range(n), k=min(n, rng.randint(0, m)))
        extra = range(1000, 1000 + m - len(present))
        r = ranking(scores, gold=present, gold_extra=extra)
        assert rank_value(r) == oracle_rank(r)
        assert abs(average_precision(r) - oracle_ap(r)) <= 1e-9
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f} s"
    _passed("metric-oracle-equivalence")


def test_hand_checked_formulas():
    assert prf1(LinkCounts(tp=2, fp=1, fn=0)) == (2 / 3, 1.0, 0.8)
    assert average_precision(
        ranking([0.9, 0.5, 0.4], gold=[1, 2])) == pytest.approx(7 / 12, abs=1e-12)
    assert rank_value(ranking([0.9, 0.5, 0.4], gold=[1, 2])) == 2
    _passed("hand-checked-formulas")


def _oracle_end_to_end(forms):
    scorer = OracleScorer.from_forms(forms)
    preds, failures = decode_corpus(forms, scorer, k=None, max_links=2)
    assert failures == []
    report = evaluate(preds, forms)
    assert report.f1 == 1.0
    assert report.map == 1.0
    assert report.mrank == 0.0


def test_oracle_end_to_end_fixtures():
    train, test = fixture_split()
    _oracle_end_to_end(train)
    _oracle_end_to_end(test)
    _passed("oracle-end-to-end (fixtures)")


def test_oracle_end_to_end_funsd(funsd_dirs):
    _, test_dir = funsd_dirs
    _oracle_end_to_end(load_corpus(test_dir))
    _passed("oracle-end-to-end (FUNSD)")


def test_dataset_sanity_funsd(funsd_dirs):
    train_dir, test_dir = funsd_dirs
    train_stats = validate_corpus(train_dir)
    test_stats = validate_corpus(test_dir)
    assert train_stats.files == 149
    assert test_stats.files == 50
    total_entities = train_stats.entities + test_stats.entities
    assert total_entities >= 9_000
    total_links = train_stats.gold_link_count + test_stats.gold_link_count
    assert 1_000 <= total_links < 10_000
    _passed("dataset-sanity (FUNSD)")


def _recall_monotone(forms):
    recalls = [candidate_recall(forms, k=k) for k in (1, 3, 5, 10, None)]
    assert recalls == sorted(recalls)
    assert recalls[-1] == 1.0
    return recalls


def test_candidate_generation_monotonicity_fixtures():
    _, test = fixture_split()
    _recall_monotone(test)
    _passed("candidate-generation-monotonicity (fixtures)")


def test_candidate_generation_monotonicity_funsd(funsd_dirs):
    _, test_dir = funsd_dirs
    _recall_monotone(load_corpus(test_dir))
    _passed("candidate-generation-monotonicity (FUNSD)")


def _learnability(train, test):
    train_ex = [e for f in train for e in build_pairs(f, k=10).examples]
    model = train_baseline(train_ex, epochs=5, learning_rate=0.5, seed=0)

    test_ex = [e for f in test for e in build_pairs(f, k=10).examples]
    correct = sum((model.score_one(e) >= 0.5) == (e.label is PairLabel.VALID)
                  for e in test_ex)
    majority = max(sum(e.label is PairLabel.VALID for e in test_ex),
                   sum(e.label is PairLabel.INVALID for e in test_ex))
    assert correct > majority, "pair accuracy must beat the majority class"

    f1s = {}
    for name, scorer in (("baseline", model), ("constant-0", ConstantScorer(0.0)),
                         ("constant-1", ConstantScorer(1.0))):
        preds, _ = decode_corpus(test, scorer, k=10)
        f1s[name] = evaluate(preds, test).f1
    assert f1s["baseline"] > f1s["constant-0"]
    assert f1s["baseline"] > f1s["constant-1"]
    return f1s


def test_baseline_learnability_fixtures():
    train, test = fixture_split()
    f1s = _learnability(train, test)
    _passed(f"baseline-learnability (fixtures, {f1s})")


def test_baseline_learnability_funsd(funsd_dirs):
    train_dir, test_dir = funsd_dirs
    f1s = _learnability(load_corpus(train_dir), load_corpus(test_dir))
    _passed(f"baseline-learnability (FUNSD, {f1s})")


def test_determinism(tmp_path, capsys, monkeypatch):
    """Repeated runs with fixed config and a deterministic scorer give
    byte-identical pairs, predictions, and report files."""
    from formlink.cli import main

    artifacts = []
    for run_dir in ("r1", "r2"):
        d = tmp_path / run_dir
        d.mkdir()
        monkeypatch.chdir(d)
        assert main(["pairs", "--fixtures", "train", "--out", "pairs.jsonl"]) == 0
        assert main(["link", "--fixtures", "test", "--scorer", "oracle",
                     "--k", "inf", "--max-links", "2", "--out", "pred.jsonl"]) == 0
        assert main(["evaluate", "--fixtures", "test", "--pred", "pred.jsonl",
                     "--out", "report.json"]) == 0
        capsys.readouterr()
        artifacts.append(tuple((d / n).read_bytes()
                               for n in ("pairs.jsonl", "pred.jsonl", "report.json")))
    assert artifacts[0] == artifacts[1]
    _passed("determinism")
