"""Pair scorers: gold oracle, constants, a trainable hashed-feature
logistic baseline, and a client for external scorers.

External wire protocol (line-delimited JSON over the child process's
stdin/stdout or a TCP stream): request {"id": int, "question": str,
"answer": str}; response {"id": int, "score": float}; one object per
line, UTF-8, LF. Responses may arrive in any order.
"""

from __future__ import annotations

import json
import math
import queue
import random
import shlex
import socket
import subprocess
import threading
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Protocol, Sequence

import numpy as np

from .errors import DegenerateDataset, ExternalScorerFailure
from .funsd import Form, gold_links
from .pairs import PairExample, PairLabel

BASELINE_MAGIC = b"formlink-baseline v1\n"
DISTANCE_SCALE = 1000.0  # pixels; FUNSD pages are ~1000 px tall


@dataclass(frozen=True)
class PairScore:
    form_name: str
    question_id: int
    answer_id: int
    score: float


class Scorer(Protocol):
    def score_pairs(self, examples: Sequence[PairExample]) -> list[PairScore]: ...


def _check_scores(scores: list[PairScore]) -> list[PairScore]:
    for s in scores:
        if not math.isfinite(s.score) or not 0.0 <= s.score <= 1.0:
            raise ExternalScorerFailure(f"score {s.score!r} outside [0,1] "
                                        f"for pair ({s.question_id},{s.answer_id})")
    return scores


class OracleScorer:
    """Scores 1.0 for gold question-answer pairs, 0.0 otherwise."""

    def __init__(self, gold_by_form: dict[str, frozenset[tuple[int, int]]]):
        self._gold = gold_by_form

    @classmethod
    def from_forms(cls, forms: Iterable[Form]) -> "OracleScorer":
        return cls({f.name: gold_links(f).pairs for f in forms})

    def score_pairs(self, examples: Sequence[PairExample]) -> list[PairScore]:
        out = []
        for ex in examples:
            gold = self._gold.get(ex.form_name, frozenset())
            hit = (ex.question_id, ex.answer_id) in gold
            out.append(PairScore(ex.form_name, ex.question_id, ex.answer_id,
                                 1.0 if hit else 0.0))
        return out


class ConstantScorer:
    def __init__(self, value: float):
        if not 0.0 <= value <= 1.0:
            raise ValueError("constant score must be in [0,1]")
        self.value = value

    def score_pairs(self, examples: Sequence[PairExample]) -> list[PairScore]:
        return [PairScore(ex.form_name, ex.question_id, ex.answer_id, self.value)
                for ex in examples]


# ---------------------------------------------------------------------------
# Baseline: logistic regression over hashed character n-grams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BaselineConfig:
    ngram_sizes: tuple[int, ...] = (2, 3)
    hash_dim: int = 2 ** 18
    use_geometry: bool = True

    @property
    def dim(self) -> int:
        return self.hash_dim + (2 if self.use_geometry else 0)


def _hash_index(token: str, dim: int) -> int:
    return zlib.crc32(token.encode("utf-8")) % dim


def pair_features(config: BaselineConfig, ex: PairExample) -> dict[int, float]:
    """Sparse feature vector: hashed char n-grams of both texts (salted
    per side), L2-normalized, plus two geometric features."""
    counts: dict[int, float] = {}
    for prefix, text in (("q", ex.question_text), ("a", ex.answer_text)):
        padded = f" {text} "
        for n in config.ngram_sizes:
            for i in range(max(0, len(padded) - n + 1)):
                idx = _hash_index(f"{prefix}{n}:{padded[i:i + n]}", config.hash_dim)
                counts[idx] = counts.get(idx, 0.0) + 1.0
    norm = math.sqrt(sum(v * v for v in counts.values()))
    if norm > 0:
        counts = {i: v / norm for i, v in counts.items()}
    if config.use_geometry:
        counts[config.hash_dim] = ex.distance / DISTANCE_SCALE
        counts[config.hash_dim + 1] = 1.0 if ex.same_row else 0.0
    return counts


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def loss_and_gradient(weights: np.ndarray, bias: float,
                      features: dict[int, float], y: float
                      ) -> tuple[float, dict[int, float], float]:
    """Log-loss of one example and its gradient w.r.t. (weights, bias).

    Returns (loss, sparse weight gradient, bias gradient).
    """
    z = bias + sum(weights[i] * v for i, v in features.items())
    p = _sigmoid(z)
    eps = 1e-12
    loss = -(y * math.log(p + eps) + (1.0 - y) * math.log(1.0 - p + eps))
    err = p - y
    return loss, {i: err * v for i, v in features.items()}, err


@dataclass
class BaselineModel:
    config: BaselineConfig
    weights: np.ndarray
    bias: float
    epoch_losses: list[float] = field(default_factory=list)  # not serialized

    def score_one(self, ex: PairExample) -> float:
        feats = pair_features(self.config, ex)
        z = self.bias + sum(self.weights[i] * v for i, v in feats.items())
        return _sigmoid(z)

    def score_pairs(self, examples: Sequence[PairExample]) -> list[PairScore]:
        return _check_scores([
            PairScore(ex.form_name, ex.question_id, ex.answer_id, self.score_one(ex))
            for ex in examples])

    def save(self, path: str | Path) -> None:
        header = json.dumps({
            "ngram_sizes": list(self.config.ngram_sizes),
            "hash_dim": self.config.hash_dim,
            "use_geometry": self.config.use_geometry,
            "bias": self.bias,
        }, sort_keys=True, separators=(",", ":"))
        with open(path, "wb") as fh:
            fh.write(BASELINE_MAGIC)
            fh.write(header.encode("utf-8") + b"\n")
            fh.write(np.ascontiguousarray(self.weights, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "BaselineModel":
        with open(path, "rb") as fh:
            magic = fh.readline()
            if magic != BASELINE_MAGIC:
                raise ValueError(f"{path}: not a baseline model file")
            header = json.loads(fh.readline().decode("utf-8"))
            config = BaselineConfig(ngram_sizes=tuple(header["ngram_sizes"]),
                                    hash_dim=header["hash_dim"],
                                    use_geometry=header["use_geometry"])
            weights = np.frombuffer(fh.read(), dtype="<f8").copy()
        if weights.shape != (config.dim,):
            raise ValueError(f"{path}: weight vector has wrong length")
        return cls(config=config, weights=weights, bias=header["bias"])


def train_baseline(examples: Sequence[PairExample], epochs: int = 5,
                   learning_rate: float = 0.5, seed: int = 0,
                   config: BaselineConfig = BaselineConfig()) -> BaselineModel:
    """SGD on log-loss; reproducible given identical seed and input order."""
    labeled = [ex for ex in examples if ex.label is not PairLabel.UNLABELED]
    classes = {ex.label for ex in labeled}
    if classes != {PairLabel.VALID, PairLabel.INVALID}:
        raise DegenerateDataset("training data needs both valid and invalid examples")

    feats = [pair_features(config, ex) for ex in labeled]
    targets = [1.0 if ex.label is PairLabel.VALID else 0.0 for ex in labeled]
    weights = np.zeros(config.dim, dtype=np.float64)
    bias = 0.0
    rng = random.Random(seed)
    order = list(range(len(labeled)))
    losses = []
    for _ in range(epochs):
        rng.shuffle(order)
        total = 0.0
        for idx in order:
            loss, grad_w, grad_b = loss_and_gradient(weights, bias, feats[idx],
                                                     targets[idx])
            total += loss
            for i, g in grad_w.items():
                weights[i] -= learning_rate * g
            bias -= learning_rate * grad_b
        losses.append(total / len(order))
    return BaselineModel(config=config, weights=weights, bias=bias,
                         epoch_losses=losses)


# ---------------------------------------------------------------------------
# External scorer session
# ---------------------------------------------------------------------------


class _LineReader:
    """Background thread feeding response lines into a queue."""

    def __init__(self, stream: IO[bytes]):
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._run, args=(stream,), daemon=True)
        self._thread.start()

    def _run(self, stream: IO[bytes]) -> None:
        try:
            for line in stream:
                self._queue.put(line)
        finally:
            self._queue.put(None)

    def next_line(self, timeout: float) -> bytes | None:
        try:
            return self._queue.get(timeout=timeout)
        except queue.Empty:
            raise ExternalScorerFailure(f"no response within {timeout} s") from None


class ExternalScorerSession:
    """Client for an external scorer process or TCP endpoint.

    Stateful single consumer: callers must serialize access or open one
    session per thread. Use as a context manager.
    """

    def __init__(self, command: str | Sequence[str] | None = None,
                 address: str | None = None, batch_size: int = 64,
                 timeout: float = 60.0):
        if (command is None) == (address is None):
            raise ValueError("give exactly one of command or address")
        self.batch_size = batch_size
        self.timeout = timeout
        self._next_id = 0
        self._proc = None
        self._sock = None
        if command is not None:
            argv = shlex.split(command) if isinstance(command, str) else list(command)
            try:
                self._proc = subprocess.Popen(argv, stdin=subprocess.PIPE,
                                              stdout=subprocess.PIPE,
                                              stderr=subprocess.PIPE)
            except OSError as exc:
                raise ExternalScorerFailure(f"cannot start scorer: {exc}") from exc
            self._writer = self._proc.stdin
            self._reader = _LineReader(self._proc.stdout)
        else:
            host, _, port = address.rpartition(":")
            try:
                self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            except OSError as exc:
                raise ExternalScorerFailure(f"cannot connect to {address}: {exc}") from exc
            self._writer = self._sock.makefile("wb")
            self._reader = _LineReader(self._sock.makefile("rb"))

    def __enter__(self) -> "ExternalScorerSession":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def close(self) -> None:
        try:
            self._writer.close()
        except OSError:
            pass
        if self._proc is not None:
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        if self._sock is not None:
            self._sock.close()

    def _fail(self, message: str, request_id: int | None = None):
        diag = b""
        if self._proc is not None:
            try:
                self._proc.wait(timeout=2)
                diag = self._proc.stderr.read() or b""
            except subprocess.TimeoutExpired:
                pass
        if diag:
            message += f" (scorer stderr: {diag.decode('utf-8', 'replace').strip()})"
        raise ExternalScorerFailure(message, request_id=request_id)

    def _score_batch(self, batch: list[tuple[int, PairExample]]) -> dict[int, float]:
        for req_id, ex in batch:
            line = json.dumps({"id": req_id, "question": ex.question_text,
                               "answer": ex.answer_text}, ensure_ascii=False)
            try:
                self._writer.write(line.encode("utf-8") + b"\n")
            except (OSError, ValueError):
                self._fail("scorer stream closed while writing", request_id=req_id)
        try:
            self._writer.flush()
        except (OSError, ValueError):
            self._fail("scorer stream closed on flush")

        pending = {req_id for req_id, _ in batch}
        scores: dict[int, float] = {}
        while pending:
            raw = self._reader.next_line(self.timeout)
            if raw is None:
                self._fail(f"scorer closed its stream with {len(pending)} "
                           "responses outstanding", request_id=min(pending))
            try:
                msg = json.loads(raw)
                req_id = msg["id"]
                if "error" in msg:
                    self._fail(f"scorer error: {msg['error']}", request_id=req_id)
                score = float(msg["score"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                self._fail(f"malformed response line {raw!r}")
            if req_id not in pending:
                self._fail(f"response for unknown request id {req_id}", request_id=req_id)
            if not math.isfinite(score) or not 0.0 <= score <= 1.0:
                raise ExternalScorerFailure(
                    f"score {score!r} outside [0,1]", request_id=req_id)
            pending.discard(req_id)
            scores[req_id] = score
        return scores

    def score_pairs(self, examples: Sequence[PairExample]) -> list[PairScore]:
        out: list[PairScore] = []
        batch: list[tuple[int, PairExample]] = []
        for ex in examples:
            batch.append((self._next_id, ex))
            self._next_id += 1
            if len(batch) >= self.batch_size:
                scores = self._score_batch(batch)
                out.extend(PairScore(e.form_name, e.question_id, e.answer_id, scores[i])
                           for i, e in batch)
                batch = []
        if batch:
            scores = self._score_batch(batch)
            out.extend(PairScore(e.form_name, e.question_id, e.answer_id, scores[i])
                       for i, e in batch)
        return out


def score_pairs(scorer: Scorer, examples: Sequence[PairExample]) -> list[PairScore]:
    """Score every example, order preserved, range enforced."""
    return _check_scores(scorer.score_pairs(examples))
