"""Serve a fine-tuned pair classifier over the wire protocol.

Reads request lines {"id", "question", "answer"} from stdin, writes
{"id", "score"} lines with the positive-class probability. Malformed
lines get a diagnostic on stderr (and an error response when the id is
recoverable); the process exits 0 on end-of-input.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import torch

from .config import ScorerConfig, resolve_device


def load_model(model_dir: str | Path, device: str | None = None):
    from transformers import (AutoModelForSequenceClassification,
                              AutoTokenizer)

    config = ScorerConfig.load(model_dir)
    device = device or resolve_device(config.device)
    tokenizer = AutoTokenizer.from_pretrained(model_dir)
    model = AutoModelForSequenceClassification.from_pretrained(model_dir)
    model.to(device)
    model.eval()
    return model, tokenizer, config, device


def score_batch(model, tokenizer, device, max_length,
                requests: list[dict]) -> list[dict]:
    enc = tokenizer([r["question"] for r in requests],
                    [r["answer"] for r in requests],
                    truncation=True, max_length=max_length, padding=True,
                    return_tensors="pt")
    enc = {k: v.to(device) for k, v in enc.items()}
    with torch.no_grad():
        logits = model(**enc).logits
    probs = torch.softmax(logits, dim=-1)[:, 1].tolist()
    return [{"id": r["id"], "score": float(p)}
            for r, p in zip(requests, probs)]


def serve(model_dir: str | Path, batch_size: int = 16,
          device: str | None = None, max_length: int | None = None,
          stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    model, tokenizer, config, device = load_model(model_dir, device)
    max_length = max_length or config.max_length

    pending: list[dict] = []

    def flush():
        nonlocal pending
        if not pending:
            return
        for response in score_batch(model, tokenizer, device, max_length,
                                    pending):
            stdout.write(json.dumps(response) + "\n")
        stdout.flush()
        pending = []

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            req_id = req["id"]
            question = req["question"]
            answer = req["answer"]
            if not isinstance(question, str) or not isinstance(answer, str):
                raise TypeError("question and answer must be strings")
        except Exception as exc:  # noqa: BLE001 - protocol: report and continue
            print(f"bad request line {line!r}: {exc}", file=stderr)
            req_id = None
            try:
                req_id = json.loads(line).get("id")
            except Exception:  # noqa: BLE001
                pass
            if req_id is not None:
                flush()  # keep response order sane around the error
                stdout.write(json.dumps({"id": req_id, "error": str(exc)}) + "\n")
                stdout.flush()
            continue
        pending.append({"id": req_id, "question": question, "answer": answer})
        if len(pending) >= batch_size:
            flush()
        elif not _more_input_ready(stdin):
            # no buffered input: answer now instead of stalling the client
            flush()
    flush()
    return 0


def _more_input_ready(stream) -> bool:
    import select

    try:
        fd = stream.fileno()
    except (OSError, AttributeError, ValueError):
        return False
    try:
        ready, _, _ = select.select([fd], [], [], 0)
    except (OSError, ValueError):
        return False
    return bool(ready)
