"""Fine-tune a pretrained sequence-pair classifier on a pairs file.

The pairs file is the formlink JSONL format: data lines with keys
{form, qid, aid, question, answer, distance, same_row, label}; the
optional {"_meta": ...} header line is skipped. Only valid/invalid
lines are used; question and answer texts feed the model as the two
segments of a sequence pair.
"""

from __future__ import annotations

import json
import logging
import random
from pathlib import Path

import torch
from torch.utils.data import DataLoader, Dataset

from .config import ScorerConfig, resolve_device

log = logging.getLogger("reference_scorer")


def read_pairs_file(path: str | Path) -> list[tuple[str, str, int]]:
    """(question, answer, label) triples; label 1 for valid pairs."""
    triples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith('{"_meta"'):
                continue
            rec = json.loads(line)
            if rec["label"] == "unlabeled":
                continue
            triples.append((rec["question"], rec["answer"],
                            1 if rec["label"] == "valid" else 0))
    return triples


class PairDataset(Dataset):
    def __init__(self, triples, tokenizer, max_length):
        self.triples = triples
        self.tokenizer = tokenizer
        self.max_length = max_length

    def __len__(self):
        return len(self.triples)

    def __getitem__(self, idx):
        question, answer, label = self.triples[idx]
        enc = self.tokenizer(question, answer, truncation=True,
                             max_length=self.max_length,
                             padding="max_length", return_tensors="pt")
        return ({k: v.squeeze(0) for k, v in enc.items()},
                torch.tensor(label, dtype=torch.long))


def finetune(pairs_path: str | Path, out_dir: str | Path,
             config: ScorerConfig = ScorerConfig()) -> Path:
    """Train and save the classifier; returns the model directory."""
    from transformers import (AutoModelForSequenceClassification,
                              AutoTokenizer, set_seed)

    triples = read_pairs_file(pairs_path)
    if not triples:
        raise ValueError(f"{pairs_path}: no labeled pairs")
    labels = {label for _, _, label in triples}
    if len(labels) < 2:
        raise ValueError(f"{pairs_path}: training data has a single class")

    set_seed(config.seed)
    device = resolve_device(config.device)
    tokenizer = AutoTokenizer.from_pretrained(config.model_name)
    model = AutoModelForSequenceClassification.from_pretrained(
        config.model_name, num_labels=2)
    model.to(device)
    model.train()

    dataset = PairDataset(triples, tokenizer, config.max_length)
    generator = torch.Generator().manual_seed(config.seed)
    loader = DataLoader(dataset, batch_size=config.batch_size, shuffle=True,
                        generator=generator)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)

    for epoch in range(config.epochs):
        total = 0.0
        for encodings, targets in loader:
            encodings = {k: v.to(device) for k, v in encodings.items()}
            targets = targets.to(device)
            out = model(**encodings, labels=targets)
            out.loss.backward()
            optimizer.step()
            optimizer.zero_grad()
            total += out.loss.item() * targets.shape[0]
        epoch_loss = total / len(dataset)
        log.info("epoch %d/%d: loss %.4f", epoch + 1, config.epochs, epoch_loss)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    config.save(out_dir)
    return out_dir
