import json
import string

import pytest


def build_tiny_checkpoint(directory):
    """A local base checkpoint so tests never download weights: a tiny
    randomly initialized BERT with a character-level WordPiece vocab."""
    from tokenizers import Tokenizer, models, pre_tokenizers, processors
    from transformers import BertConfig, BertForSequenceClassification, BertTokenizerFast

    directory.mkdir(parents=True, exist_ok=True)
    chars = list(string.ascii_lowercase + string.ascii_uppercase
                 + string.digits + string.punctuation)
    tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    tokens += chars + [f"##{c}" for c in chars]
    vocab = {token: index for index, token in enumerate(tokens)}
    wordpiece = Tokenizer(models.WordPiece(vocab, unk_token="[UNK]"))
    wordpiece.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    wordpiece.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]", pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])])
    wordpiece.save(str(directory / "base_tokenizer.json"))
    tokenizer = BertTokenizerFast(
        tokenizer_file=str(directory / "base_tokenizer.json"),
        do_lower_case=False, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]")
    tokenizer.save_pretrained(directory)

    # wider init than the BERT default (a randomly initialized net this
    # small produces near-constant pooled features otherwise) and no
    # dropout (its noise swamps the gradient signal of a 20-example task)
    config = BertConfig(vocab_size=len(vocab), hidden_size=32,
                        num_hidden_layers=2, num_attention_heads=2,
                        intermediate_size=64, max_position_embeddings=128,
                        num_labels=2, initializer_range=0.1,
                        hidden_dropout_prob=0.0,
                        attention_probs_dropout_prob=0.0)
    model = BertForSequenceClassification(config)
    model.save_pretrained(directory)
    return directory


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    return build_tiny_checkpoint(tmp_path_factory.mktemp("tiny_base"))


def toy_pairs_lines():
    """Linearly separable toy task: digits answer a DATE: question,
    names answer a NAME: question."""
    rows = []
    names = ["JOHN SMITH", "MARY BROWN", "ROBERT DAVIS", "LINDA CLARK",
             "JAMES MOORE"]
    dates = ["01/12/1988", "03/04/1991", "11/30/1985", "07/22/1990",
             "09/15/1987"]
    for i, (name, date) in enumerate(zip(names, dates)):
        rows.append({"form": "toy", "qid": 4 * i, "aid": 4 * i + 1,
                     "question": "NAME:", "answer": name, "distance": 40.0,
                     "same_row": True, "label": "valid"})
        rows.append({"form": "toy", "qid": 4 * i + 2, "aid": 4 * i + 1,
                     "question": "DATE:", "answer": name, "distance": 90.0,
                     "same_row": False, "label": "invalid"})
        rows.append({"form": "toy", "qid": 4 * i + 2, "aid": 4 * i + 3,
                     "question": "DATE:", "answer": date, "distance": 40.0,
                     "same_row": True, "label": "valid"})
        rows.append({"form": "toy", "qid": 4 * i, "aid": 4 * i + 3,
                     "question": "NAME:", "answer": date, "distance": 90.0,
                     "same_row": False, "label": "invalid"})
    return rows


@pytest.fixture(scope="session")
def toy_pairs_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("pairs") / "toy_pairs.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"_meta": {"tool": "test"}}) + "\n")
        for row in toy_pairs_lines():
            fh.write(json.dumps(row) + "\n")
    return path
