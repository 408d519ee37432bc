"""Deterministic synthetic form corpus for tests and --fixtures runs.

Forms mimic the annotation schema on an 800x1000 page: question/answer
rows, occasional two-question answers (m=2), unlinked answers, a header
and an "other" entity. Roughly a third of the answers are displaced so
that the geometrically nearest question is the wrong one; the text
signal (question keyword vs answer value shape) stays intact, which is
what makes the corpus learnable for a text scorer while defeating the
nearest-question heuristic.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .funsd import BBox, Entity, EntityLabel, Form, Word, serialize_form

_FIRST = ["JOHN", "MARY", "ROBERT", "LINDA", "JAMES", "SUSAN", "DAVID", "KAREN"]
_LAST = ["SMITH", "JOHNSON", "BROWN", "DAVIS", "MILLER", "WILSON", "MOORE", "CLARK"]
_CITIES = ["RICHMOND", "LOUISVILLE", "WINSTON", "DURHAM", "ATLANTA", "MEMPHIS"]
_COMPANIES = ["ACME TOBACCO", "NATIONAL BRANDS", "UNITED RESEARCH", "GENERAL FOODS"]


def _value_generators(rng: random.Random) -> dict:
    return {
        "NAME:": lambda: f"{rng.choice(_FIRST)} {rng.choice(_LAST)}",
        "DATE:": lambda: f"{rng.randint(1, 12):02d}/{rng.randint(1, 28):02d}/19{rng.randint(80, 99)}",
        "TOTAL:": lambda: f"${rng.randint(1, 999)}.{rng.randint(0, 99):02d}",
        "PHONE:": lambda: f"(555) {rng.randint(100, 999)}-{rng.randint(1000, 9999)}",
        "CITY:": lambda: rng.choice(_CITIES),
        "COMPANY:": lambda: rng.choice(_COMPANIES),
    }

# paired follow-up question used for m=2 answers
_SECOND_QUESTION = {
    "NAME:": "FULL NAME:",
    "DATE:": "DATE SIGNED:",
    "TOTAL:": "AMOUNT DUE:",
    "PHONE:": "PHONE NO.:",
    "CITY:": "CITY/TOWN:",
    "COMPANY:": "FIRM:",
}


def _words_for(text: str, box: BBox) -> tuple[Word, ...]:
    parts = text.split(" ")
    if not parts:
        return ()
    step = box.width / len(parts)
    words = []
    for i, part in enumerate(parts):
        words.append(Word(text=part, box=BBox(box.x_min + i * step, box.y_min,
                                              box.x_min + (i + 1) * step, box.y_max)))
    return tuple(words)


def _entity(eid: int, label: EntityLabel, text: str, box: BBox,
            links: tuple[tuple[int, int], ...] = ()) -> Entity:
    return Entity(id=eid, label=label, box=box, words=_words_for(text, box),
                  links=links, raw_text=text)


def make_fixture_form(index: int, rng: random.Random) -> Form:
    gens = _value_generators(rng)
    kinds = rng.sample(list(gens), k=rng.randint(4, 6))
    builders = []  # (eid, label, text, box, link_pairs)
    next_id = 0

    def take() -> int:
        nonlocal next_id
        next_id += 1
        return next_id - 1

    header_id = take()
    # links to the first question: a header→question link, discarded by
    # gold-link extraction
    builders.append((header_id, EntityLabel.HEADER, "MEMORANDUM",
                     BBox(300, 10, 500, 34), [(header_id, header_id + 1)]))

    row_height = 90
    for i, kind in enumerate(kinds):
        y = 70 + row_height * i
        qid = take()
        q_box = BBox(40, y, 40 + 12 * len(kind), y + 20)
        value = gens[kind]()

        two_questions = rng.random() < 0.2
        qid2 = None
        if two_questions:
            qid2 = take()

        aid = take()
        displaced = i > 0 and rng.random() < 0.35
        if displaced:
            # sits between rows, geometrically nearer to the previous
            # row's question than to its own
            a_box = BBox(300, y - 55, 300 + 9 * len(value), y - 35)
        else:
            a_box = BBox(300, y, 300 + 9 * len(value), y + 20)

        links_q = [[qid, aid]]
        builders.append((qid, EntityLabel.QUESTION, kind, q_box,
                         [(qid, aid)]))
        if qid2 is not None:
            text2 = _SECOND_QUESTION[kind]
            builders.append((qid2, EntityLabel.QUESTION, text2,
                             BBox(40, y + 24, 40 + 10 * len(text2), y + 44),
                             [(qid2, aid)]))
            links_q.append([qid2, aid])
        a_links = [(q, a) for q, a in links_q]
        builders.append((aid, EntityLabel.ANSWER, value, a_box, a_links))

    # an unlinked answer (m = 0) in a side column
    if rng.random() < 0.7:
        stray_id = take()
        stray_val = gens[rng.choice(list(gens))]()
        stray_y = 120 + 40 * rng.randint(0, 8)
        builders.append((stray_id, EntityLabel.ANSWER, stray_val,
                         BBox(600, stray_y, 600 + 9 * len(stray_val), stray_y + 20),
                         []))

    other_id = take()
    builders.append((other_id, EntityLabel.OTHER, f"PAGE {index + 1}",
                     BBox(360, 960, 440, 980), []))

    entities = tuple(_entity(eid, label, text, box, tuple(links))
                     for eid, label, text, box, links in builders)
    return Form(name=f"fixture_{index:03d}", entities=entities)


def fixture_forms(count: int = 12, seed: int = 7, start_index: int = 0) -> list[Form]:
    rng = random.Random(seed)
    return [make_fixture_form(start_index + i, rng) for i in range(count)]


def fixture_split(n_train: int = 30, n_test: int = 12,
                  seed: int = 11) -> tuple[list[Form], list[Form]]:
    """Disjoint train/test fixture corpora drawn from the same generators."""
    rng = random.Random(seed)
    train = [make_fixture_form(i, rng) for i in range(n_train)]
    test = [make_fixture_form(n_train + i, rng) for i in range(n_test)]
    return train, test


def write_corpus(forms: list[Form], directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for form in forms:
        path = directory / f"{form.name}.json"
        path.write_text(json.dumps(serialize_form(form), ensure_ascii=False,
                                   indent=1) + "\n", encoding="utf-8")
