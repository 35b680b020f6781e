"""The benchmark query corpus (SQL + SXQL forms with restoration annotations)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True)
class CorpusQuery:
    id: str
    description: str
    sql: str
    sxql: str
    annotations: tuple[str, ...]


def load_corpus() -> list[CorpusQuery]:
    text = resources.files("skyql.data").joinpath("corpus.json").read_text("utf-8")
    doc = json.loads(text)
    return [
        CorpusQuery(q["id"], q["description"], q["sql"], q["sxql"],
                    tuple(q.get("annotations", ())))
        for q in doc["queries"]
    ]


def corpus_by_id() -> dict[str, CorpusQuery]:
    return {q.id: q for q in load_corpus()}
