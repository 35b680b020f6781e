#!/usr/bin/env python3
"""Regenerate frontend/src/examples.ts from the benchmark corpus."""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
corpus = json.loads((ROOT / "src/skyql/data/corpus.json").read_text())["queries"]

lines = [
    "// Example queries (generated from src/skyql/data/corpus.json by",
    "// tools/make_frontend_examples.py; do not edit by hand).",
    "",
    "export interface Example { id: string; description: string; sxql: string; }",
    "",
    "export const EXAMPLES: Example[] = [",
]
for q in corpus:
    sxql = json.dumps(q["sxql"])
    desc = json.dumps(q["description"])
    lines.append(f'  {{ id: "{q["id"]}", description: {desc}, sxql: {sxql} }},')
lines.append("];")
out = ROOT / "frontend/src/examples.ts"
out.write_text("\n".join(lines) + "\n")
print(f"wrote {out} ({len(corpus)} examples)")
