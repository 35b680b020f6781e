"""Benchmark harness, query corpus, and the brute-force oracle."""

from .corpus import CorpusQuery, corpus_by_id, load_corpus  # noqa: F401
from .harness import (  # noqa: F401
    compare_extraction_modes,
    compare_to_oracle,
    engine_rows,
    run_suite,
    tag_vs_full_scan,
)
from .oracle import OracleCatalog, oracle_execute  # noqa: F401
