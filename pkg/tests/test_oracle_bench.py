"""The brute-force oracle itself, and benchmark harness plumbing."""

from __future__ import annotations

import pytest

from skyql.bench.harness import compare_to_oracle, engine_rows
from skyql.bench.oracle import OracleCatalog, oracle_execute
from skyql.errors import EvalError
from skyql.query import compile_query


def test_corpus_file_contents(corpus):
    assert len(corpus) == 26
    expected = {f"Q{i}" for i in list(range(1, 6)) + list(range(8, 12))
                + list(range(15, 32))}
    assert set(corpus) == expected
    for q in corpus.values():
        assert q.sql and q.sxql
    assert any(q.annotations for q in corpus.values())


def test_oracle_against_engine_whole_corpus(tiny_fed, tiny_flux, tiny_oracle, corpus):
    for q in corpus.values():
        cq = compile_query(q.sxql, tiny_fed, tiny_flux)
        ids_e, rows_e = engine_rows(tiny_fed, cq)
        _, rows_o, ids_o = oracle_execute(q.sxql, tiny_oracle)
        assert rows_o, f"{q.id} is degenerate on the tiny catalog"
        mismatch = compare_to_oracle(ids_e, rows_e, ids_o, rows_o)
        assert mismatch is None, f"{q.id}: {mismatch}"


def test_oracle_empty_csv(tmp_path, tiny_fed):
    import importlib
    load_mod = importlib.import_module("skyql.loader.load")
    schema = tiny_fed.schema
    for class_name, (fname, links) in load_mod.CSV_FILES.items():
        cols = load_mod._expected_columns(schema, class_name, links)
        (tmp_path / fname).write_text(",".join(cols) + "\n")
    cat = OracleCatalog(tmp_path, schema)
    _, rows, ids = oracle_execute("SELECT objID FROM Galaxy WHERE r < 99", cat)
    assert rows == [] and ids == []


def test_oracle_determinism(tiny_oracle, corpus):
    a = oracle_execute(corpus["Q2"].sxql, tiny_oracle)
    b = oracle_execute(corpus["Q2"].sxql, tiny_oracle)
    assert a == b


def test_oracle_errors_same_taxonomy(tiny_oracle):
    with pytest.raises(EvalError) as err:
        oracle_execute("SELECT objID FROM Galaxy WHERE 1.0/(rowv-rowv) > 2",
                       tiny_oracle)
    assert err.value.code == EvalError.DIVIDE_BY_ZERO


def test_compare_detects_mismatches():
    assert compare_to_oracle([1], [(1.0,)], [1], [(1.0,)]) is None
    assert compare_to_oracle([1], [(1.0,)], [2], [(1.0,)]) is not None
    assert compare_to_oracle([1], [(1.0,)], [1], [(1.1,)]) is not None
    assert compare_to_oracle([1, 1], [(1,), (1,)], [1], [(1,)]) is not None
    # 1e-9 relative tolerance for floats
    assert compare_to_oracle([1], [(1.0000000001,)], [1], [(1.0,)]) is None


def test_run_suite_single_repetition_well_formed(tiny_paths, tiny_oracle):
    from skyql.bench.harness import render_report, run_suite
    report = run_suite(str(tiny_paths["fed"]), str(tiny_paths["csv"]),
                       repetitions=1, query_ids=["Q3", "Q30", "Q31"],
                       oracle_catalog=tiny_oracle)
    assert not report["failed"]
    assert {e["id"] for e in report["queries"]} == {"Q3", "Q30", "Q31"}
    for e in report["queries"]:
        assert e["oracle_match"] and e["rows"] > 0
        for key in ("single_s", "striped_s", "single_count_s", "striped_count_s"):
            assert e[key] >= 0
    assert report["tag_vs_full"]["rows_agree"]
    assert report["extraction_modes"]["identical_rows"]
    text = render_report(report)
    assert "Q30" in text and "tag scan" in text
