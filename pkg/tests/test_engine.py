"""Engine semantics: predicate evaluation, bag algebra, streaming, error scoping."""

from __future__ import annotations

import threading
from collections import Counter

import numpy as np
import pytest

from skyql.engine.eval import ContainerFrame, eval_predicate, eval_vector
from skyql.engine.executor import (
    ExecutionContext,
    execute,
    execute_sequential,
)
from skyql.errors import Cancelled, EvalError
from skyql.planner import (
    BagLiteral,
    Difference,
    Distinct,
    Intersection,
    Union,
)
from skyql.query import compile_query
from skyql.sxql import expand_macros, parse, validate


def _pred(fed, class_name, text):
    tree = parse(f"SELECT objID FROM {class_name} WHERE {text}")
    bound = validate(expand_macros(tree, fed.schema), fed.schema)
    return bound.predicate


def _some_oid(fed, class_name="Galaxy"):
    ci = fed.containers_of({class_name})[0]
    return int(fed.scan_container(ci.database, ci.id)[0])


def test_eval_predicate_basics(tiny_fed):
    oid = _some_oid(tiny_fed)
    md = tiny_fed.schema.describe_member(tiny_fed.schema.classes["Tag"], "reddening")
    red2 = tiny_fed.read_value(oid, md, 2)
    expr = _pred(tiny_fed, "Galaxy", "reddening[2] > 0.175")
    assert eval_predicate(tiny_fed, oid, expr) == (red2 > 0.175)
    # zero flags: craft via bitwise and on a fresh mask that cannot be set
    expr = _pred(tiny_fed, "Galaxy", "(objFlags & 0x0) == 0")
    assert eval_predicate(tiny_fed, oid, expr) is True


def test_eval_predicate_divide_by_zero(tiny_fed):
    oid = _some_oid(tiny_fed)
    expr = _pred(tiny_fed, "Galaxy", "1.0 / (rowv - rowv) > 2")
    with pytest.raises(EvalError) as err:
        eval_predicate(tiny_fed, oid, expr)
    assert err.value.code == EvalError.DIVIDE_BY_ZERO


def test_eval_short_circuit_guards_errors(tiny_fed):
    oid = _some_oid(tiny_fed)
    expr = _pred(tiny_fed, "Galaxy", "(rowv - rowv) != 0 && 1.0 / (rowv - rowv) > 2")
    assert eval_predicate(tiny_fed, oid, expr) is False
    expr = _pred(tiny_fed, "Galaxy", "(rowv - rowv) == 0 || 1.0 / (rowv - rowv) > 2")
    assert eval_predicate(tiny_fed, oid, expr) is True


def test_eval_domain_errors(tiny_fed):
    oid = _some_oid(tiny_fed)
    for text, code in (
        ("LOG(0 - petroR50_r) > 1", EvalError.DOMAIN_ERROR),
        ("sqrt(0 - petroR50_r) > 1", EvalError.DOMAIN_ERROR),
        ("power(10, 400) > 1", EvalError.OVERFLOW),
    ):
        with pytest.raises(EvalError) as err:
            eval_predicate(tiny_fed, oid, _pred(tiny_fed, "Galaxy", text))
        assert err.value.code == code


def test_integer_division_truncates(tiny_fed):
    oid = _some_oid(tiny_fed)
    assert eval_predicate(tiny_fed, oid, _pred(tiny_fed, "Galaxy", "7/3 == 2"))
    assert eval_predicate(tiny_fed, oid, _pred(tiny_fed, "Galaxy", "(0-7)/3 == 0-2"))
    with pytest.raises(EvalError):
        eval_predicate(tiny_fed, oid, _pred(tiny_fed, "Galaxy", "7/(3-3) == 2"))


def test_scalar_vector_agreement_on_corpus(tiny_fed, tiny_flux, corpus):
    """The masked vector route and the scalar route decide identically."""
    rng = np.random.default_rng(4)
    for q in corpus.values():
        cq = compile_query(q.sxql, tiny_fed, tiny_flux)
        leaf = cq.qet
        while not hasattr(leaf, "scope"):
            leaf = leaf.child
        if leaf.predicate is None:
            continue
        entry = leaf.scope.entries[0]
        frame = ContainerFrame(tiny_fed, entry.database, entry.container)
        if frame.n == 0:
            continue
        res, _ = eval_vector(leaf.predicate, frame, np.ones(frame.n, bool))
        res = res if isinstance(res, np.ndarray) else np.full(frame.n, bool(res))
        oids = frame.oids()
        for i in rng.choice(frame.n, min(25, frame.n), replace=False):
            assert bool(res[i]) == eval_predicate(tiny_fed, int(oids[i]),
                                                  leaf.predicate), q.id


def _bags(rng, fed):
    pool = fed.scan_container(*_first_container(fed))
    def bag():
        n = rng.integers(0, 12)
        return pool[rng.integers(0, len(pool), n)]
    return bag


def _first_container(fed):
    ci = fed.containers_of({"Galaxy"})[0]
    return ci.database, ci.id


def _run(fed, node):
    ctx = ExecutionContext(fed=fed)
    n = execute(node, [], ctx, count_only=True)
    seq = execute_sequential(node, fed)
    assert n == len(seq)
    return Counter(seq.tolist())


def test_set_operation_laws(tiny_fed):
    rng = np.random.default_rng(10)
    bag = _bags(rng, tiny_fed)
    lit = lambda b: BagLiteral(b, "Galaxy")  # noqa: E731
    for _ in range(300):
        a, b, c = bag(), bag(), bag()
        ca, cb, cc = Counter(a.tolist()), Counter(b.tolist()), Counter(c.tolist())
        assert _run(tiny_fed, Union([lit(a), lit(b), lit(c)])) == ca + cb + cc
        assert _run(tiny_fed, Union([lit(a), lit(np.zeros(0, np.uint64))])) == ca
        assert _run(tiny_fed, Intersection(lit(a), lit(b))) == ca & cb
        assert _run(tiny_fed, Intersection(lit(a), lit(np.zeros(0, np.uint64)))) == Counter()
        assert _run(tiny_fed, Difference(lit(a), lit(b))) == ca - cb
        assert _run(tiny_fed, Difference(lit(a), lit(a))) == Counter()
        dist = _run(tiny_fed, Distinct(lit(a)))
        assert dist == Counter(set(a.tolist()))
        assert _run(tiny_fed, Distinct(Distinct(lit(a)))) == dist


def test_multiset_examples(tiny_fed):
    pool = tiny_fed.scan_container(*_first_container(tiny_fed))
    a, b = int(pool[0]), int(pool[1])
    lit = lambda xs: BagLiteral(np.array(xs, np.uint64), "Galaxy")  # noqa: E731
    assert _run(tiny_fed, Distinct(lit([a, a, b]))) == Counter([a, b])
    assert _run(tiny_fed, Difference(lit([a, a, b]), lit([a]))) == Counter([a, b])
    assert _run(tiny_fed, Intersection(lit([a, a, b]), lit([a, b, b]))) == Counter([a, b])


def test_streamed_equals_sequential(tiny_fed, tiny_flux, corpus):
    for qid in ("Q2", "Q10", "Q17", "Q30"):
        cq = compile_query(corpus[qid].sxql, tiny_fed, tiny_flux)
        seq = Counter(execute_sequential(cq.qet, tiny_fed).tolist())
        ctx = ExecutionContext(fed=tiny_fed)
        stream = execute(cq.qet, cq.select, ctx, class_name=cq.output_class)
        got = Counter()
        for block in stream.blocks():
            got.update(block.oids.tolist())
        assert got == seq, qid


def test_cancellation_mid_stream(tiny_fed, tiny_flux):
    cq = compile_query("SELECT objID FROM PhotoTag", tiny_fed, tiny_flux)
    ctx = ExecutionContext(fed=tiny_fed, chunk_size=64)
    stream = execute(cq.qet, cq.select, ctx, class_name=cq.output_class)
    it = stream.blocks()
    next(it)
    ctx.cancel.set()
    with pytest.raises(Cancelled):
        for _ in it:
            pass


def test_error_isolation_concurrent_queries(tiny_fed, tiny_flux):
    good = compile_query("SELECT objID FROM Galaxy WHERE r < 23", tiny_fed, tiny_flux)
    bad = compile_query("SELECT objID FROM Galaxy WHERE 1.0/(rowv-rowv) > 2",
                        tiny_fed, tiny_flux)
    expected = execute(good.qet, good.select, ExecutionContext(fed=tiny_fed),
                       count_only=True)
    results = {}

    def run(tag, cq):
        try:
            results[tag] = execute(cq.qet, cq.select, ExecutionContext(fed=tiny_fed),
                                   count_only=True)
        except EvalError as exc:
            results[tag] = exc

    threads = [threading.Thread(target=run, args=(i, bad if i == 0 else good))
               for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert isinstance(results[0], EvalError)
    for i in (1, 2, 3):
        assert results[i] == expected


def test_extraction_math_matches_oracle_row(tiny_fed, tiny_flux, tiny_oracle, corpus):
    from skyql.bench.harness import engine_rows
    from skyql.bench.oracle import oracle_execute
    cq = compile_query(corpus["Q15"].sxql, tiny_fed, tiny_flux)
    ids_e, rows_e = engine_rows(tiny_fed, cq)
    _, rows_o, ids_o = oracle_execute(corpus["Q15"].sxql, tiny_oracle)
    by_e = dict(zip(ids_e, rows_e))
    by_o = dict(zip(ids_o, rows_o))
    assert set(by_e) == set(by_o) and by_e
    for k in by_e:
        assert by_e[k][1] == pytest.approx(by_o[k][1], rel=1e-9)  # sqrt speed column
