"""Acceptance criteria against the 10^5-object reference catalog.

One test per criterion; each prints a [PASS]/[SKIP] line (run with -s to watch).
Criteria that the spec conditions on >= 4 cores are measured here regardless and
asserted only when the condition holds.
"""

from __future__ import annotations

import math
import os
import statistics
import time
import numpy as np
import pytest

pytestmark = pytest.mark.slow

from skyql import htm
from skyql.agent import AgentConfig, QueryAgent, connect
from skyql.agent.server import partition_leaf_runner
from skyql.agent.slave import SlaveCluster
from skyql.bench.harness import (
    _median_time,
    compare_to_oracle,
    engine_rows,
    tag_vs_full_scan,
    timed_run,
)
from skyql.bench.oracle import OracleCatalog, oracle_execute
from skyql.engine.executor import ExecutionContext, execute
from skyql.loader import export_csv, generate_synthetic, load
from skyql.query import compile_query, load_flux
from skyql.storage import Federation

from conftest import agent_users

REF_N = 100_000
REF_SEED = 42

_oracle_cache: dict = {}


@pytest.fixture(scope="module")
def ref(tmp_path_factory):
    root = tmp_path_factory.mktemp("reference")
    csv_dir = root / "csv"
    fed_dir = root / "fed"
    t0 = time.perf_counter()
    generate_synthetic(REF_N, REF_SEED, csv_dir)
    manifest = load(csv_dir, partitions=3, htm_depth=8, out_federation=fed_dir,
                    generator_seed=REF_SEED)
    fed = Federation(fed_dir)
    flux = load_flux(fed)
    catalog = OracleCatalog(csv_dir, fed.schema)
    cluster = SlaveCluster(str(fed_dir), 3)
    print(f"\n[setup] reference catalog built in {time.perf_counter()-t0:.0f}s "
          f"(counts {manifest.class_counts})")
    yield {
        "csv": csv_dir, "fed_dir": fed_dir, "fed": fed, "flux": flux,
        "oracle": catalog, "cluster": cluster, "root": root,
        "manifest": manifest,
    }
    cluster.stop()


def test_criterion_corpus_correctness(ref, corpus):
    fed, flux, catalog = ref["fed"], ref["flux"], ref["oracle"]
    t0 = time.perf_counter()
    failures = []
    for q in corpus.values():
        cq = compile_query(q.sxql, fed, flux)
        ids_e, rows_e = engine_rows(fed, cq)
        names_o, rows_o, ids_o = oracle_execute(q.sxql, catalog)
        _oracle_cache[q.id] = (names_o, rows_o, ids_o)
        assert rows_o, f"{q.id} returned no rows on the reference catalog"
        mismatch = compare_to_oracle(ids_e, rows_e, ids_o, rows_o)
        if mismatch:
            failures.append(f"{q.id}: {mismatch}")
    elapsed = time.perf_counter() - t0
    assert not failures, failures
    assert elapsed < 600, f"corpus suite took {elapsed:.0f}s (budget 600s)"
    print(f"[PASS] corpus correctness: all {len(corpus)} queries match the oracle "
          f"exactly in {elapsed:.0f}s")


def test_criterion_htm_soundness(ref):
    fed = ref["fed"]
    depth = fed.htm_depth
    # gather every tag object's unit vector and container
    vecs = []
    containers = []
    ranges = {}
    for ci in fed.containers_of({"Galaxy", "Star", "Sky", "Unknown"}):
        x = fed.column(ci.database, ci.id, "cx").astype(np.float64)
        y = fed.column(ci.database, ci.id, "cy").astype(np.float64)
        z = fed.column(ci.database, ci.id, "cz").astype(np.float64)
        vecs.append(np.stack([x, y, z], axis=1))
        containers.append(np.full(len(x), len(ranges), dtype=np.int64))
        ranges[len(ranges)] = (ci.trixel_lo, ci.trixel_hi)
    pts = np.concatenate(vecs)
    cont_idx = np.concatenate(containers)

    rng = np.random.default_rng(17)
    violations = 0
    for _ in range(1000):
        ra = rng.uniform(0, 360)
        dec = rng.uniform(-5, 5) if rng.random() < 0.8 else rng.uniform(-90, 90)
        radius = rng.uniform(0.2, 120.0)
        cone = htm.ConeRegion(ra, dec, radius)
        c = np.array(cone.center_vector)
        inside = (pts @ c) >= math.cos(cone.radius_rad)
        if not inside.any():
            continue
        full, partial = htm.cone_intersect(cone, depth)
        covered_ranges = [htm.leaf_range(t, depth) for t in full + partial]
        covered_containers = {
            k for k, (lo, hi) in ranges.items()
            if any(not (hi < rlo or lo > rhi) for rlo, rhi in covered_ranges)
        }
        bad = set(np.unique(cont_idx[inside])) - covered_containers
        violations += len(bad)
    assert violations == 0
    print("[PASS] HTM soundness: 1000 random cones, zero objects escaped the cover")

    n_pts = 100_000
    z = rng.uniform(-1, 1, n_pts)
    phi = rng.uniform(0, 2 * np.pi, n_pts)
    r = np.sqrt(1 - z * z)
    p = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    ra = np.degrees(np.arctan2(p[:, 1], p[:, 0])) % 360.0
    dec = np.degrees(np.arcsin(np.clip(p[:, 2], -1, 1)))
    trix = htm.trixel_of_array(ra, dec, 8)
    # edge-plane oracle, vectorized per distinct trixel
    order = np.argsort(trix)
    trix_sorted = trix[order]
    p_sorted = p[order]
    cut = np.flatnonzero(np.diff(trix_sorted)) + 1
    starts = np.concatenate(([0], cut))
    ends = np.concatenate((cut, [n_pts]))
    bad = 0
    for s, e in zip(starts, ends):
        tri = htm.trixel_vertices(int(trix_sorted[s]))
        block = p_sorted[s:e]
        ok = np.ones(e - s, dtype=bool)
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            n_vec = np.cross(np.array(a), np.array(b))
            ok &= block @ n_vec >= 0
        bad += int((~ok).sum())
    assert bad == 0
    print(f"[PASS] HTM point location: {n_pts} random points all inside their "
          f"located trixel per the edge-plane oracle")


def test_criterion_striping(ref, corpus):
    fed, flux, cluster = ref["fed"], ref["flux"], ref["cluster"]
    runner = partition_leaf_runner(cluster.partition_map(fed), cluster.secret)
    speedups = {}
    full_speedups = {}
    for qid in ("Q15", "Q17", "Q31"):
        cq = compile_query(corpus[qid].sxql, fed, flux)
        single = _median_time(fed, cq, None, True, 5)
        striped = _median_time(fed, cq, runner, True, 5)
        speedups[qid] = single / striped
        f_single = _median_time(fed, cq, None, False, 3)
        f_striped = _median_time(fed, cq, runner, False, 3)
        full_speedups[qid] = f_single / f_striped
    med = statistics.median(speedups.values())
    cpus = os.cpu_count() or 1
    line = (f"striping: count-only speedups {dict((k, round(v, 2)) for k, v in speedups.items())}"
            f" (median {med:.2f}), full-run {dict((k, round(v, 2)) for k, v in full_speedups.items())}"
            f" on {cpus} cores")
    if cpus >= 4:
        assert med >= 1.5, line
        print(f"[PASS] {line}")
    else:
        print(f"[SKIP] {line}; the >=1.5x assertion applies on >=4 cores")
        pytest.skip(f"criterion conditioned on >=4 cores; host has {cpus}: {line}")


def test_criterion_tag_acceleration(ref):
    result = tag_vs_full_scan(ref["fed"], repetitions=5)
    assert result["rows_agree"]
    assert result["speedup"] >= 3.0, result
    print(f"[PASS] tag acceleration: {result['speedup']:.2f}x scan speedup at an "
          f"achieved tag/full byte ratio of {result['byte_ratio']:.2f}x")


def test_criterion_count_only_ratio(ref, corpus):
    fed, flux, cluster = ref["fed"], ref["flux"], ref["cluster"]
    runner = partition_leaf_runner(cluster.partition_map(fed), cluster.secret)
    cq = compile_query(corpus["Q31"].sxql, fed, flux)  # the widest-output query
    full = _median_time(fed, cq, runner, False, 3)
    count = _median_time(fed, cq, runner, True, 3)
    ratio = count / full
    assert ratio < 0.7, f"count-only/full = {ratio:.2f}"
    print(f"[PASS] count-only: Q31 striped master-side count/full ratio {ratio:.2f} < 0.7")


def test_criterion_q30_vs_q31(ref, corpus):
    fed, flux, cluster = ref["fed"], ref["flux"], ref["cluster"]
    runner = partition_leaf_runner(cluster.partition_map(fed), cluster.secret)
    t30 = {"single": _median_time(fed, compile_query(corpus["Q30"].sxql, fed, flux),
                                  None, False, 3),
           "striped": _median_time(fed, compile_query(corpus["Q30"].sxql, fed, flux),
                                   runner, False, 3)}
    t31 = {"single": _median_time(fed, compile_query(corpus["Q31"].sxql, fed, flux),
                                  None, False, 3),
           "striped": _median_time(fed, compile_query(corpus["Q31"].sxql, fed, flux),
                                   runner, False, 3)}
    for config in ("single", "striped"):
        assert t31[config] > t30[config], (t30, t31)
    gap = {c: t31[c] / t30[c] for c in t30}
    print(f"[PASS] Q31 strictly slower than Q30 in every configuration "
          f"(x{gap['single']:.1f} single, x{gap['striped']:.1f} striped)")


def test_criterion_regression_trio(ref, corpus):
    fed, flux, catalog = ref["fed"], ref["flux"], ref["oracle"]
    # (a) float32 array element addressing across all five bands
    for k in range(5):
        text = (f"SELECT reddening[{k}], petroRad[{k}], psfMag[{k}] FROM Galaxy "
                f"WHERE psfMag[{k}] < 19 && petroRad[{k}] > 3")
        cq = compile_query(text, fed, flux)
        ids_e, rows_e = engine_rows(fed, cq)
        _, rows_o, ids_o = oracle_execute(text, catalog)
        assert rows_o
        mismatch = compare_to_oracle(ids_e, rows_e, ids_o, rows_o)
        assert mismatch is None, f"element {k}: {mismatch}"
    print("[PASS] regression (a): float32 array element n reads element n for n in 0..4")

    # (b) scope and index choice invariant under predicate permutation
    import itertools
    scopes = []
    for perm in itertools.permutations(["i < 11", "r < 13", "z < 9"]):
        text = "SELECT objID FROM PhotoTag WHERE " + " && ".join(perm)
        scopes.append(compile_query(text, fed, flux).scope.entries)
    assert all(s == scopes[0] for s in scopes[1:])
    print("[PASS] regression (b): scope invariant under permutation of "
          "(i < 11 && r < 13 && z < 9)")

    # (c) a divide-by-zero query fails alone; three concurrent sessions finish;
    # the agent accepts a new session within one second
    config = AgentConfig(federation=str(ref["fed_dir"]), tcp_port=0,
                         users=agent_users(), output_root=str(ref["root"]))
    agent = QueryAgent(config)
    agent.start()
    try:
        import threading
        results = {}

        def run(i):
            c = connect("127.0.0.1", agent.tcp_port, "astro", "orion")
            if i == 0:
                qid, _ = c.estimate("SELECT objID FROM Galaxy WHERE 1.0/(rowv-rowv) > 2")
                results[i] = c.run(qid)
            else:
                qid, _ = c.estimate("SELECT objID FROM Galaxy WHERE r < 22 AND reddening[2] > 0.175")
                results[i] = c.run(qid, count_only=True)
            c.close()

        threads = [threading.Thread(target=run, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=120)
        assert results[0].state == "Failed"
        assert results[0].error["code"] == "DivideByZero"
        counts = {results[i].count for i in (1, 2, 3)}
        assert len(counts) == 1 and all(results[i].state == "Done" for i in (1, 2, 3))
        t0 = time.perf_counter()
        c = connect("127.0.0.1", agent.tcp_port, "astro", "orion")
        dt = time.perf_counter() - t0
        c.close()
        assert dt < 1.0
        print(f"[PASS] regression (c): divide-by-zero failed alone, 3 sessions "
              f"finished, new session accepted in {dt*1000:.0f} ms")
    finally:
        agent.stop()


def test_criterion_loader_round_trip(ref, corpus):
    fed = ref["fed"]
    out_csv = ref["root"] / "exported"
    out_fed = ref["root"] / "fed2"
    export_counts = export_csv(fed, out_csv)
    manifest2 = load(out_csv, partitions=3, htm_depth=8, out_federation=out_fed)
    assert manifest2.class_counts == fed.manifest["class_counts"]
    assert export_counts["PhotoObj"] == fed.manifest["class_counts"]["PhotoObj"]
    fed2 = Federation(out_fed)
    flux2 = load_flux(fed2)
    assert _oracle_cache, "corpus correctness must run first"
    for q in corpus.values():
        cq = compile_query(q.sxql, fed2, flux2)
        ids_e, rows_e = engine_rows(fed2, cq)
        _names_o, rows_o, ids_o = _oracle_cache[q.id]
        mismatch = compare_to_oracle(ids_e, rows_e, ids_o, rows_o)
        assert mismatch is None, f"{q.id} after round trip: {mismatch}"
    print("[PASS] loader round trip: export+reload reproduces every corpus result; "
          "class counts conserved exactly")


def test_criterion_protocol_fuzz(ref):
    import random
    from skyql.agent.protocol import _LEGAL

    config = AgentConfig(federation=str(ref["fed_dir"]), tcp_port=0,
                         users=agent_users(), output_root=str(ref["root"]))
    agent = QueryAgent(config)
    agent.start()
    rng = random.Random(31415)
    observed = []

    class FuzzConn:
        def __init__(self):
            self.session = None
            self.hello = False

        def send(self, msg, payload=None):
            pass

        def close(self):
            pass

    try:
        for _ in range(10_000):
            conn = FuzzConn()
            for _ in range(rng.randint(1, 6)):
                roll = rng.random()
                if roll < 0.25:
                    msg = {"type": "AUTH", "user": "astro",
                           "password": rng.choice(["orion", "x"])}
                elif roll < 0.5:
                    msg = {"type": "ESTIMATE", "sxql": rng.choice(
                        ["SELECT objID FROM Galaxy WHERE r < 14",
                         "SELECT nonsense FROM", "SELECT objID FROM Galaxy"])}
                elif roll < 0.75:
                    msg = {"type": "RUN", "query_id": rng.randint(1, 5),
                           "count_only": True}
                elif roll < 0.9:
                    msg = {"type": "CANCEL", "query_id": rng.randint(1, 5)}
                else:
                    msg = rng.choice([{"type": "HELLO"}, {"type": "ZZZ"}, {}])
                agent.handle(conn, msg)
            if conn.session is not None:
                observed.extend(conn.session.jobs.values())
                with agent._slock:
                    agent.sessions.pop(conn.session.session_id, None)
        time.sleep(1.0)
        legal = {(a.value, b.value) for a, succ in _LEGAL.items() for b in succ}
        for job in observed:
            for t in job.transitions:
                assert tuple(t.split("->")) in legal, t
        print(f"[PASS] protocol fuzz: 10000 randomized sequences, no crash, "
              f"{sum(len(j.transitions) for j in observed)} transitions all legal")
    finally:
        agent.stop()


def test_engine_pipelining_at_scale(ref):
    """ASAP push: first rows appear long before a full tag scan completes."""
    fed, flux = ref["fed"], ref["flux"]
    cq = compile_query("SELECT objID, u, g, r, i, z FROM PhotoTag", fed, flux)
    timed_run(fed, cq)  # warm
    ctx = ExecutionContext(fed=fed, chunk_size=2048)
    t0 = time.perf_counter()
    stream = execute(cq.qet, cq.select, ctx, class_name=cq.output_class)
    first = None
    n = 0
    for block in stream.blocks():
        if first is None:
            first = time.perf_counter() - t0
        n += len(block)
    total = time.perf_counter() - t0
    assert n == REF_N
    assert first < 0.1 * total, f"first block at {first*1000:.1f}ms of {total*1000:.1f}ms"
    print(f"[PASS] pipelining: first rows after {first*1000:.1f} ms of a "
          f"{total*1000:.1f} ms full tag scan ({first/total:.1%})")
