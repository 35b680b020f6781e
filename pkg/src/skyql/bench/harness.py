"""Benchmark harness: the query suite against the brute-force oracle, single vs
striped configurations, count-only ratios, tag-vs-full scan speed, Q30/Q31 ordering.

Timing discipline: one warm-up run, then the median of N repetitions; queries run
serially so the system under test supplies all the parallelism.
"""

from __future__ import annotations

import os
import platform
import statistics
import time
from collections import Counter

from ..agent.server import partition_leaf_runner
from ..agent.slave import SlaveCluster
from ..engine.eval import gather_member
from ..engine.executor import ExecutionContext, execute
from ..planner import container_bytes
from ..query import CompiledQuery, compile_query, load_flux
from ..storage import Federation
from .corpus import load_corpus
from .oracle import OracleCatalog, oracle_execute

REL_TOL = 1e-9


# -- correctness ---------------------------------------------------------------------

def engine_rows(fed: Federation, cq: CompiledQuery, ctx: ExecutionContext | None = None):
    """(ids, rows) extracted by the engine for comparison with the oracle."""
    ctx = ctx or ExecutionContext(fed=fed)
    ident = fed.schema.identity_member(cq.bound.cls)
    stream = execute(cq.qet, cq.select, ctx, class_name=cq.output_class)
    ids: list[int] = []
    rows: list[tuple] = []
    for block in stream.blocks():
        idv = gather_member(fed, block.oids, None, ident)
        ids.extend(int(x) for x in idv)
        rows.extend(block.rows())
    return ids, rows


def _values_match(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, float) or isinstance(b, float):
        fa, fb = float(a), float(b)
        if fa == fb:
            return True
        return abs(fa - fb) <= REL_TOL * max(abs(fa), abs(fb))
    return a == b


def compare_to_oracle(ids_e: list[int], rows_e: list[tuple],
                      ids_o: list[int], rows_o: list[tuple]) -> str | None:
    """None when the engine matches the oracle; otherwise a description."""
    if Counter(ids_e) != Counter(ids_o):
        ce, co = Counter(ids_e), Counter(ids_o)
        extra = (ce - co).most_common(2)
        missing = (co - ce).most_common(2)
        return (f"id multisets differ: engine {len(ids_e)} oracle {len(ids_o)}"
                f" extra={extra} missing={missing}")
    by_e: dict[int, tuple] = {}
    by_o: dict[int, tuple] = {}
    for i, r in zip(ids_e, rows_e):
        by_e.setdefault(i, r)
    for i, r in zip(ids_o, rows_o):
        by_o.setdefault(i, r)
    for k, ro in by_o.items():
        re = by_e[k]
        if len(re) != len(ro):
            return f"row arity differs for id {k}"
        for a, b in zip(re, ro):
            if not _values_match(a, b):
                return f"value differs for id {k}: engine {a!r} oracle {b!r}"
    return None


# -- timing --------------------------------------------------------------------------

def timed_run(fed: Federation, cq: CompiledQuery, leaf_runner=None,
              count_only: bool = False) -> tuple[float, int]:
    ctx = ExecutionContext(fed=fed, leaf_runner=leaf_runner)
    t0 = time.perf_counter()
    if count_only:
        n = execute(cq.qet, cq.select, ctx, count_only=True, class_name=cq.output_class)
    else:
        n = 0
        stream = execute(cq.qet, cq.select, ctx, class_name=cq.output_class)
        for block in stream.blocks():
            n += len(block)
    return time.perf_counter() - t0, n


def _median_time(fed, cq, leaf_runner, count_only, repetitions, warmup=1):
    for _ in range(warmup):
        timed_run(fed, cq, leaf_runner, count_only)
    times = [timed_run(fed, cq, leaf_runner, count_only)[0] for _ in range(repetitions)]
    return statistics.median(times)


# -- sections ------------------------------------------------------------------------

def tag_vs_full_scan(fed: Federation, repetitions: int = 3) -> dict:
    """Exhaustive predicate scan over tag containers vs the same over full objects."""
    flux = load_flux(fed)
    predicate = "petroMag[2] - reddening[2] < 19.2"
    tag_q = compile_query(f"SELECT objID FROM PhotoTag WHERE {predicate}", fed, flux)
    full_q = compile_query(f"SELECT objID FROM PhotoObj WHERE {predicate}", fed, flux)
    t_tag = _median_time(fed, tag_q, None, True, repetitions)
    t_full = _median_time(fed, full_q, None, True, repetitions)
    n_tag = timed_run(fed, tag_q, None, True)[1]
    n_full = timed_run(fed, full_q, None, True)[1]
    tag_bytes = sum(container_bytes(fed, e.database, e.container)
                    for e in tag_q.scope.entries)
    full_bytes = sum(container_bytes(fed, e.database, e.container)
                     for e in full_q.scope.entries)
    return {
        "predicate": predicate,
        "tag_seconds": t_tag,
        "full_seconds": t_full,
        "speedup": t_full / t_tag if t_tag > 0 else float("inf"),
        "tag_bytes": tag_bytes,
        "full_bytes": full_bytes,
        "byte_ratio": full_bytes / tag_bytes if tag_bytes else float("inf"),
        "rows_agree": n_tag == n_full,
    }


def compare_extraction_modes(fed: Federation, cluster: SlaveCluster,
                             query_sxql: str, repetitions: int = 3) -> dict:
    """Master-side vs slave-side extraction for a single-leaf, high-row-count query."""
    flux = load_flux(fed)
    cq = compile_query(query_sxql, fed, flux)
    pmap = cluster.partition_map(fed)
    runner = partition_leaf_runner(pmap, cluster.secret)

    def run_master(count_only=False):
        return timed_run(fed, cq, runner, count_only)

    def run_slave_extract():
        t0 = time.perf_counter()
        rows = 0
        chunks = _slave_extract(fed, cq, pmap, cluster.secret)
        payloads = []
        for count, payload in chunks:
            rows += count
            payloads.append(payload)
        return time.perf_counter() - t0, rows, b"".join(payloads)

    run_master()  # warm
    master_full = statistics.median(run_master()[0] for _ in range(repetitions))
    master_count = statistics.median(run_master(True)[0] for _ in range(repetitions))
    run_slave_extract()  # warm
    ts = []
    slave_csv = b""
    for _ in range(repetitions):
        t, rows, slave_csv = run_slave_extract()
        ts.append(t)
    slave_full = statistics.median(ts)

    # answers must be identical row for row across placements
    from ..agent.server import block_csv_lines
    ctx = ExecutionContext(fed=fed, leaf_runner=runner)
    stream = execute(cq.qet, cq.select, ctx, class_name=cq.output_class)
    master_lines = sorted("".join(
        block_csv_lines(b) for b in stream.blocks()).splitlines())
    slave_lines = sorted(slave_csv.decode("utf-8").splitlines())
    return {
        "query": query_sxql,
        "master_full_s": master_full,
        "master_count_s": master_count,
        "slave_extract_full_s": slave_full,
        "count_over_full": master_count / master_full if master_full else 1.0,
        "identical_rows": master_lines == slave_lines,
    }


def _slave_extract(fed, cq, pmap, secret):
    from ..planner import ScopedQuery, map_partitions
    from ..agent.server import slave_fetch_rows, block_csv_lines
    from ..engine.executor import extract_block, scan_scoped_chunks
    from ..sxql.ast import expr_to_json
    node = cq.qet
    assert isinstance(node, ScopedQuery)
    select_doc = [{"expr": expr_to_json(i.expr), "name": i.name,
                   "array_length": i.array_length} for i in cq.select]
    ctx = ExecutionContext(fed=fed)
    for pid, sub in map_partitions(node.scope, pmap):
        partition = next(p for p in pmap.partitions if p.id == pid)
        sub_node = ScopedQuery(node.class_name, sub, node.predicate)
        if partition.locality == "remote":
            yield from slave_fetch_rows(partition.endpoint, secret, sub_node,
                                        select_doc, cq.output_class, ctx)
        else:
            for chunk in scan_scoped_chunks(sub_node, ctx):
                block = extract_block(fed, chunk, cq.output_class, cq.select)
                yield len(block), block_csv_lines(block).encode("utf-8")


# -- the suite ------------------------------------------------------------------------

def run_suite(federation: str, csv_dir: str, repetitions: int = 5,
              query_ids: list[str] | None = None, striped_partitions: int = 3,
              cold: bool = False, oracle_catalog: OracleCatalog | None = None,
              cluster: SlaveCluster | None = None) -> dict:
    fed = Federation(federation)
    flux = load_flux(fed)
    corpus = [q for q in load_corpus() if query_ids is None or q.id in query_ids]
    catalog = oracle_catalog or OracleCatalog(csv_dir, fed.schema)

    own_cluster = cluster is None
    if own_cluster:
        cluster = SlaveCluster(federation, striped_partitions)
    try:
        pmap = cluster.partition_map(fed)
        striped_runner = partition_leaf_runner(pmap, cluster.secret)
        report = {
            "environment": {
                "python": platform.python_version(),
                "cpus": os.cpu_count(),
                "platform": platform.platform(),
            },
            "catalog": {
                "federation": str(federation),
                "class_counts": fed.manifest.get("class_counts", {}),
                "scan_rate_bytes_per_s": fed.manifest.get("scan_rate_bytes_per_s"),
            },
            "repetitions": repetitions,
            "cold": cold,
            "queries": [],
            "failed": False,
        }
        for q in corpus:
            entry = {"id": q.id, "description": q.description}
            try:
                used_fed = Federation(federation) if cold else fed
                cq = compile_query(q.sxql, used_fed, flux)
                ids_e, rows_e = engine_rows(used_fed, cq)
                names_o, rows_o, ids_o = oracle_execute(q.sxql, catalog)
                mismatch = compare_to_oracle(ids_e, rows_e, ids_o, rows_o)
                entry["rows"] = len(ids_o)
                entry["oracle_match"] = mismatch is None
                if mismatch:
                    entry["mismatch"] = mismatch
                    report["failed"] = True
                entry["single_s"] = _median_time(used_fed, cq, None, False, repetitions)
                entry["striped_s"] = _median_time(used_fed, cq, striped_runner,
                                                  False, repetitions)
                entry["single_count_s"] = _median_time(used_fed, cq, None, True,
                                                       repetitions)
                entry["striped_count_s"] = _median_time(used_fed, cq, striped_runner,
                                                        True, repetitions)
            except Exception as exc:  # noqa: BLE001 - report and fail the suite
                entry["error"] = f"{type(exc).__name__}: {exc}"
                entry["oracle_match"] = False
                report["failed"] = True
            report["queries"].append(entry)

        report["tag_vs_full"] = tag_vs_full_scan(fed, repetitions=min(repetitions, 3))
        widest = _widest_query(report["queries"], corpus, fed, flux)
        if widest is not None:
            report["extraction_modes"] = compare_extraction_modes(
                fed, cluster, widest, repetitions=min(repetitions, 3))
        report["summary"] = _summary(report)
        return report
    finally:
        if own_cluster:
            cluster.stop()


def _widest_query(entries, corpus, fed, flux) -> str | None:
    """Widest-output query whose plan is a bare scoped leaf (slave extraction
    handles only single-leaf plans)."""
    from ..planner import ScopedQuery
    best = None
    best_cells = -1
    by_id = {q.id: q for q in corpus}
    for e in entries:
        if "rows" not in e or e["id"] not in by_id:
            continue
        sxql = by_id[e["id"]].sxql
        try:
            if not isinstance(compile_query(sxql, fed, flux).qet, ScopedQuery):
                continue
        except Exception:  # noqa: BLE001
            continue
        cq_cols = len(sxql.split("SELECT", 1)[1].split("FROM")[0].split(","))
        cells = e["rows"] * cq_cols
        if cells > best_cells:
            best_cells = cells
            best = sxql
    return best


def _summary(report) -> dict:
    qs = {e["id"]: e for e in report["queries"] if "single_s" in e}
    summary: dict = {}
    scan_bound = [q for q in ("Q17", "Q31") if q in qs]
    if scan_bound:
        speedups = {q: qs[q]["single_s"] / qs[q]["striped_s"] for q in scan_bound
                    if qs[q]["striped_s"] > 0}
        summary["striped_speedup"] = speedups
        summary["striped_speedup_median"] = statistics.median(speedups.values()) \
            if speedups else None
    if "Q30" in qs and "Q31" in qs:
        summary["q30_vs_q31"] = {
            "single": (qs["Q30"]["single_s"], qs["Q31"]["single_s"]),
            "striped": (qs["Q30"]["striped_s"], qs["Q31"]["striped_s"]),
            "q31_slower_everywhere": qs["Q31"]["single_s"] > qs["Q30"]["single_s"]
            and qs["Q31"]["striped_s"] > qs["Q30"]["striped_s"],
        }
    ratios = {}
    for qid, e in qs.items():
        if e.get("rows") and e["striped_s"] > 0:
            ratios[qid] = e["striped_count_s"] / e["striped_s"]
    summary["count_over_full_striped"] = ratios
    return summary


def render_report(report: dict) -> str:
    lines = []
    env = report["environment"]
    lines.append(f"skyql benchmark — python {env['python']}, {env['cpus']} cpus")
    counts = report["catalog"]["class_counts"]
    lines.append("catalog: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    lines.append("")
    head = f"{'query':<6} {'rows':>8} {'oracle':>7} {'single':>9} {'striped':>9} " \
           f"{'cnt-single':>10} {'cnt-striped':>11}"
    lines.append(head)
    lines.append("-" * len(head))
    for e in report["queries"]:
        if "error" in e:
            lines.append(f"{e['id']:<6} ERROR {e['error']}")
            continue
        lines.append(
            f"{e['id']:<6} {e['rows']:>8} {'ok' if e['oracle_match'] else 'FAIL':>7} "
            f"{e['single_s']*1000:>8.1f}m {e['striped_s']*1000:>8.1f}m "
            f"{e['single_count_s']*1000:>9.1f}m {e['striped_count_s']*1000:>10.1f}m")
    tv = report.get("tag_vs_full")
    if tv:
        lines.append("")
        lines.append(f"tag scan {tv['tag_seconds']*1000:.1f} ms vs full scan "
                     f"{tv['full_seconds']*1000:.1f} ms -> speedup {tv['speedup']:.2f}x "
                     f"(byte ratio {tv['byte_ratio']:.2f}x)")
    em = report.get("extraction_modes")
    if em:
        lines.append(f"extraction: master {em['master_full_s']*1000:.1f} ms, "
                     f"slave-side {em['slave_extract_full_s']*1000:.1f} ms, "
                     f"count-only/full {em['count_over_full']:.2f}, "
                     f"identical rows: {em['identical_rows']}")
    if report.get("failed"):
        lines.append("")
        lines.append("SUITE FAILED: at least one query mismatched the oracle")
    return "\n".join(lines)
