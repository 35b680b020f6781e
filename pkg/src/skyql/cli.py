"""skyql command line: generate, load, export, serve, slave, query, bench."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def cmd_generate(args):
    from .loader import generate_synthetic
    counts = generate_synthetic(args.objects, args.seed, args.out)
    print(json.dumps(counts))


def cmd_load(args):
    from .loader import load
    manifest = load(args.csv_dir, partitions=args.partitions, htm_depth=args.htm_depth,
                    out_federation=args.out, databases=args.databases,
                    generator_seed=args.seed)
    print(json.dumps({
        "class_counts": manifest.class_counts,
        "databases": manifest.databases,
        "scan_rate_bytes_per_s": manifest.scan_rate_bytes_per_s,
        "schema_hash": manifest.schema_hash,
    }))


def cmd_export(args):
    from .loader import export_csv
    counts = export_csv(args.federation, args.out,
                        classes=args.classes.split(",") if args.classes else None)
    print(json.dumps(counts))


def cmd_serve(args):
    from .agent import AgentConfig, QueryAgent
    config = AgentConfig.from_file(args.config)
    agent = QueryAgent(config)
    agent.start()
    print(f"skyql agent: tcp port {agent.tcp_port}"
          + (f", ws port {agent.ws_port}" if agent.ws_port else ""), flush=True)
    try:
        agent.stopping.wait()
    except KeyboardInterrupt:
        agent.stop()


def cmd_slave(args):
    from .agent.slave import SlaveServer
    if args.config:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        federation = doc["federation"]
        secret = doc.get("slave_secret", "skyql-local")
        endpoint = None
        if args.partition is not None and doc.get("partition_map"):
            pm = json.loads(Path(doc["partition_map"]).read_text(encoding="utf-8"))
            for p in pm["partitions"]:
                if p["id"] == args.partition and isinstance(p.get("locality"), dict):
                    endpoint = p["locality"]["remote"]
        port = args.port or (int(endpoint.rsplit(":", 1)[1]) if endpoint else 0)
    else:
        federation = args.federation
        secret = args.secret
        port = args.port
    if not federation:
        print("slave: --federation or --config is required", file=sys.stderr)
        return 2
    server = SlaveServer(federation, secret, port=port)
    port = server.start()
    print(f"skyql slave: port {port}", flush=True)
    try:
        server.stopping.wait()
    except KeyboardInterrupt:
        server.stop()


def cmd_query(args):
    from .agent import connect
    host, port = args.server.rsplit(":", 1)
    if args.sxql == "-" or args.sxql is None:
        text = sys.stdin.read()
    else:
        p = Path(args.sxql)
        text = p.read_text(encoding="utf-8") if p.exists() else args.sxql
    client = connect(host, int(port), args.user, args.password)
    try:
        qid, est = client.estimate(text)
        print(f"# estimate: {est['containers']} containers in {est['databases']} databases, "
              f"~{est['seconds']:.3f}s", file=sys.stderr)
        if args.estimate_only:
            return 0
        if args.count_only:
            res = client.run(qid, count_only=True)
            print(res.count)
        else:
            res = client.run(qid)
            text_out = ",".join(res.columns) + "\n" + res.csv_text
            if args.output:
                Path(args.output).write_text(text_out, encoding="utf-8")
            else:
                sys.stdout.write(text_out)
        if res.state != "Done":
            print(f"# status: {res.state} {res.error or ''}", file=sys.stderr)
            return 1
        print(f"# {res.rows} rows in {res.elapsed_s:.3f}s", file=sys.stderr)
        return 0
    finally:
        client.close()


def cmd_bench(args):
    from .bench.harness import run_suite
    report = run_suite(
        federation=args.federation,
        csv_dir=args.csv_dir,
        repetitions=args.repetitions,
        cold=args.cold,
        query_ids=args.queries.split(",") if args.queries else None,
        striped_partitions=args.partitions,
    )
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=1), encoding="utf-8")
    from .bench.harness import render_report
    print(render_report(report))
    return 0 if not report.get("failed") else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skyql",
                                description="Desk-scale astronomical catalog query engine")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="generate a synthetic catalog as CSV")
    g.add_argument("--objects", type=int, required=True)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_generate)

    l = sub.add_parser("load", help="load CSVs into a federation")
    l.add_argument("--csv-dir", required=True)
    l.add_argument("--out", required=True)
    l.add_argument("--partitions", type=int, default=3)
    l.add_argument("--databases", type=int, default=6)
    l.add_argument("--htm-depth", type=int, default=8)
    l.add_argument("--seed", type=int, default=None)
    l.set_defaults(fn=cmd_load)

    e = sub.add_parser("export", help="export a federation back to CSV")
    e.add_argument("--federation", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--classes", default=None)
    e.set_defaults(fn=cmd_export)

    s = sub.add_parser("serve", help="run the query agent")
    s.add_argument("--config", required=True)
    s.set_defaults(fn=cmd_serve)

    sl = sub.add_parser("slave", help="run a partition slave")
    sl.add_argument("--config", default=None)
    sl.add_argument("--partition", type=int, default=None)
    sl.add_argument("--federation", default=None)
    sl.add_argument("--port", type=int, default=0)
    sl.add_argument("--secret", default="skyql-local")
    sl.set_defaults(fn=cmd_slave)

    q = sub.add_parser("query", help="non-interactive client")
    q.add_argument("--server", required=True, help="host:port")
    q.add_argument("--user", required=True)
    q.add_argument("--password", required=True)
    q.add_argument("--count-only", action="store_true")
    q.add_argument("--estimate-only", action="store_true")
    q.add_argument("--output", default=None)
    q.add_argument("sxql", nargs="?", default="-",
                   help="SXQL text, a file containing it, or - for stdin")
    q.set_defaults(fn=cmd_query)

    b = sub.add_parser("bench", help="run the benchmark suite")
    b.add_argument("--federation", required=True)
    b.add_argument("--csv-dir", required=True)
    b.add_argument("--repetitions", type=int, default=5)
    b.add_argument("--partitions", type=int, default=3)
    b.add_argument("--queries", default=None)
    b.add_argument("--cold", action="store_true")
    b.add_argument("--out", default=None)
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args) or 0


if __name__ == "__main__":
    sys.exit(main())
