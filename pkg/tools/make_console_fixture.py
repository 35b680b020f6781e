#!/usr/bin/env python3
"""Regenerate frontend/test/fixtures/exchange.json.

Records a real agent exchange (estimate -> run -> rows -> status) for a fixed query
over the deterministic 3000-object catalog, plus the byte-exact CSV the agent writes
for the same query through a file target.  The console's export test replays the
exchange and must reproduce those bytes.
"""

from __future__ import annotations

import base64
import json
import socket
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "frontend" / "test" / "fixtures" / "exchange.json"

QUERY = "SELECT objID, sqrt(rowv*rowv + colv*colv), RA(), DEC() FROM PhotoObj " \
        "WHERE (rowv*rowv + colv*colv) > 50 AND rowv >= 0 AND colv >= 0"


def main():
    from skyql.agent import AgentConfig, QueryAgent, hash_password
    from skyql.agent.protocol import Transport
    from skyql.loader import generate_synthetic, load

    tmp = Path(tempfile.mkdtemp(prefix="skyql_fixture_"))
    csv_dir = tmp / "csv"
    fed_dir = tmp / "fed"
    generate_synthetic(3000, 42, csv_dir)
    load(csv_dir, partitions=1, htm_depth=8, out_federation=fed_dir, generator_seed=42)

    config = AgentConfig(
        federation=str(fed_dir), tcp_port=0,
        users=[{"user": "astro", "salt": "s1",
                "password_sha256": hash_password("s1", "orion")}],
        output_root=str(tmp),
    )
    agent = QueryAgent(config)
    agent.start()
    try:
        sock = socket.create_connection(("127.0.0.1", agent.tcp_port), timeout=30)
        t = Transport(sock)
        events = []

        def recv_logged():
            got = t.recv()
            assert got is not None
            msg, payload = got
            events.append({"kind": "text", "data": json.dumps(msg, separators=(",", ":"))})
            if payload is not None:
                events.append({"kind": "binary", "b64": base64.b64encode(payload).decode()})
            return msg, payload

        t.send({"type": "HELLO", "protocol": 1})
        recv_logged()
        t.send({"type": "AUTH", "user": "astro", "password": "orion"})
        recv_logged()
        t.send({"type": "ESTIMATE", "sxql": QUERY})
        est, _ = recv_logged()
        qid = est["query_id"]
        t.send({"type": "RUN", "query_id": qid})
        while True:
            msg, _ = recv_logged()
            if msg.get("type") == "STATUS":
                assert msg["state"] == "Done", msg
                break

        # the same query through a file target gives the reference bytes
        t.send({"type": "ESTIMATE", "sxql": QUERY})
        got = t.recv()
        qid2 = got[0]["query_id"]
        t.send({"type": "RUN", "query_id": qid2,
                "target": {"kind": "file", "path": "golden.csv"}})
        while True:
            got = t.recv()
            if got[0].get("type") == "STATUS":
                assert got[0]["state"] == "Done"
                break
        file_bytes = (tmp / "golden.csv").read_bytes()
        t.close()

        FIXTURE.parent.mkdir(parents=True, exist_ok=True)
        FIXTURE.write_text(json.dumps({
            "query": QUERY,
            "catalog": {"objects": 3000, "seed": 42},
            "events": events,
            "file_csv_b64": base64.b64encode(file_bytes).decode(),
        }, indent=1))
        print(f"wrote {FIXTURE} ({len(events)} events, {len(file_bytes)} file bytes)")
    finally:
        agent.stop()


if __name__ == "__main__":
    main()
