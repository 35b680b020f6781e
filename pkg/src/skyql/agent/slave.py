"""Partition slave: executes scoped leaf fragments against its share of the federation.

Speaks the same wire framing as the agent.  A fragment arrives as a serialized
ScopedQuery; `bag` mode streams the matching oids, `rows` mode also extracts the
select list and streams finished CSV blocks (the slave-side extraction configuration).
"""

from __future__ import annotations

import socket
import threading

import numpy as np

from ..engine.executor import ExecutionContext, extract_block, scan_scoped_chunks
from ..errors import EvalError, SkyqlError
from ..planner import ScopedQuery
from ..storage import Federation
from ..sxql.ast import expr_from_json
from ..sxql.typecheck import BoundSelectItem
from .protocol import Transport, error_msg


class SlaveServer:
    def __init__(self, federation_path: str, secret: str, host: str = "127.0.0.1",
                 port: int = 0):
        self.fed = Federation(federation_path)
        self.secret = secret
        self.host = host
        self.port = port
        self._srv: socket.socket | None = None
        self.stopping = threading.Event()

    def start(self) -> int:
        srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        srv.bind((self.host, self.port))
        srv.listen(16)
        self._srv = srv
        self.port = srv.getsockname()[1]
        threading.Thread(target=self._accept_loop, daemon=True).start()
        return self.port

    def stop(self):
        self.stopping.set()
        if self._srv:
            try:
                self._srv.close()
            except OSError:
                pass

    def serve_forever(self):
        self.start()
        self.stopping.wait()

    def _accept_loop(self):
        while not self.stopping.is_set():
            try:
                sock, _ = self._srv.accept()
            except OSError:
                return
            threading.Thread(target=self._serve, args=(sock,), daemon=True).start()

    def _serve(self, sock: socket.socket):
        t = Transport(sock)
        try:
            got = t.recv()
            if not got or got[0].get("type") != "SLAVE_HELLO" \
                    or got[0].get("secret") != self.secret:
                t.send(error_msg("AuthFailed", "bad slave handshake"))
                return
            t.send({"type": "SLAVE_OK"})
            while not self.stopping.is_set():
                got = t.recv()
                if got is None:
                    return
                msg, _ = got
                if msg.get("type") != "EXEC_FRAGMENT":
                    t.send(error_msg("BadMessage", f"unexpected {msg.get('type')!r}"))
                    continue
                self._exec_fragment(t, msg)
        except OSError:
            pass
        finally:
            t.close()

    def _exec_fragment(self, t: Transport, msg: dict):
        try:
            node = ScopedQuery.from_json(msg["fragment"])
            ctx = ExecutionContext(fed=self.fed)
            if msg.get("mode") == "rows":
                select = [
                    BoundSelectItem(expr_from_json(d["expr"]), d["name"], "float64",
                                    d.get("array_length"))
                    for d in msg["select"]
                ]
                class_name = msg.get("class", node.class_name)
                from .server import block_csv_lines
                for chunk in scan_scoped_chunks(node, ctx):
                    block = extract_block(self.fed, chunk, class_name, select)
                    t.send({"type": "BLOCK", "count": len(block)},
                           block_csv_lines(block).encode("utf-8"))
            else:
                for chunk in scan_scoped_chunks(node, ctx):
                    t.send({"type": "BAG", "count": len(chunk)},
                           np.ascontiguousarray(chunk, dtype="<u8").tobytes())
            t.send({"type": "FRAGMENT_DONE"})
        except EvalError as exc:
            t.send(error_msg(exc.code, str(exc)))
        except (SkyqlError, KeyError, ValueError) as exc:
            t.send(error_msg("FragmentError", str(exc)))


def _free_port() -> int:
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


class SlaveCluster:
    """Spawn N slave processes over one federation and build their partition map.

    Databases are assigned round-robin by id, matching the loader's default layout.
    """

    def __init__(self, federation_path: str, n: int, secret: str = "skyql-local"):
        import subprocess
        import sys
        import time as _time
        self.procs = []
        self.endpoints = []
        self.federation_path = federation_path
        self.secret = secret
        for _ in range(n):
            port = _free_port()
            proc = subprocess.Popen(
                [sys.executable, "-m", "skyql.cli", "slave",
                 "--federation", str(federation_path),
                 "--port", str(port), "--secret", secret],
                stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
            )
            self.procs.append(proc)
            self.endpoints.append(f"127.0.0.1:{port}")
        deadline = _time.time() + 30
        for ep in self.endpoints:
            host, port = ep.rsplit(":", 1)
            while True:
                try:
                    probe = socket.create_connection((host, int(port)), timeout=0.5)
                    t = Transport(probe)
                    t.send({"type": "SLAVE_HELLO", "secret": secret})
                    ok = t.recv()
                    t.close()
                    if ok and ok[0].get("type") == "SLAVE_OK":
                        break
                except OSError:
                    pass
                if _time.time() > deadline:
                    self.stop()
                    raise RuntimeError(f"slave at {ep} did not come up")
                _time.sleep(0.05)

    def partition_map(self, fed: Federation):
        from ..planner import Partition, PartitionMap
        n = len(self.endpoints)
        parts = [Partition(i, set(), "remote", self.endpoints[i]) for i in range(n)]
        for db in sorted(fed.databases):
            parts[db % n].databases.add(db)
        return PartitionMap(parts)

    def kill_one(self, index: int = 0):
        self.procs[index].kill()
        self.procs[index].wait()

    def stop(self):
        for p in self.procs:
            if p.poll() is None:
                p.terminate()
        for p in self.procs:
            try:
                p.wait(timeout=5)
            except Exception:
                p.kill()
