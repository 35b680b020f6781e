"""Python client for the agent protocol (used by the CLI, tests and the benchmark).

A background reader demultiplexes replies by query id, so one session can run
several queries concurrently from different threads.
"""

from __future__ import annotations

import queue
import socket
import threading
from dataclasses import dataclass, field

from ..errors import AuthFailed, SkyqlError
from .protocol import Transport


class AgentError(SkyqlError):
    def __init__(self, doc: dict):
        super().__init__(f"{doc.get('code')}: {doc.get('message')}")
        self.doc = doc


@dataclass
class RunResult:
    state: str
    rows: int
    elapsed_s: float
    columns: list[str] = field(default_factory=list)
    csv_chunks: list[bytes] = field(default_factory=list)
    binary_chunks: list[bytes] = field(default_factory=list)
    count: int | None = None
    error: dict | None = None

    @property
    def csv_text(self) -> str:
        return b"".join(self.csv_chunks).decode("utf-8")

    def parsed_rows(self) -> list[list[str]]:
        text = self.csv_text
        return [line.split(",") for line in text.splitlines() if line != ""]


class SkyqlClient:
    def __init__(self, host: str, port: int, timeout: float = 60.0):
        sock = socket.create_connection((host, port), timeout=timeout)
        self.transport = Transport(sock)
        self._queues: dict[int, queue.Queue] = {}
        self._control: queue.Queue = queue.Queue()
        self._lock = threading.Lock()
        self._closed = threading.Event()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self.session_id: int | None = None

    # -- plumbing -----------------------------------------------------------------

    def _read_loop(self):
        while not self._closed.is_set():
            try:
                got = self.transport.recv()
            except OSError:
                break
            if got is None:
                break
            msg, payload = got
            qid = msg.get("query_id")
            with self._lock:
                q = self._queues.get(qid) if qid is not None else None
            if msg.get("type") == "CANCEL_OK":
                q = None  # cancel acks are control-plane traffic
            (q or self._control).put((msg, payload))
        self._closed.set()
        with self._lock:
            for q in self._queues.values():
                q.put(({"type": "_EOF"}, None))
        self._control.put(({"type": "_EOF"}, None))

    def _expect(self, *types: str) -> dict:
        msg, _ = self._control.get(timeout=30)
        if msg.get("type") == "ERROR":
            raise AgentError(msg)
        if msg.get("type") == "_EOF":
            raise SkyqlError("connection closed")
        if msg.get("type") not in types:
            raise SkyqlError(f"unexpected reply {msg.get('type')!r}")
        return msg

    def close(self):
        self._closed.set()
        self.transport.close()

    # -- protocol ------------------------------------------------------------------

    def hello(self) -> dict:
        self.transport.send({"type": "HELLO", "protocol": 1})
        return self._expect("HELLO_OK")

    def auth(self, user: str, password: str) -> int:
        self.transport.send({"type": "AUTH", "user": user, "password": password})
        try:
            msg = self._expect("AUTH_OK")
        except AgentError as exc:
            if exc.doc.get("code") == "AuthFailed":
                raise AuthFailed(exc.doc.get("message", "")) from exc
            raise
        self.session_id = msg["session_id"]
        return self.session_id

    def estimate(self, sxql: str) -> tuple[int, dict]:
        self.transport.send({"type": "ESTIMATE", "sxql": sxql})
        msg = self._expect("ESTIMATE_RESULT")
        qid = msg["query_id"]
        with self._lock:
            self._queues[qid] = queue.Queue()
        return qid, msg

    def run(self, query_id: int, count_only: bool = False, target: dict | None = None,
            fmt: str = "csv", timeout: float = 300.0) -> RunResult:
        with self._lock:
            if query_id not in self._queues:
                self._queues[query_id] = queue.Queue()
            q = self._queues[query_id]
        msg: dict = {"type": "RUN", "query_id": query_id}
        if count_only:
            msg["count_only"] = True
        if target:
            msg["target"] = target
        if fmt != "csv":
            msg["format"] = fmt
        self.transport.send(msg)
        result = RunResult(state="Running", rows=0, elapsed_s=0.0)
        while True:
            reply, payload = q.get(timeout=timeout)
            t = reply.get("type")  # CANCEL_OK never lands here (control-plane)
            if t == "COLUMNS":
                result.columns = reply.get("names", [])
            elif t == "ROWS":
                if reply.get("encoding") == "binary":
                    result.binary_chunks.append(payload or b"")
                else:
                    result.csv_chunks.append(payload or b"")
            elif t == "COUNT":
                result.count = reply["count"]
            elif t == "STATUS":
                result.state = reply["state"]
                result.rows = reply.get("rows", 0)
                result.elapsed_s = reply.get("elapsed_s", 0.0)
                result.error = reply.get("error")
                with self._lock:
                    self._queues.pop(query_id, None)
                return result
            elif t == "ERROR":
                with self._lock:
                    self._queues.pop(query_id, None)
                raise AgentError(reply)
            elif t in ("_EOF",):
                raise SkyqlError("connection closed mid-query")
            elif t == "CANCEL_OK":
                continue

    def cancel(self, query_id: int) -> dict:
        """Control-plane call; do not interleave with other control-plane calls."""
        self.transport.send({"type": "CANCEL", "query_id": query_id})
        return self._expect("CANCEL_OK")


def connect(host: str, port: int, user: str, password: str) -> SkyqlClient:
    client = SkyqlClient(host, port)
    client.hello()
    client.auth(user, password)
    return client
