"""The query agent: sessions, estimate-then-run protocol, partitioned execution.

One accept loop per listener; each connection gets a reader thread (control messages,
so CANCEL is never blocked behind results) and a writer thread draining an outbound
queue.  Each RUN owns an executor thread whose engine tasks are cancelled as a group.
Leaf scans fan out across the partition map: local partitions scan in-process, remote
ones go to slave processes over the same wire protocol.
"""

from __future__ import annotations

import hashlib
import json
import queue
import socket
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..engine.executor import ExecutionContext, execute, scan_scoped_chunks
from ..errors import (
    AuthFailed,
    Cancelled,
    EvalError,
    PartitionUnavailable,
    SkyqlError,
    SyntaxError_,
    TooManySessions,
    UnknownQuery,
)
from ..planner import PartitionMap, ScopedQuery, map_partitions
from ..query import compile_query, load_flux
from ..storage import Federation
from .protocol import JobState, QueryJob, Transport, error_msg

PROTOCOL_VERSION = 1


@dataclass
class AgentConfig:
    federation: str
    partition_map: str | None = None
    tcp_port: int = 7401
    ws_port: int | None = None
    host: str = "127.0.0.1"
    users: list[dict] = field(default_factory=list)
    output_root: str = "."
    slave_extraction: bool = False
    session_cap: int = 32
    slave_secret: str = "skyql-local"

    @classmethod
    def from_file(cls, path: str | Path) -> "AgentConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        listen = doc.get("listen", {})
        return cls(
            federation=doc["federation"],
            partition_map=doc.get("partition_map"),
            tcp_port=listen.get("tcp", 7401),
            ws_port=listen.get("ws"),
            host=listen.get("host", "127.0.0.1"),
            users=doc.get("users", []),
            output_root=doc.get("output_root", "."),
            slave_extraction=doc.get("slave_extraction", False),
            session_cap=doc.get("session_cap", 32),
            slave_secret=doc.get("slave_secret", "skyql-local"),
        )


def hash_password(salt: str, password: str) -> str:
    return hashlib.sha256((salt + password).encode("utf-8")).hexdigest()


def value_str(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def block_csv_lines(block) -> str:
    out = []
    for row in block.rows():
        out.append(",".join(value_str(v) for v in row))
    return "\n".join(out) + "\n" if out else ""


_BIN_NULL_INT = -(2 ** 63)


def block_binary(block) -> bytes:
    """Little-endian packed rows: float64 for floats (NaN = null), int64 otherwise."""
    import struct
    cols = []
    for c, v in zip(block.columns, block.valids):
        if c.dtype.kind in "iu":
            vals = c.astype(np.int64)
            if v is not None:
                vals = np.where(v, vals, _BIN_NULL_INT)
            cols.append(("q", vals))
        else:
            vals = c.astype(np.float64)
            if v is not None:
                vals = np.where(v, vals, np.nan)
            cols.append(("d", vals))
    fmt = "<" + "".join(k for k, _ in cols)
    packer = struct.Struct(fmt)
    return b"".join(
        packer.pack(*(col[1][i].item() for col in cols)) for i in range(len(block))
    )


@dataclass
class Session:
    session_id: int
    user: str
    jobs: dict[int, QueryJob] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    next_query_id: int = 1

    def new_job(self, sxql: str) -> QueryJob:
        with self.lock:
            qid = self.next_query_id
            self.next_query_id += 1
            job = QueryJob(qid, sxql, cancel_event=threading.Event())
            self.jobs[qid] = job
            return job

    def job(self, qid) -> QueryJob:
        with self.lock:
            if qid not in self.jobs:
                raise UnknownQuery(str(qid))
            return self.jobs[qid]

    def reap(self, qid: int):
        with self.lock:
            self.jobs.pop(qid, None)


class Connection:
    """Transport plus an outbound writer thread."""

    def __init__(self, transport):
        self.transport = transport
        self.out: queue.Queue = queue.Queue(maxsize=64)
        self.closed = threading.Event()
        self.session: Session | None = None
        self.hello = False
        self._writer = threading.Thread(target=self._drain, daemon=True)
        self._writer.start()

    def _drain(self):
        while True:
            try:
                item = self.out.get(timeout=0.05)
            except queue.Empty:
                if self.closed.is_set():
                    break
                continue
            if item is None:
                break
            msg, payload = item
            try:
                self.transport.send(msg, payload)
            except OSError:
                self.closed.set()
                break

    def send(self, msg: dict, payload: bytes | None = None):
        while not self.closed.is_set():
            try:
                self.out.put((msg, payload), timeout=0.05)
                return
            except queue.Full:
                continue

    def close(self):
        try:
            self.out.put(None, timeout=0.5)
        except queue.Full:
            pass
        self._writer.join(timeout=1.0)
        self.closed.set()
        self.transport.close()


class QueryAgent:
    def __init__(self, config: AgentConfig):
        self.config = config
        self.fed = Federation(config.federation)
        self.flux = load_flux(self.fed)
        pmap_path = config.partition_map or str(Path(config.federation) / "partitions.json")
        if Path(pmap_path).exists():
            self.pmap = PartitionMap.from_file(pmap_path)
        else:
            self.pmap = PartitionMap.single_local({d for d in self.fed.databases})
        self.sessions: dict[int, Session] = {}
        self._slock = threading.Lock()
        self._next_session = 1
        self._listeners: list[socket.socket] = []
        self._threads: list[threading.Thread] = []
        self.stopping = threading.Event()
        self.tcp_port: int | None = None
        self.ws_port: int | None = None

    # -- lifecycle -------------------------------------------------------------------

    def start(self):
        self.tcp_port = self._listen(self.config.tcp_port, self._serve_tcp)
        if self.config.ws_port is not None:
            self.ws_port = self._listen(self.config.ws_port, self._serve_ws)

    def _listen(self, port: int, handler) -> int:
        srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        srv.bind((self.config.host, port))
        srv.listen(64)
        self._listeners.append(srv)
        t = threading.Thread(target=self._accept_loop, args=(srv, handler), daemon=True)
        t.start()
        self._threads.append(t)
        return srv.getsockname()[1]

    def stop(self):
        self.stopping.set()
        for srv in self._listeners:
            try:
                srv.close()
            except OSError:
                pass

    def _accept_loop(self, srv: socket.socket, handler):
        while not self.stopping.is_set():
            try:
                sock, _ = srv.accept()
            except OSError:
                return
            t = threading.Thread(target=handler, args=(sock,), daemon=True)
            t.start()

    def _serve_tcp(self, sock: socket.socket):
        self._serve(Transport(sock))

    def _serve_ws(self, sock: socket.socket):
        from .ws import WebSocketTransport
        try:
            transport = WebSocketTransport.accept(sock)
        except (OSError, ValueError):
            sock.close()
            return
        self._serve(transport)

    def _serve(self, transport):
        conn = Connection(transport)
        try:
            while not self.stopping.is_set():
                got = transport.recv()
                if got is None:
                    break
                msg, payload = got
                self.handle(conn, msg)
        except OSError:
            pass
        finally:
            conn.close()
            if conn.session is not None:
                with self._slock:
                    self.sessions.pop(conn.session.session_id, None)

    # -- message dispatch (also driven directly by the protocol fuzzer) ----------------

    def handle(self, conn, msg: dict):
        mtype = msg.get("type")
        try:
            if mtype == "HELLO":
                conn.hello = True
                conn.send({"type": "HELLO_OK", "server": "skyql", "protocol": PROTOCOL_VERSION})
            elif mtype == "AUTH":
                self._auth(conn, msg)
            elif mtype == "ESTIMATE":
                self._estimate(conn, msg)
            elif mtype == "RUN":
                self._run(conn, msg)
            elif mtype == "CANCEL":
                self._cancel(conn, msg)
            elif mtype == "BYE":
                conn.send({"type": "BYE_OK"})
                conn.close()
            else:
                conn.send(error_msg("BadMessage", f"unknown message type {mtype!r}"))
        except AuthFailed as exc:
            conn.send(error_msg("AuthFailed", str(exc)))
            conn.close()
        except TooManySessions as exc:
            conn.send(error_msg("TooManySessions", str(exc)))
            conn.close()
        except UnknownQuery as exc:
            conn.send(error_msg("UnknownQuery", str(exc), query_id=msg.get("query_id")))
        except SyntaxError_ as exc:
            conn.send(error_msg("SyntaxError", str(exc), line=exc.line, col=exc.col))
        except SkyqlError as exc:
            conn.send(error_msg(type(exc).__name__.rstrip("_"), str(exc),
                                query_id=msg.get("query_id")))

    def _auth(self, conn, msg: dict):
        user = msg.get("user", "")
        password = msg.get("password", "")
        for u in self.config.users:
            if u["user"] == user and hash_password(u["salt"], password) == u["password_sha256"]:
                with self._slock:
                    active = len(self.sessions)
                    if active >= self.config.session_cap:
                        raise TooManySessions(f"cap {self.config.session_cap} reached")
                    sid = self._next_session
                    self._next_session += 1
                    session = Session(sid, user)
                    self.sessions[sid] = session
                conn.session = session
                conn.send({"type": "AUTH_OK", "session_id": sid})
                return
        raise AuthFailed(f"bad credentials for {user!r}")

    def _require_session(self, conn) -> Session:
        if conn.session is None:
            raise AuthFailed("not authenticated")
        return conn.session

    def _estimate(self, conn, msg: dict):
        session = self._require_session(conn)
        sxql = msg.get("sxql", "")
        job = session.new_job(sxql)
        try:
            cq = compile_query(sxql, self.fed, self.flux)
        except SkyqlError:
            session.reap(job.query_id)
            raise
        job.compiled = cq
        job.cost = cq.estimate
        job.transition(JobState.ESTIMATED)
        conn.send({
            "type": "ESTIMATE_RESULT",
            "query_id": job.query_id,
            "databases": cq.estimate.databases_touched,
            "containers": cq.estimate.containers_touched,
            "seconds": cq.estimate.estimated_seconds,
            "bytes": cq.estimate.bytes_to_scan,
            "columns": self._columns_doc(cq),
        })

    def _columns_doc(self, cq) -> list[dict]:
        cols = []
        for item in cq.select:
            fmts = getattr(item, "io_format", "%s")
            if item.array_length:
                for k in range(item.array_length):
                    cols.append({"name": f"{item.name}_{k}", "type": item.etype.split(":")[-1],
                                 "format": fmts})
            else:
                cols.append({"name": item.name, "type": item.etype, "format": fmts})
        return cols

    def _run(self, conn, msg: dict):
        session = self._require_session(conn)
        qid = msg.get("query_id")
        job = session.job(qid)
        job.transition(JobState.RUNNING)
        count_only = bool(msg.get("count_only", False))
        target = msg.get("target") or {"kind": "client"}
        fmt = msg.get("format", "csv")
        t = threading.Thread(
            target=self._execute_job,
            args=(conn, session, job, count_only, target, fmt),
            daemon=True,
        )
        t.start()

    def _cancel(self, conn, msg: dict):
        session = self._require_session(conn)
        qid = msg.get("query_id")
        job = session.job(qid)
        if job.state == JobState.ESTIMATED:
            job.transition(JobState.CANCELLED)
            conn.send({"type": "CANCEL_OK", "query_id": qid,
                       "state": JobState.CANCELLED.value})
            return
        if job.state == JobState.RUNNING:
            job.cancel_event.set()
            conn.send({"type": "CANCEL_OK", "query_id": qid, "state": "Cancelling"})
            return
        raise UnknownQuery(str(qid))

    # -- execution ---------------------------------------------------------------------

    def _execute_job(self, conn, session, job: QueryJob, count_only: bool,
                     target: dict, fmt: str):
        cq = job.compiled
        t0 = time.perf_counter()
        rows_out = 0
        try:
            ctx = ExecutionContext(fed=self.fed, cancel=job.cancel_event)
            multi = len(self.pmap.partitions) > 1 or any(
                p.locality == "remote" for p in self.pmap.partitions)
            if multi:
                ctx.leaf_runner = self._partition_runner()
            if count_only:
                n = execute(cq.qet, cq.select, ctx, count_only=True,
                            class_name=cq.output_class)
                rows_out = n
                conn.send({"type": "COUNT", "query_id": job.query_id, "count": n})
            else:
                rows_out = self._stream_rows(conn, job, cq, ctx, target, fmt)
            if job.try_transition(JobState.DONE):
                conn.send({"type": "STATUS", "query_id": job.query_id,
                           "state": JobState.DONE.value, "rows": rows_out,
                           "elapsed_s": time.perf_counter() - t0})
        except Cancelled:
            job.try_transition(JobState.CANCELLED)
            conn.send({"type": "STATUS", "query_id": job.query_id,
                       "state": JobState.CANCELLED.value, "rows": rows_out,
                       "elapsed_s": time.perf_counter() - t0})
        except (SkyqlError, OSError) as exc:
            job.try_transition(JobState.FAILED)
            code = type(exc).__name__.rstrip("_")
            if isinstance(exc, EvalError):
                code = exc.code
            conn.send({"type": "STATUS", "query_id": job.query_id,
                       "state": JobState.FAILED.value, "rows": rows_out,
                       "elapsed_s": time.perf_counter() - t0,
                       "error": {"code": code, "message": str(exc)}})
        finally:
            session.reap(job.query_id)

    def _stream_rows(self, conn, job, cq, ctx, target: dict, fmt: str) -> int:
        names = cq.column_names
        kind = target.get("kind", "client")
        columns_msg = {"type": "COLUMNS", "query_id": job.query_id,
                       "columns": self._columns_doc(cq), "names": names}

        sink_file = None
        sink_sock = None
        try:
            if kind == "file":
                path = self._resolve_output(target.get("path", ""))
                sink_file = open(path, "w", encoding="utf-8", newline="")
                sink_file.write(",".join(names) + "\n")
            elif kind == "socket":
                host, port = target["endpoint"].rsplit(":", 1)
                sink_sock = socket.create_connection((host, int(port)), timeout=10)
                sink_sock.sendall((",".join(names) + "\n").encode("utf-8"))
            conn.send(columns_msg)

            rows = 0
            use_slave_extract = (
                self.config.slave_extraction
                and isinstance(cq.qet, ScopedQuery)
                and fmt == "csv"
                and any(p.locality == "remote" for p in self.pmap.partitions)
            )
            if use_slave_extract:
                chunks = self._slave_extract_chunks(cq, ctx)
            else:
                stream = execute(cq.qet, cq.select, ctx, class_name=cq.output_class)
                if fmt == "binary":
                    chunks = ((len(b), block_binary(b)) for b in stream.blocks())
                else:
                    chunks = ((len(b), block_csv_lines(b).encode("utf-8"))
                              for b in stream.blocks())
            for count, payload in chunks:
                if not count:
                    continue
                rows += count
                if kind == "client":
                    conn.send({"type": "ROWS", "query_id": job.query_id,
                               "count": count, "encoding": fmt}, payload)
                elif kind == "file":
                    sink_file.write(payload.decode("utf-8") if fmt == "csv" else "")
                    if fmt == "binary":
                        raise SkyqlError("binary format requires a client or socket target")
                else:
                    sink_sock.sendall(payload)
            return rows
        finally:
            if sink_file:
                sink_file.close()
            if sink_sock:
                sink_sock.close()

    def _resolve_output(self, rel: str) -> Path:
        root = Path(self.config.output_root).resolve()
        path = (root / rel).resolve()
        if root != path and root not in path.parents:
            raise SkyqlError(f"output path escapes the output root: {rel}")
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    # -- partitioned leaves ---------------------------------------------------------

    def _partition_runner(self):
        return partition_leaf_runner(self.pmap, self.config.slave_secret)


    def _slave_extract_chunks(self, cq, ctx):
        """Slave-side extraction: remote partitions return finished CSV blocks."""
        node = cq.qet
        subs = map_partitions(node.scope, self.pmap)
        select_doc = [
            {"expr": _expr_json(item.expr), "name": item.name,
             "array_length": item.array_length}
            for item in cq.select
        ]
        for pid, sub in subs:
            partition = next(p for p in self.pmap.partitions if p.id == pid)
            sub_node = ScopedQuery(node.class_name, sub, node.predicate)
            if partition.locality == "remote":
                yield from slave_fetch_rows(partition.endpoint, self.config.slave_secret,
                                            sub_node, select_doc, cq.output_class, ctx)
            else:
                from ..engine.executor import extract_block
                for chunk in scan_scoped_chunks(sub_node, ctx):
                    block = extract_block(self.fed, chunk, cq.output_class, cq.select)
                    yield len(block), block_csv_lines(block).encode("utf-8")


def partition_leaf_runner(pmap: PartitionMap, secret: str):
    """Leaf runner distributing a scoped scan across the partition map."""

    def runner(node: ScopedQuery, ctx):
        subs = map_partitions(node.scope, pmap)
        if not subs:
            return
        out: queue.Queue = queue.Queue(maxsize=16)
        errors: list[BaseException] = []

        def local_worker(sub):
            try:
                sub_node = ScopedQuery(node.class_name, sub, node.predicate)
                for chunk in scan_scoped_chunks(sub_node, ctx):
                    out.put(chunk)
            except BaseException as exc:  # noqa: BLE001
                errors.append(exc)
            finally:
                out.put(None)

        def remote_worker(partition, sub):
            try:
                sub_node = ScopedQuery(node.class_name, sub, node.predicate)
                for chunk in slave_fetch_bag(partition.endpoint, secret, sub_node, ctx):
                    out.put(chunk)
            except BaseException as exc:  # noqa: BLE001
                errors.append(exc)
            finally:
                out.put(None)

        workers = 0
        for pid, sub in subs:
            partition = next(p for p in pmap.partitions if p.id == pid)
            if partition.locality == "remote":
                threading.Thread(target=remote_worker, args=(partition, sub),
                                 daemon=True).start()
            else:
                threading.Thread(target=local_worker, args=(sub,), daemon=True).start()
            workers += 1
        done = 0
        while done < workers:
            if ctx.cancel.is_set() and not errors:
                raise Cancelled("query cancelled")
            try:
                item = out.get(timeout=0.05)
            except queue.Empty:
                continue
            if item is None:
                done += 1
                continue
            yield item
        if errors:
            raise errors[0]
    return runner


def _expr_json(e):
    from ..sxql.ast import expr_to_json
    return expr_to_json(e)


# -- slave client side ---------------------------------------------------------------

class _SlavePool:
    """Idle slave connections per endpoint; one in-flight fragment per connection."""

    def __init__(self):
        self._idle: dict[str, list[Transport]] = {}
        self._lock = threading.Lock()

    def get(self, endpoint: str, secret: str) -> Transport:
        with self._lock:
            idle = self._idle.get(endpoint)
            if idle:
                return idle.pop()
        return self._dial(endpoint, secret)

    def put(self, endpoint: str, t: Transport):
        with self._lock:
            self._idle.setdefault(endpoint, []).append(t)

    @staticmethod
    def _dial(endpoint: str, secret: str) -> Transport:
        host, port = endpoint.rsplit(":", 1)
        try:
            sock = socket.create_connection((host, int(port)), timeout=10)
        except OSError as exc:
            raise PartitionUnavailable(f"{endpoint}: {exc}") from exc
        t = Transport(sock)
        t.send({"type": "SLAVE_HELLO", "secret": secret})
        got = t.recv()
        if not got or got[0].get("type") != "SLAVE_OK":
            t.close()
            raise PartitionUnavailable(f"{endpoint}: handshake failed")
        return t


_POOL = _SlavePool()


def _slave_connect(endpoint: str, secret: str) -> Transport:
    return _POOL.get(endpoint, secret)


def slave_fetch_bag(endpoint: str, secret: str, node: ScopedQuery, ctx):
    t = _slave_connect(endpoint, secret)
    clean = False
    try:
        t.send({"type": "EXEC_FRAGMENT", "fragment": node.to_json(), "mode": "bag"})
        while True:
            if ctx.cancel.is_set():
                raise Cancelled("query cancelled")
            got = t.recv()
            if got is None:
                raise PartitionUnavailable(f"{endpoint}: connection lost mid-query")
            msg, payload = got
            mt = msg.get("type")
            if mt == "BAG":
                yield np.frombuffer(payload, dtype="<u8")
            elif mt == "FRAGMENT_DONE":
                clean = True
                return
            elif mt == "ERROR":
                raise EvalError(msg.get("code", EvalError.DOMAIN_ERROR), msg.get("message", ""))
            else:
                raise PartitionUnavailable(f"{endpoint}: unexpected {mt}")
    finally:
        if clean:
            _POOL.put(endpoint, t)
        else:
            t.close()


def slave_fetch_rows(endpoint: str, secret: str, node: ScopedQuery, select_doc,
                     class_name: str, ctx):
    t = _slave_connect(endpoint, secret)
    clean = False
    try:
        t.send({"type": "EXEC_FRAGMENT", "fragment": node.to_json(), "mode": "rows",
                "select": select_doc, "class": class_name})
        while True:
            if ctx.cancel.is_set():
                raise Cancelled("query cancelled")
            got = t.recv()
            if got is None:
                raise PartitionUnavailable(f"{endpoint}: connection lost mid-query")
            msg, payload = got
            mt = msg.get("type")
            if mt == "BLOCK":
                yield msg.get("count", 0), payload
            elif mt == "FRAGMENT_DONE":
                clean = True
                return
            elif mt == "ERROR":
                raise EvalError(msg.get("code", EvalError.DOMAIN_ERROR), msg.get("message", ""))
            else:
                raise PartitionUnavailable(f"{endpoint}: unexpected {mt}")
    finally:
        if clean:
            _POOL.put(endpoint, t)
        else:
            t.close()
