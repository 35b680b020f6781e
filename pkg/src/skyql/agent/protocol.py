"""Wire protocol: message schemas, framings, and the query-job state machine.

Control messages are JSON objects.  Over TCP they are newline-delimited; a message
carrying a `payload_bytes` field is immediately followed by that many raw payload bytes.
Over WebSocket each message is one text frame, and a `payload_bytes` field means the payload
follows as one binary frame.  docs/protocol.md is the normative description.
"""

from __future__ import annotations

import json
import socket
import threading
from dataclasses import dataclass, field
from enum import Enum

from ..errors import IllegalState


class JobState(str, Enum):
    PARSED = "Parsed"
    ESTIMATED = "Estimated"
    RUNNING = "Running"
    DONE = "Done"
    FAILED = "Failed"
    CANCELLED = "Cancelled"


_LEGAL = {
    JobState.PARSED: {JobState.ESTIMATED},
    JobState.ESTIMATED: {JobState.RUNNING, JobState.CANCELLED},
    JobState.RUNNING: {JobState.DONE, JobState.FAILED, JobState.CANCELLED},
    JobState.DONE: set(),
    JobState.FAILED: set(),
    JobState.CANCELLED: set(),
}

TERMINAL = {JobState.DONE, JobState.FAILED, JobState.CANCELLED}


@dataclass
class QueryJob:
    query_id: int
    sxql: str
    state: JobState = JobState.PARSED
    compiled: object = None
    cost: object = None
    cancel_event: object = None
    _lock: threading.Lock = field(default_factory=threading.Lock)
    transitions: list[str] = field(default_factory=list)

    def transition(self, to: JobState):
        with self._lock:
            if to not in _LEGAL[self.state]:
                raise IllegalState(f"query {self.query_id}: {self.state.value} -> {to.value}")
            self.transitions.append(f"{self.state.value}->{to.value}")
            self.state = to

    def try_transition(self, to: JobState) -> bool:
        with self._lock:
            if to not in _LEGAL[self.state]:
                return False
            self.transitions.append(f"{self.state.value}->{to.value}")
            self.state = to
            return True


# -- framing ------------------------------------------------------------------------

class Transport:
    """Message framing over a connected socket (the TCP newline framing)."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._rfile = sock.makefile("rb")
        self._wlock = threading.Lock()

    def send(self, msg: dict, payload: bytes | None = None):
        if payload is not None:
            msg = dict(msg, payload_bytes=len(payload))
        data = (json.dumps(msg, separators=(",", ":")) + "\n").encode("utf-8")
        with self._wlock:
            self.sock.sendall(data)
            if payload is not None:
                self.sock.sendall(payload)

    def recv(self) -> tuple[dict, bytes | None] | None:
        line = self._rfile.readline()
        if not line:
            return None
        try:
            msg = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return {"type": "_GARBAGE"}, None
        payload = None
        if isinstance(msg, dict) and isinstance(msg.get("payload_bytes"), int) and msg["payload_bytes"] >= 0:
            payload = self._rfile.read(msg["payload_bytes"])
            if payload is not None and len(payload) < msg["payload_bytes"]:
                return None
        if not isinstance(msg, dict):
            return {"type": "_GARBAGE"}, None
        return msg, payload

    def close(self):
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


def error_msg(code: str, message: str, query_id: int | None = None, **extra) -> dict:
    msg = {"type": "ERROR", "code": code, "message": message}
    if query_id is not None:
        msg["query_id"] = query_id
    msg.update(extra)
    return msg
