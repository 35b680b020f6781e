"""Minimal RFC 6455 server-side WebSocket framing.

Just enough for the console: the HTTP upgrade handshake, masked client frames
(text/binary/ping/close), unmasked server frames.  A control message is one text
frame; when it carries a `bytes` field the payload follows as one binary frame,
mirroring the TCP framing.
"""

from __future__ import annotations

import base64
import hashlib
import json
import socket
import struct
import threading

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT, OP_TEXT, OP_BINARY, OP_CLOSE, OP_PING, OP_PONG = 0, 1, 2, 8, 9, 10


class WebSocketTransport:
    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._rfile = sock.makefile("rb")
        self._wlock = threading.Lock()
        self._pending_payload: bytes | None = None

    # -- handshake ---------------------------------------------------------------

    @classmethod
    def accept(cls, sock: socket.socket) -> "WebSocketTransport":
        rfile = sock.makefile("rb")
        request = rfile.readline().decode("latin-1")
        if not request.startswith("GET"):
            raise ValueError("not a websocket upgrade")
        headers = {}
        while True:
            line = rfile.readline().decode("latin-1").strip()
            if not line:
                break
            k, _, v = line.partition(":")
            headers[k.strip().lower()] = v.strip()
        key = headers.get("sec-websocket-key")
        if not key or "upgrade" not in headers.get("connection", "").lower():
            raise ValueError("missing websocket headers")
        accept = base64.b64encode(
            hashlib.sha1((key + _GUID).encode("latin-1")).digest()
        ).decode("latin-1")
        resp = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
        )
        sock.sendall(resp.encode("latin-1"))
        t = cls(sock)
        t._rfile = rfile
        return t

    # -- frames -----------------------------------------------------------------

    def _read_frame(self) -> tuple[int, bytes] | None:
        head = self._rfile.read(2)
        if len(head) < 2:
            return None
        b0, b1 = head
        opcode = b0 & 0x0F
        masked = b1 & 0x80
        length = b1 & 0x7F
        if length == 126:
            (length,) = struct.unpack(">H", self._rfile.read(2))
        elif length == 127:
            (length,) = struct.unpack(">Q", self._rfile.read(8))
        mask = self._rfile.read(4) if masked else b""
        data = self._rfile.read(length) if length else b""
        if len(data) < length:
            return None
        if masked:
            data = bytes(c ^ mask[i % 4] for i, c in enumerate(data))
        return opcode, data

    def _send_frame(self, opcode: int, data: bytes):
        header = bytearray([0x80 | opcode])
        n = len(data)
        if n < 126:
            header.append(n)
        elif n < 65536:
            header.append(126)
            header += struct.pack(">H", n)
        else:
            header.append(127)
            header += struct.pack(">Q", n)
        with self._wlock:
            self.sock.sendall(bytes(header) + data)

    # -- the Transport interface ---------------------------------------------------

    def send(self, msg: dict, payload: bytes | None = None):
        if payload is not None:
            msg = dict(msg, payload_bytes=len(payload))
        self._send_frame(OP_TEXT, json.dumps(msg, separators=(",", ":")).encode("utf-8"))
        if payload is not None:
            self._send_frame(OP_BINARY, payload)

    def recv(self) -> tuple[dict, bytes | None] | None:
        while True:
            frame = self._read_frame()
            if frame is None:
                return None
            opcode, data = frame
            if opcode == OP_PING:
                self._send_frame(OP_PONG, data)
                continue
            if opcode == OP_CLOSE:
                try:
                    self._send_frame(OP_CLOSE, data[:2])
                except OSError:
                    pass
                return None
            if opcode in (OP_TEXT, OP_CONT):
                try:
                    msg = json.loads(data.decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError):
                    return {"type": "_GARBAGE"}, None
                if not isinstance(msg, dict):
                    return {"type": "_GARBAGE"}, None
                payload = None
                if isinstance(msg.get("payload_bytes"), int) and msg["payload_bytes"] > 0:
                    nxt = self._read_frame()
                    if nxt is None:
                        return None
                    payload = nxt[1]
                return msg, payload
            # unsolicited binary frames are dropped

    def close(self):
        try:
            self._send_frame(OP_CLOSE, b"")
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass
