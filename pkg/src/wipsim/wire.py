"""Wire protocol: versioned JSON messages over WebSocket or UDP.

Message schema (all messages are single JSON objects):

    {"type": "input",  "v": 1, "seq": n, "t": s, "p_x": m, "gamma_h": rad}
    {"type": "state",  "v": 1, "seq": n, "t": s, ...telemetry fields...}
    {"type": "config", "v": 1, "seq": n, "mapping": {...}, "gains": {...}}
    {"type": "event",  "v": 1, "t": s, "name": str, "detail": str}
    {"type": "ack",    "v": 1, "ok": bool, "seq": n, "reason": str,
                       "last_input_seq": n}

The stream transport is WebSocket (RFC 6455, text frames, no
extensions): each frame carries one JSON message with its length in the
frame header, and a browser can connect directly. The optional datagram
transport sends one JSON message per UDP packet.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct

from .errors import ProtocolError

PROTOCOL_VERSION = 1

MESSAGE_TYPES = ("input", "state", "config", "event", "ack")

_WS_MAGIC = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def encode_message(msg: dict) -> str:
    return json.dumps(msg, separators=(",", ":"))


def decode_message(text: str) -> dict:
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    mtype = msg.get("type")
    if mtype not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {mtype!r}")
    if msg.get("v") != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {msg.get('v')!r}")
    if mtype == "input":
        for field in ("seq", "t", "p_x", "gamma_h"):
            if not isinstance(msg.get(field), (int, float)):
                raise ProtocolError(f"input message missing numeric {field!r}")
    return msg


# ---------------------------------------------------------------------------
# Minimal RFC 6455 framing. Text frames only, no extensions, fragments
# reassembled, pings answered. Enough for one-page cockpit clients and
# the test suite; not a general-purpose server.


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("socket closed")
        buf += chunk
    return buf


class WsConnection:
    """One open WebSocket, server or client side."""

    def __init__(self, sock: socket.socket, mask_outgoing: bool):
        self._sock = sock
        self._mask = mask_outgoing
        self.open = True

    def send_text(self, text: str) -> None:
        payload = text.encode("utf-8")
        self._send_frame(0x1, payload)

    def _send_frame(self, opcode: int, payload: bytes) -> None:
        header = bytes([0x80 | opcode])
        mask_bit = 0x80 if self._mask else 0
        n = len(payload)
        if n < 126:
            header += bytes([mask_bit | n])
        elif n < 65536:
            header += bytes([mask_bit | 126]) + struct.pack(">H", n)
        else:
            header += bytes([mask_bit | 127]) + struct.pack(">Q", n)
        if self._mask:
            key = os.urandom(4)
            masked = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
            self._sock.sendall(header + key + masked)
        else:
            self._sock.sendall(header + payload)

    def recv_text(self) -> str | None:
        """Next complete text message, or None once the peer closes."""
        fragments: list[bytes] = []
        while True:
            try:
                b0, b1 = _recv_exact(self._sock, 2)
                fin = bool(b0 & 0x80)
                opcode = b0 & 0x0F
                masked = bool(b1 & 0x80)
                length = b1 & 0x7F
                if length == 126:
                    length = struct.unpack(">H", _recv_exact(self._sock, 2))[0]
                elif length == 127:
                    length = struct.unpack(">Q", _recv_exact(self._sock, 8))[0]
                key = _recv_exact(self._sock, 4) if masked else None
                payload = _recv_exact(self._sock, length) if length else b""
                if key:
                    payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
                if opcode == 0x8:  # close
                    self.open = False
                    try:
                        self._send_frame(0x8, b"")
                    except OSError:
                        pass
                    return None
                if opcode == 0x9:  # ping
                    self._send_frame(0xA, payload)
                    continue
                if opcode == 0xA:  # pong
                    continue
            except (ConnectionError, OSError):
                self.open = False
                return None
            fragments.append(payload)
            if fin:
                return b"".join(fragments).decode("utf-8")

    def close(self) -> None:
        if self.open:
            try:
                self._send_frame(0x8, b"")
            except OSError:
                pass
            self.open = False
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def ws_accept(sock: socket.socket) -> WsConnection:
    """Perform the server side of the WebSocket handshake."""
    request = b""
    while b"\r\n\r\n" not in request:
        chunk = sock.recv(4096)
        if not chunk:
            raise ProtocolError("client closed during handshake")
        request += chunk
        if len(request) > 65536:
            raise ProtocolError("oversized handshake request")
    headers = {}
    lines = request.split(b"\r\n")
    for line in lines[1:]:
        if b":" in line:
            name, _, value = line.partition(b":")
            headers[name.strip().lower().decode()] = value.strip().decode()
    key = headers.get("sec-websocket-key")
    if not key or "websocket" not in headers.get("upgrade", "").lower():
        raise ProtocolError("not a WebSocket upgrade request")
    accept = base64.b64encode(hashlib.sha1((key + _WS_MAGIC).encode()).digest()).decode()
    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
    )
    sock.sendall(response.encode())
    return WsConnection(sock, mask_outgoing=False)


def ws_connect(host: str, port: int, timeout: float = 5.0) -> WsConnection:
    """Open a client WebSocket (used by the test suite and tools)."""
    sock = socket.create_connection((host, port), timeout=timeout)
    sock.settimeout(timeout)
    key = base64.b64encode(os.urandom(16)).decode()
    request = (
        f"GET / HTTP/1.1\r\nHost: {host}:{port}\r\n"
        "Upgrade: websocket\r\nConnection: Upgrade\r\n"
        f"Sec-WebSocket-Key: {key}\r\nSec-WebSocket-Version: 13\r\n\r\n"
    )
    sock.sendall(request.encode())
    response = b""
    while b"\r\n\r\n" not in response:
        chunk = sock.recv(4096)
        if not chunk:
            raise ProtocolError("server closed during handshake")
        response += chunk
    status_line = response.split(b"\r\n", 1)[0]
    if b" 101 " not in status_line:
        raise ProtocolError(f"handshake rejected: {status_line!r}")
    expected = base64.b64encode(hashlib.sha1((key + _WS_MAGIC).encode()).digest()).decode()
    accept = None
    for line in response.split(b"\r\n")[1:]:
        name, _, value = line.partition(b":")
        if name.strip().lower() == b"sec-websocket-accept":
            accept = value.strip().decode()
    if accept != expected:
        raise ProtocolError("bad Sec-WebSocket-Accept")
    sock.settimeout(None)
    return WsConnection(sock, mask_outgoing=True)
