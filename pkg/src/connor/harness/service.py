"""Length-prefixed TCP query service.

Frame: 4-byte big-endian length of everything after it, 1-byte type,
payload. Types: 0x01 query (payload = token bytes), 0x81 result
(payload = result bytes), 0x82 error (payload = 1-byte reason code then
a UTF-8 message). The server holds only the encrypted index.
"""
from __future__ import annotations

import logging
import socket
import socketserver
import struct
import threading

from ..crypto import TransparentSwhe
from ..query import QueryToken, server_query
from ..secure_index import EncryptedIndex

log = logging.getLogger(__name__)

MSG_QUERY = 0x01
MSG_RESULT = 0x81
MSG_ERROR = 0x82
MAX_FRAME = 16 * 1024 * 1024

ERR_MALFORMED = 1
ERR_OVERSIZED = 2
ERR_BAD_TOKEN = 3
ERR_UNKNOWN_TYPE = 4
ERR_INTERNAL = 5


class ProtocolError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def encode_frame(kind: int, payload: bytes) -> bytes:
    return struct.pack(">IB", len(payload) + 1, kind) + payload


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("connection closed mid-frame")
        buf += chunk
    return bytes(buf)


def read_frame(sock: socket.socket) -> tuple[int, bytes]:
    (length,) = struct.unpack(">I", _recv_exact(sock, 4))
    if length == 0:
        raise ProtocolError(ERR_MALFORMED, "zero-length frame")
    if length > MAX_FRAME:
        raise ProtocolError(ERR_OVERSIZED, f"frame of {length} bytes exceeds {MAX_FRAME}")
    body = _recv_exact(sock, length)
    return body[0], body[1:]


def error_frame(code: int, message: str) -> bytes:
    return encode_frame(MSG_ERROR, bytes([code]) + message.encode("utf-8"))


class QueryServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, addr, enc: EncryptedIndex, hide_y: bool = False):
        self.enc = enc
        self.swhe = TransparentSwhe(enc.z)
        self.hide_y = hide_y
        super().__init__(addr, _Handler)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        sock = self.request
        srv: QueryServer = self.server
        while True:
            try:
                kind, payload = read_frame(sock)
            except ConnectionError:
                return
            except ProtocolError as exc:
                sock.sendall(error_frame(exc.code, str(exc)))
                return
            if kind != MSG_QUERY:
                sock.sendall(error_frame(ERR_UNKNOWN_TYPE, f"unexpected frame type 0x{kind:02x}"))
                return
            try:
                tok = QueryToken.from_bytes(payload)
            except ValueError as exc:
                sock.sendall(error_frame(ERR_BAD_TOKEN, str(exc)))
                return
            try:
                res = server_query(srv.enc, tok, srv.swhe, hide_y=srv.hide_y)
            except Exception as exc:  # keep serving other clients
                log.exception("query failed")
                sock.sendall(error_frame(ERR_INTERNAL, str(exc)))
                return
            sock.sendall(encode_frame(MSG_RESULT, res.to_bytes()))


def start_server(enc: EncryptedIndex, port: int = 0, host: str = "127.0.0.1",
                 hide_y: bool = False) -> QueryServer:
    """Start serving on a background thread; returns the server (``server_address`` has the port)."""
    srv = QueryServer((host, port), enc, hide_y)
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    return srv


def serve(enc: EncryptedIndex, port: int, host: str = "0.0.0.0", hide_y: bool = False) -> None:
    """Serve until interrupted."""
    with QueryServer((host, port), enc, hide_y) as srv:
        log.info("serving %d+%d records on %s:%d", len(enc.i_out), len(enc.i_in), host, port)
        srv.serve_forever()


class RemoteError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(f"server error {code}: {message}")
        self.code = code


def query_remote(addr, token_bytes: bytes, timeout: float = 30.0) -> bytes:
    """Send one token, return the raw result bytes."""
    host, port = addr
    with socket.create_connection((host, port), timeout=timeout) as sock:
        sock.sendall(encode_frame(MSG_QUERY, token_bytes))
        kind, payload = read_frame(sock)
    if kind == MSG_ERROR:
        raise RemoteError(payload[0] if payload else 0, payload[1:].decode("utf-8", "replace"))
    if kind != MSG_RESULT:
        raise ProtocolError(ERR_UNKNOWN_TYPE, f"unexpected frame type 0x{kind:02x}")
    return payload


def parse_addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)
