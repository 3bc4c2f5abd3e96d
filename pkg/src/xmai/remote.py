"""Line-protocol client for out-of-process model providers.

Wire format: one JSON object per line, UTF-8, newline-terminated, no embedded
newlines.  Requests are ``{"id": int, "op": str, "payload": {...}}``; the op
is one of ``mask_fill``, ``text_embed``, ``image_embed``, ``pos_tag``.
Responses are ``{"id": int, "ok": true, "result": {...}}`` or
``{"id": int|null, "ok": false, "error": str}``.

Payload schemas:

=============  =============================================  =========================
op             payload                                        result
=============  =============================================  =========================
``mask_fill``  ``{"tokens": [str], "mask_index": int,         ``{"candidates":
               "k": int}`` (mask sits before                  [[word, prob], ...]}``
               ``tokens[mask_index]``)
``text_embed`` ``{"text": str}``                              ``{"vector": [float]}``
``image_embed`` ``{"path": str}``                             ``{"vector": [float]}``
``pos_tag``    ``{"tokens": [str]}``                          ``{"tags": [str]}``
=============  =============================================  =========================

Connection URIs: ``stdio:<command line>`` spawns the command and talks over
its standard streams; ``tcp:host:port`` connects a socket.  One connection is
opened per worker thread; requests on a connection are serialized.
"""

from __future__ import annotations

import json
import select
import shlex
import socket
import subprocess
import threading

import numpy as np

from .core import TokenStream
from .providers import ProviderError


class TransportError(ProviderError):
    """The byte stream failed: closed pipe, dead socket, or timeout."""


class ProtocolError(ProviderError):
    """The peer sent something that is not a valid response."""


class IdMismatchError(ProtocolError):
    """The response id does not match the request id."""


class RemoteConnection:
    """A single serialized request/response channel to one remote process."""

    def __init__(self, uri: str, timeout: float = 30.0):
        self.uri = uri
        self.timeout = timeout
        self._lock = threading.Lock()
        self._next_id = 0
        self._proc = None
        self._sock = None
        if uri.startswith("stdio:"):
            command = uri[len("stdio:"):]
            if not command.strip():
                raise ValueError("stdio URI needs a command")
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        elif uri.startswith("tcp:"):
            rest = uri[len("tcp:"):]
            host, _, port = rest.rpartition(":")
            if not host or not port.isdigit():
                raise ValueError(f"bad tcp URI {uri!r}, expected tcp:host:port")
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            self._sock_file = self._sock.makefile("rb")
        else:
            raise ValueError(f"unknown remote URI scheme in {uri!r}")

    def _send_line(self, data: bytes) -> None:
        if self._proc is not None:
            if self._proc.poll() is not None:
                raise TransportError("remote process has exited")
            try:
                self._proc.stdin.write(data)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise TransportError(f"write failed: {exc}") from exc
        else:
            try:
                self._sock.sendall(data)
            except OSError as exc:
                raise TransportError(f"write failed: {exc}") from exc

    def _read_line(self) -> bytes:
        if self._proc is not None:
            ready, _, _ = select.select([self._proc.stdout], [], [], self.timeout)
            if not ready:
                raise TransportError(f"timeout after {self.timeout}s waiting for response")
            line = self._proc.stdout.readline()
        else:
            try:
                line = self._sock_file.readline()
            except socket.timeout as exc:
                raise TransportError(f"timeout after {self.timeout}s") from exc
            except OSError as exc:
                raise TransportError(f"read failed: {exc}") from exc
        if not line:
            raise TransportError("connection closed by remote end")
        return line

    def call(self, op: str, payload: dict) -> dict:
        with self._lock:
            self._next_id += 1
            request_id = self._next_id
            request = {"id": request_id, "op": op, "payload": payload}
            self._send_line(json.dumps(request, ensure_ascii=False).encode("utf-8") + b"\n")
            line = self._read_line()
        try:
            response = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ProtocolError(f"unparseable response line: {exc}") from exc
        if not isinstance(response, dict) or "ok" not in response:
            raise ProtocolError(f"malformed response object: {response!r}")
        if response.get("id") != request_id:
            raise IdMismatchError(
                f"response id {response.get('id')!r} does not match request id {request_id}"
            )
        if not response["ok"]:
            raise ProviderError(f"remote {op} failed: {response.get('error', 'unknown error')}")
        result = response.get("result")
        if not isinstance(result, dict):
            raise ProtocolError("ok response without a result object")
        return result

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        if self._sock is not None:
            self._sock_file.close()
            self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


class RemoteEndpoint:
    """Per-thread connections to one URI, so each worker owns its channel."""

    def __init__(self, uri: str, timeout: float = 30.0):
        self.uri = uri
        self.timeout = timeout
        self._local = threading.local()
        self._all: list[RemoteConnection] = []
        self._all_lock = threading.Lock()

    def _connection(self) -> RemoteConnection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = RemoteConnection(self.uri, timeout=self.timeout)
            self._local.conn = conn
            with self._all_lock:
                self._all.append(conn)
        return conn

    def call(self, op: str, payload: dict) -> dict:
        return self._connection().call(op, payload)

    def close(self) -> None:
        with self._all_lock:
            for conn in self._all:
                conn.close()
            self._all.clear()
        self._local = threading.local()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


class RemoteMaskFill:
    def __init__(self, endpoint: RemoteEndpoint):
        self.endpoint = endpoint

    def fill(self, tokens: list[str], mask_index: int, k: int) -> list[tuple[str, float]]:
        result = self.endpoint.call(
            "mask_fill", {"tokens": list(tokens), "mask_index": mask_index, "k": k}
        )
        candidates = result.get("candidates")
        if not isinstance(candidates, list):
            raise ProtocolError("mask_fill result missing candidates list")
        out = []
        for item in candidates:
            try:
                word, prob = item
            except (TypeError, ValueError):
                raise ProtocolError(f"bad candidate entry {item!r}") from None
            out.append((str(word), float(prob)))
        return out[:k]


class RemoteTextEmbedder:
    def __init__(self, endpoint: RemoteEndpoint):
        self.endpoint = endpoint

    def embed(self, stream: TokenStream) -> np.ndarray:
        result = self.endpoint.call("text_embed", {"text": stream.text()})
        vector = result.get("vector")
        if not isinstance(vector, list):
            raise ProtocolError("text_embed result missing vector")
        return np.array(vector, dtype=float)


class RemotePosTagger:
    def __init__(self, endpoint: RemoteEndpoint):
        self.endpoint = endpoint

    def tag(self, stream: TokenStream) -> list[str]:
        surfaces = [t.surface for t in stream.tokens]
        result = self.endpoint.call("pos_tag", {"tokens": surfaces})
        tags = result.get("tags")
        if not isinstance(tags, list) or len(tags) != len(surfaces):
            raise ProtocolError("pos_tag result missing aligned tags")
        return [t if t == "noun" else "other" for t in tags]
