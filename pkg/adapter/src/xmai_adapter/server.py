"""Serving loops: stdio for spawned-subprocess use, tcp for shared use.

stdout (or the socket) carries protocol lines only; everything human-facing
goes to stderr.  Each connection is handled by a single-threaded loop, tcp
accepts any number of connections, and backend calls are serialized with
one process-wide lock so concurrent connections cannot interleave inside a
model.
"""

from __future__ import annotations

import logging
import socket
import sys
import threading

from .config import TOY, AdapterConfig, parse_listen
from .protocol import ModelSet, handle_line
from .toys import ToyEncoder, ToyMaskFill, ToyPosTagger

log = logging.getLogger("xmai_adapter")


def build_models(config: AdapterConfig) -> ModelSet:
    """Instantiate the configured backends; "toy" names need no downloads."""
    if config.maskfill_model == TOY:
        masker = ToyMaskFill()
    else:
        from .real import RealMaskFill

        masker = RealMaskFill(config.maskfill_model, device=config.device)
    if config.encoder_model == TOY:
        encoder = ToyEncoder()
    else:
        from .real import RealEncoder

        encoder = RealEncoder(
            config.encoder_model, device=config.device, batch_size=config.batch_size
        )
    if config.tagger_model == TOY:
        tagger = ToyPosTagger()
    else:
        from .real import RealPosTagger

        tagger = RealPosTagger(config.tagger_model, device=config.device)
    return ModelSet(masker=masker, encoder=encoder, tagger=tagger)


class _LockedModels:
    """ModelSet facade serializing every backend call."""

    def __init__(self, models: ModelSet):
        self._models = models
        self._lock = threading.Lock()
        self.masker = _Locked(models.masker, self._lock)
        self.encoder = _Locked(models.encoder, self._lock)
        self.tagger = _Locked(models.tagger, self._lock)


class _Locked:
    def __init__(self, target, lock):
        self._target = target
        self._lock = lock

    def __getattr__(self, name):
        method = getattr(self._target, name)

        def call(*args, **kwargs):
            with self._lock:
                return method(*args, **kwargs)

        return call


def serve_stdio(models: ModelSet) -> None:
    """Answer requests on stdin until EOF."""
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer
    for raw in stdin:
        response = handle_line(raw, models)
        if response is None:
            continue
        stdout.write(response)
        stdout.flush()


def _serve_connection(conn: socket.socket, models: ModelSet, peer) -> None:
    try:
        with conn, conn.makefile("rb") as reader:
            for raw in reader:
                response = handle_line(raw, models)
                if response is None:
                    continue
                conn.sendall(response)
    except OSError as exc:
        log.warning("connection %s dropped: %s", peer, exc)


def serve_tcp(models: ModelSet, port: int) -> None:
    """Accept connections forever; one handler thread per connection."""
    with socket.create_server(("127.0.0.1", port)) as server:
        bound_port = server.getsockname()[1]
        sys.stderr.write(f"ready on 127.0.0.1:{bound_port}\n")
        sys.stderr.flush()
        while True:
            conn, peer = server.accept()
            thread = threading.Thread(
                target=_serve_connection, args=(conn, models, peer), daemon=True
            )
            thread.start()


def serve(config: AdapterConfig) -> None:
    """Build backends per the config and run the requested listener."""
    mode, port = parse_listen(config.listen)
    models = build_models(config)
    if mode == "tcp":
        serve_tcp(_LockedModels(models), port)
    else:
        serve_stdio(models)
