"""Black-box serving behavior over real stdio and tcp processes."""

from __future__ import annotations

import json
import select
import socket
import subprocess
import sys

from PIL import Image

SERVE_ARGV = [sys.executable, "-m", "xmai_adapter.cli", "serve"]


class TestStdioServing:
    def test_mask_fill_round_trip(self, client):
        response = client.call(
            "mask_fill", {"tokens": ["a", "red", "car"], "mask_index": 2, "k": 3}
        )
        assert response["ok"] is True
        candidates = response["result"]["candidates"]
        assert 1 <= len(candidates) <= 3
        for word, prob in candidates:
            assert "##" not in word
            assert prob > 0

    def test_requests_are_stateless(self, client):
        payload = {"tokens": ["a", "dog"], "mask_index": 1, "k": 4}
        first = client.call("mask_fill", payload)
        client.call("text_embed", {"text": "unrelated traffic"})
        client.call("pos_tag", {"tokens": ["between", "calls"]})
        second = client.call("mask_fill", payload)
        assert first["result"] == second["result"]

    def test_image_embed_of_a_real_file(self, client, tmp_path):
        path = tmp_path / "swatch.png"
        Image.new("RGB", (16, 16), (200, 40, 40)).save(path)
        response = client.call("image_embed", {"path": str(path)})
        assert response["ok"] is True
        vector = response["result"]["vector"]
        assert len(vector) > 0
        assert abs(sum(x * x for x in vector) - 1.0) < 1e-6

    def test_malformed_line_then_normal_service(self, client):
        client.send_raw(b"{truncated\n")
        error = client.read_response()
        assert error["ok"] is False
        assert client.alive()
        response = client.call("pos_tag", {"tokens": ["table"]})
        assert response == {"id": 1, "ok": True, "result": {"tags": ["noun"]}}

    def test_ids_preserved_across_a_burst(self, client):
        for request_id in (3, 1, "zeta", 99):
            response = client.call("text_embed", {"text": "hi"}, request_id=request_id)
            assert response["id"] == request_id

    def test_eof_shuts_down_cleanly(self):
        proc = subprocess.Popen(
            [*SERVE_ARGV, "--listen", "stdio"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )
        proc.stdin.close()
        assert proc.wait(timeout=10) == 0

    def test_bad_listen_spec_fails_fast(self):
        proc = subprocess.run(
            [*SERVE_ARGV, "--listen", "smoke-signals"],
            capture_output=True,
            text=True,
            timeout=30,
        )
        assert proc.returncode == 1
        assert "error:" in proc.stderr


def _spawn_tcp():
    proc = subprocess.Popen(
        [*SERVE_ARGV, "--listen", "tcp:0"],
        stdin=subprocess.DEVNULL,
        stdout=subprocess.DEVNULL,
        stderr=subprocess.PIPE,
    )
    ready, _, _ = select.select([proc.stderr], [], [], 15.0)
    assert ready, "server never reported its port"
    line = proc.stderr.readline().decode()
    assert line.startswith("ready on 127.0.0.1:")
    port = int(line.rsplit(":", 1)[1])
    return proc, port


class _TcpPeer:
    def __init__(self, port: int):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=10)
        self.reader = self.sock.makefile("rb")

    def request(self, obj_or_raw) -> dict:
        if isinstance(obj_or_raw, bytes):
            self.sock.sendall(obj_or_raw)
        else:
            self.sock.sendall(json.dumps(obj_or_raw).encode() + b"\n")
        line = self.reader.readline()
        assert line, "connection closed unexpectedly"
        return json.loads(line)

    def close(self):
        self.reader.close()
        self.sock.close()


class TestTcpServing:
    def test_two_connections_interleaved(self):
        proc, port = _spawn_tcp()
        try:
            first, second = _TcpPeer(port), _TcpPeer(port)
            for round_trip in range(3):
                a = first.request(
                    {
                        "id": 100 + round_trip,
                        "op": "text_embed",
                        "payload": {"text": f"alpha {round_trip}"},
                    }
                )
                b = second.request(
                    {
                        "id": 200 + round_trip,
                        "op": "pos_tag",
                        "payload": {"tokens": ["cat"]},
                    }
                )
                assert a["id"] == 100 + round_trip and a["ok"] is True
                assert b["id"] == 200 + round_trip and b["ok"] is True
            first.close()
            second.close()
        finally:
            proc.kill()
            proc.wait(timeout=10)

    def test_garbage_on_one_connection_spares_the_other(self):
        proc, port = _spawn_tcp()
        try:
            noisy, steady = _TcpPeer(port), _TcpPeer(port)
            error = noisy.request(b"\x00\x01 not a request\n")
            assert error["ok"] is False
            good = steady.request(
                {"id": 1, "op": "pos_tag", "payload": {"tokens": ["lamp"]}}
            )
            assert good == {"id": 1, "ok": True, "result": {"tags": ["noun"]}}
            # The noisy connection keeps working too.
            recovered = noisy.request(
                {"id": 2, "op": "text_embed", "payload": {"text": "ok"}}
            )
            assert recovered["ok"] is True
            noisy.close()
            steady.close()
        finally:
            proc.kill()
            proc.wait(timeout=10)

    def test_disconnect_leaves_server_accepting(self):
        proc, port = _spawn_tcp()
        try:
            brief = _TcpPeer(port)
            brief.close()
            later = _TcpPeer(port)
            response = later.request(
                {"id": 5, "op": "text_embed", "payload": {"text": "still here"}}
            )
            assert response["ok"] is True
            later.close()
        finally:
            proc.kill()
            proc.wait(timeout=10)


class TestServeCli:
    def test_help_exits_zero(self):
        proc = subprocess.run(
            [sys.executable, "-m", "xmai_adapter.cli", "--help"],
            capture_output=True,
            timeout=60,
        )
        assert proc.returncode == 0

    def test_bad_batch_size_rejected(self):
        proc = subprocess.run(
            [*SERVE_ARGV, "--listen", "stdio", "--batch-size", "-1"],
            capture_output=True,
            text=True,
            timeout=30,
        )
        assert proc.returncode == 1
        assert "batch_size" in proc.stderr
