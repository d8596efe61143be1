import json
import time

import pytest
from fastapi.testclient import TestClient

from pbp.service import STALE_TICKS, Session, create_app
from pbp.blending import BlendMode, OperatorCommand
from pbp.world import U_MAX, TaskKind, TrialLog


@pytest.fixture()
def client(tmp_path):
    app = create_app(hz=60.0, log_dir=tmp_path / "logs")
    with TestClient(app) as c:
        c.app = app
        yield c


def create_session(client, **overrides):
    body = {"task": "reach", "mode": "alt", "seed": 0}
    body.update(overrides)
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 200
    return resp.json()


def recv_until(ws, kind, limit=200):
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if msg["t"] == kind:
            return msg
    raise AssertionError(f"no {kind!r} message within {limit} frames")


class TestRest:
    def test_create_returns_initial_snapshot(self, client):
        data = create_session(client)
        snap = data["snapshot"]
        assert snap["t"] == "state"
        assert snap["tick"] == -1
        assert snap["mode"] == "alt"
        assert len(snap["goals"]) >= 2
        assert "dmp_path" in snap

    def test_teleop_snapshot_has_no_preview(self, client):
        data = create_session(client, mode="teleop")
        assert "dmp_path" not in data["snapshot"]

    def test_explicit_mode_with_alpha(self, client):
        data = create_session(client, mode="explicit", alpha=0.5)
        assert data["snapshot"]["mode"] == "explicit:0.5"

    def test_bad_mode_rejected(self, client):
        resp = client.post("/sessions", json={"task": "reach", "mode": "warp"})
        assert resp.status_code == 400

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope/log").status_code == 404
        assert client.delete("/sessions/nope").status_code == 404

    def test_log_endpoint_serves_jsonl(self, client):
        sid = create_session(client)["id"]
        time.sleep(0.1)
        text = client.get(f"/sessions/{sid}/log").text
        log = TrialLog.from_jsonl(text)
        assert log.header["seed"] == 0
        assert log.header["mode"] == "alt"

    def test_delete_stops_and_writes_log(self, client, tmp_path):
        sid = create_session(client)["id"]
        time.sleep(0.1)
        resp = client.delete(f"/sessions/{sid}")
        data = resp.json()
        assert data["outcome"] in ("success", "timeout", "aborted")
        assert data["metrics"]["task_time"] > 0
        saved = TrialLog.from_jsonl(open(data["log"]).read())
        assert saved.header["seed"] == 0
        assert client.delete(f"/sessions/{sid}").status_code == 404


class TestWebSocket:
    def test_streams_state(self, client):
        sid = create_session(client)["id"]
        with client.websocket_connect(f"/session/{sid}") as ws:
            snap = recv_until(ws, "state")
            ticks = [snap["tick"], recv_until(ws, "state")["tick"]]
        assert ticks[1] > ticks[0]

    def test_cmd_ack_and_clamp_flag(self, client):
        sid = create_session(client)["id"]
        with client.websocket_connect(f"/session/{sid}") as ws:
            ws.send_text(json.dumps({"t": "cmd", "u": [0.01, 0.0], "rot": 0.0}))
            ack = recv_until(ws, "ack")
            assert ack["clamped"] is False
            ws.send_text(json.dumps({"t": "cmd", "u": [5.0, 0.0]}))
            assert recv_until(ws, "ack")["clamped"] is True

    def test_mode_switch(self, client):
        sid = create_session(client)["id"]
        with client.websocket_connect(f"/session/{sid}") as ws:
            ws.send_text(json.dumps({"t": "mode", "mode": "cont"}))
            assert recv_until(ws, "ack")["mode"] == "cont"
            assert recv_until(ws, "state")["mode"] == "cont"

    def test_reset(self, client):
        sid = create_session(client)["id"]
        with client.websocket_connect(f"/session/{sid}") as ws:
            ws.send_text(json.dumps({"t": "reset", "seed": 9, "task": "obstacle"}))
            ack = recv_until(ws, "ack")
            assert ack["seed"] == 9
            snap = recv_until(ws, "state")
            assert len(snap["obstacles"]) == 3

    def test_malformed_messages_get_errors(self, client):
        sid = create_session(client)["id"]
        with client.websocket_connect(f"/session/{sid}") as ws:
            ws.send_text("not json")
            assert recv_until(ws, "error")
            ws.send_text(json.dumps({"t": "cmd"}))
            assert recv_until(ws, "error")
            ws.send_text(json.dumps({"t": "selfdestruct"}))
            assert recv_until(ws, "error")

    def test_unknown_session_closed(self, client):
        with pytest.raises(Exception):
            with client.websocket_connect("/session/nope") as ws:
                ws.receive_text()


class TestCommandMailbox:
    def make_session(self, mode):
        return Session("s", TaskKind.REACH, BlendMode.parse(mode), 0, 30.0)

    def test_last_writer_wins(self):
        sess = self.make_session("teleop")
        sess.submit_command(OperatorCommand((0.01, 0.0), 0.0))
        sess.submit_command(OperatorCommand((0.0, 0.02), 0.0))
        assert sess._sample_command().u == (0.0, 0.02)

    def test_submit_reports_clamping(self):
        sess = self.make_session("teleop")
        assert sess.submit_command(OperatorCommand((1.0, 0.0), 0.0))
        assert not sess.submit_command(OperatorCommand((U_MAX / 2, 0.0), 0.0))

    def test_stale_command_decays_to_zero(self):
        sess = self.make_session("teleop")
        sess.submit_command(OperatorCommand((0.01, 0.0), 0.0))
        for _ in range(STALE_TICKS + 1):
            sess.runner.step(OperatorCommand.zero())
        assert not sess._sample_command().active

    def test_command_fresh_within_window(self):
        sess = self.make_session("teleop")
        sess.submit_command(OperatorCommand((0.01, 0.0), 0.0))
        for _ in range(STALE_TICKS):
            sess.runner.step(OperatorCommand.zero())
        assert sess._sample_command().active

    def test_forward_component_inert_in_pbp_modes(self):
        # Forward progress belongs to the primitive; only lateral and
        # rotational user input pass through.
        sess = self.make_session("alt")
        sess.submit_command(OperatorCommand((0.03, 0.02), 0.5))
        cmd = sess._sample_command()
        assert cmd.u == (0.0, 0.02) and cmd.rot == 0.5

    def test_backward_component_passes_in_pbp_modes(self):
        sess = self.make_session("cont")
        sess.submit_command(OperatorCommand((-0.03, 0.0), 0.0))
        assert sess._sample_command().u[0] == -0.03

    def test_forward_component_kept_in_teleop(self):
        sess = self.make_session("teleop")
        sess.submit_command(OperatorCommand((0.03, 0.0), 0.0))
        assert sess._sample_command().u[0] == 0.03
