"""Live shared-control server.

One fixed-rate control loop per session drives the same TrialRunner used by
batch trials, so a session log is field-for-field a batch log with a
replayed operator. Commands arrive over a WebSocket into a last-writer-wins
mailbox sampled once per tick; snapshots go out on a latest-only basis
(droppable), while commands are never dropped, only superseded.
"""
from __future__ import annotations

import asyncio
import json
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .blending import BlendKind, BlendMode, OperatorCommand
from .dmp import rollout
from .metrics import TrialMetrics
from .world import U_MAX, TaskKind, TrialRunner, generate_scene

STALE_TICKS = 10          # mailbox commands older than this decay to zero
PREVIEW_POINTS = 50
PBP_KINDS = (BlendKind.PBP_CONT, BlendKind.PBP_ALT, BlendKind.PBP_NOUSER)


class CreateSession(BaseModel):
    task: str = "reach"
    mode: str = "alt"
    seed: int = 0
    alpha: float | None = None


def _parse_mode(mode: str, alpha: float | None) -> BlendMode:
    if mode == "explicit" and alpha is not None:
        return BlendMode.explicit(alpha)
    return BlendMode.parse(mode)


class Session:
    def __init__(self, sid: str, task: TaskKind, mode: BlendMode, seed: int,
                 hz: float, dt: float | None = None):
        self.id = sid
        self.hz = hz
        # dt defaults to the loop period; passing a larger dt runs the
        # simulation faster than real time (test harnesses).
        self.dt = dt if dt is not None else 1.0 / hz
        self.seed = seed
        self.task = task
        self.runner = TrialRunner(generate_scene(seed, task), mode, dt=self.dt)
        self._latest_cmd: OperatorCommand | None = None
        self._cmd_tick = -1
        self._subscribers: list[asyncio.Queue] = []
        self._active_ticks = 0
        self._stop = asyncio.Event()
        self._task: asyncio.Task | None = None
        self.latest_snapshot: dict | None = None

    # -- command path -------------------------------------------------

    def submit_command(self, cmd: OperatorCommand) -> bool:
        """Last writer wins; returns True when the command had to be clamped."""
        clamped = cmd.clamped(U_MAX)
        self._latest_cmd = clamped
        self._cmd_tick = self.runner.tick
        return clamped is not cmd

    def _sample_command(self) -> OperatorCommand:
        cmd = self._latest_cmd
        if cmd is None or self.runner.tick - self._cmd_tick > STALE_TICKS:
            return OperatorCommand.zero()
        if self.runner.mode.kind in PBP_KINDS and cmd.u[0] > 0.0:
            # Forward motion in PBP modes comes from the primitive alone.
            cmd = OperatorCommand((0.0, cmd.u[1]), cmd.rot)
        return cmd

    def set_mode(self, mode: BlendMode):
        self.runner.mode = mode

    def reset(self, seed: int, task: TaskKind):
        mode = self.runner.mode
        self.seed = seed
        self.task = task
        self.runner = TrialRunner(generate_scene(seed, task), mode, dt=self.dt)
        self._latest_cmd = None
        self._cmd_tick = -1
        self._active_ticks = 0

    # -- snapshot path ------------------------------------------------

    def subscribe(self) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue(maxsize=1)
        self._subscribers.append(q)
        return q

    def unsubscribe(self, q: asyncio.Queue):
        if q in self._subscribers:
            self._subscribers.remove(q)

    def _publish(self, msg: dict):
        for q in self._subscribers:
            if q.full():
                try:
                    q.get_nowait()
                except asyncio.QueueEmpty:
                    pass
            q.put_nowait(msg)

    def snapshot(self, tick: int | None = None) -> dict:
        runner = self.runner
        robot = runner.robot
        scene = runner.scene
        rec = runner.records[-1] if runner.records else None
        snap = {
            "t": "state",
            "tick": runner.tick - 1 if tick is None else tick,
            "mode": runner.mode.code(),
            "robot": {
                "y": [float(robot.y[0]), float(robot.y[1])],
                "dy": [float(robot.dy[0]), float(robot.dy[1])],
                "heading": robot.heading,
                "radius": robot.radius,
            },
            "goals": [[float(g[0]), float(g[1])] for g in scene.goals],
            "target_index": scene.target_index,
            "obstacles": [
                {"pos": [float(ob.pos[0]), float(ob.pos[1])], "radius": ob.radius,
                 "activated": ob.activated}
                for ob in scene.obstacles
            ],
            "active_goal": rec.active_goal if rec else runner.bank.active_index,
            "colliding": rec.colliding if rec else False,
            "phase": runner.bank.dmps[runner.bank.active_index].state.phase,
            "success_radius": scene.success_radius,
            "outcome": runner.outcome.value if runner.outcome else None,
            "metrics": {
                "intervention_ratio": self._active_ticks / runner.tick if runner.tick else 0.0,
                "elapsed": runner.tick * runner.dt,
            },
        }
        if runner.mode.kind is not BlendKind.TELEOP:
            preview = rollout(runner.bank.dmps[runner.bank.active_index],
                              max_steps=600, stop_tol=1e-3)
            step = max(1, len(preview) // PREVIEW_POINTS)
            pts = list(preview[::step][:PREVIEW_POINTS - 1]) + [preview[-1]]
            snap["dmp_path"] = [[float(p[0]), float(p[1])] for p in pts]
        return snap

    # -- loop ----------------------------------------------------------

    async def run(self):
        loop = asyncio.get_running_loop()
        period = 1.0 / self.hz
        next_t = loop.time()
        while not self._stop.is_set():
            if not self.runner.done:
                cmd = self._sample_command()
                if cmd.active:
                    self._active_ticks += 1
                self.runner.step(cmd)
                snap = self.snapshot()
                self.latest_snapshot = snap
                self._publish(snap)
                if self.runner.done:
                    self._publish({
                        "t": "end",
                        "outcome": self.runner.outcome.value,
                        "metrics": self.trial_metrics(),
                    })
            next_t += period
            delay = next_t - loop.time()
            if delay > 0:
                try:
                    await asyncio.wait_for(self._stop.wait(), timeout=delay)
                except asyncio.TimeoutError:
                    pass
            else:
                next_t = loop.time()

    def start(self):
        self._task = asyncio.create_task(self.run())

    async def stop(self):
        self._stop.set()
        if self._task is not None:
            await self._task

    def trial_metrics(self) -> dict | None:
        if not self.runner.records:
            return None
        m = TrialMetrics.from_log(self.runner.log())
        return {
            "intervention_ratio": m.intervention_ratio,
            "task_time": m.task_time,
            "collision_ratio": m.collision_ratio,
            "outcome": m.outcome.value,
        }


def create_app(hz: float = 30.0, log_dir: str | Path = "logs",
               dt: float | None = None) -> FastAPI:
    app = FastAPI(title="pbp shared-control service")
    sessions: dict[str, Session] = {}
    log_dir = Path(log_dir)
    app.state.sessions = sessions

    def _get(sid: str) -> Session:
        sess = sessions.get(sid)
        if sess is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return sess

    @app.post("/sessions")
    async def create_session(body: CreateSession):
        try:
            task = TaskKind(body.task)
            mode = _parse_mode(body.mode, body.alpha)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"invalid mode/task: {exc}")
        sid = uuid.uuid4().hex[:12]
        sess = Session(sid, task, mode, body.seed, hz, dt=dt)
        sessions[sid] = sess
        sess.start()
        return {"id": sid, "snapshot": sess.snapshot(tick=-1)}

    @app.delete("/sessions/{sid}")
    async def end_session(sid: str):
        sess = _get(sid)
        await sess.stop()
        del sessions[sid]
        log = sess.runner.log()
        log_dir.mkdir(parents=True, exist_ok=True)
        path = log_dir / f"{sid}.jsonl"
        path.write_text(log.to_jsonl())
        return {"log": str(path), "outcome": log.header["outcome"],
                "metrics": sess.trial_metrics()}

    @app.get("/sessions/{sid}/log")
    async def get_log(sid: str):
        sess = _get(sid)
        return PlainTextResponse(sess.runner.log().to_jsonl(),
                                 media_type="application/jsonl")

    @app.websocket("/session/{sid}")
    async def session_socket(websocket: WebSocket, sid: str):
        sess = sessions.get(sid)
        if sess is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue = sess.subscribe()
        if sess.latest_snapshot is not None:
            await websocket.send_text(json.dumps(sess.latest_snapshot))

        async def sender():
            while True:
                msg = await queue.get()
                await websocket.send_text(json.dumps(msg))

        send_task = asyncio.create_task(sender())
        try:
            while True:
                raw = await websocket.receive_text()
                reply = _handle_client_message(sess, raw)
                if reply is not None:
                    await websocket.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            sess.unsubscribe(queue)

    return app


def _handle_client_message(sess: Session, raw: str) -> dict | None:
    try:
        msg = json.loads(raw)
        kind = msg["t"]
    except (json.JSONDecodeError, KeyError, TypeError):
        return {"t": "error", "message": "malformed message"}
    if kind == "cmd":
        try:
            u = msg["u"]
            cmd = OperatorCommand((float(u[0]), float(u[1])), float(msg.get("rot", 0.0)))
        except (KeyError, TypeError, ValueError, IndexError):
            return {"t": "error", "message": "malformed command"}
        was_clamped = sess.submit_command(cmd)
        return {"t": "ack", "tick": sess.runner.tick, "clamped": was_clamped}
    if kind == "mode":
        try:
            mode = _parse_mode(msg["mode"], msg.get("alpha"))
        except (KeyError, ValueError) as exc:
            return {"t": "error", "message": f"invalid mode: {exc}"}
        sess.set_mode(mode)
        return {"t": "ack", "mode": mode.code()}
    if kind == "reset":
        try:
            task = TaskKind(msg.get("task", sess.task.value))
            seed = int(msg["seed"])
        except (KeyError, ValueError) as exc:
            return {"t": "error", "message": f"invalid reset: {exc}"}
        sess.reset(seed, task)
        return {"t": "ack", "reset": True, "seed": seed}
    return {"t": "error", "message": f"unknown message type {kind!r}"}
