// Cockpit entry point: create a session from query parameters, pump the
// per-tick command coalescer, and render interpolated snapshots.

import { InputCoalescer } from "./input.js";
import { buildModeSwitcher, hudText } from "./hud.js";
import { SessionSocket, createSession, socketUrl } from "./net.js";
import { StateMessage, commandMessage, modeMessage } from "./protocol.js";
import { DEFAULT_CAMERA, DEFAULT_OVERLAYS, drawScene } from "./render.js";

const TICK_MS = 1000 / 30;

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? window.location.origin;
  const task = params.get("task") ?? "reach";
  const seed = parseInt(params.get("seed") ?? "0", 10);
  let mode = params.get("mode") ?? "alt";

  const canvas = document.getElementById("world") as HTMLCanvasElement;
  const hud = document.getElementById("hud") as HTMLElement;
  const switcher = document.getElementById("modes") as HTMLElement;
  const ctx = canvas.getContext("2d")!;

  let session;
  try {
    session = await createSession(server, task, mode, seed);
  } catch (err) {
    hud.textContent = `connection failed: ${err}\nretrying…`;
    setTimeout(start, 1500);
    return;
  }

  let prev: StateMessage = session.snapshot;
  let next: StateMessage = session.snapshot;
  let nextAt = performance.now();
  let connected = false;

  const socket = new SessionSocket(socketUrl(server, session.id), {
    onState: (s) => {
      prev = next;
      next = s;
      nextAt = performance.now() + TICK_MS;
    },
    onEnd: (e) => {
      hud.textContent = `trial over: ${e.outcome}\n${JSON.stringify(e.metrics)}`;
    },
    onError: (m) => console.warn("server:", m),
    onConnectionChange: (c) => {
      connected = c;
    },
  });

  buildModeSwitcher(switcher, mode, (m, alpha) => {
    mode = alpha === undefined ? m : `${m}:${alpha}`;
    socket.send(modeMessage(m, alpha));
  });

  const input = new InputCoalescer();
  window.addEventListener("keydown", (ev) => {
    if (input.keyDown(ev.code)) ev.preventDefault();
  });
  window.addEventListener("keyup", (ev) => {
    if (input.keyUp(ev.code)) ev.preventDefault();
  });

  // Pointer lock gives unbounded lateral mouse motion for rotation.
  canvas.addEventListener("click", () => canvas.requestPointerLock());
  window.addEventListener("mousemove", (ev) => {
    if (document.pointerLockElement === canvas) input.pointerMove(ev.movementX);
  });
  document.addEventListener("pointerlockchange", () => {
    if (document.pointerLockElement !== canvas) input.clear();
  });

  setInterval(() => {
    const cmd = input.sample(next.mode);
    if (cmd) socket.send(commandMessage(cmd.u, cmd.rot));
  }, TICK_MS);

  const frame = () => {
    const t = 1 - Math.max(0, nextAt - performance.now()) / TICK_MS;
    drawScene(ctx, prev, next, t, DEFAULT_CAMERA, DEFAULT_OVERLAYS);
    hud.textContent = hudText(next, connected);
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

start();
