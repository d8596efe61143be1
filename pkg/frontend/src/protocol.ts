// Wire protocol shared with the pbp server: JSON over a WebSocket at
// /session/{id}, plus a small REST surface for session lifecycle.

export type Vec2 = [number, number];

export interface RobotSnapshot {
  y: Vec2;
  dy: Vec2;
  heading: number;
  radius: number;
}

export interface ObstacleSnapshot {
  pos: Vec2;
  radius: number;
  activated: boolean;
}

export interface StateMessage {
  t: "state";
  tick: number;
  mode: string;
  robot: RobotSnapshot;
  goals: Vec2[];
  target_index: number;
  obstacles: ObstacleSnapshot[];
  active_goal: number;
  colliding: boolean;
  phase: number;
  success_radius: number;
  outcome: string | null;
  metrics: { intervention_ratio: number; elapsed: number };
  dmp_path?: Vec2[];
}

export interface EndMessage {
  t: "end";
  outcome: string;
  metrics: Record<string, unknown> | null;
}

export interface AckMessage {
  t: "ack";
  tick?: number;
  clamped?: boolean;
  mode?: string;
  reset?: boolean;
  seed?: number;
}

export interface ErrorMessage {
  t: "error";
  message: string;
}

export type ServerMessage = StateMessage | EndMessage | AckMessage | ErrorMessage;

const SERVER_KINDS = new Set(["state", "end", "ack", "error"]);

/** Parse one server frame; throws on anything outside the protocol. */
export function parseServerMessage(raw: string): ServerMessage {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    throw new Error(`unparseable server frame: ${raw.slice(0, 80)}`);
  }
  if (typeof msg !== "object" || msg === null || !("t" in msg)) {
    throw new Error("server frame missing message type");
  }
  const t = (msg as { t: unknown }).t;
  if (typeof t !== "string" || !SERVER_KINDS.has(t)) {
    throw new Error(`unknown server message type ${String(t)}`);
  }
  return msg as ServerMessage;
}

export function commandMessage(u: Vec2, rot: number): string {
  return JSON.stringify({ t: "cmd", u, rot });
}

export function modeMessage(mode: string, alpha?: number): string {
  return alpha === undefined
    ? JSON.stringify({ t: "mode", mode })
    : JSON.stringify({ t: "mode", mode, alpha });
}

export function resetMessage(seed: number, task: string): string {
  return JSON.stringify({ t: "reset", seed, task });
}

export const PBP_MODES = ["alt", "cont", "nouser"];

/** Modes where forward motion belongs to the primitive, not the keyboard. */
export function isPbpMode(mode: string): boolean {
  return PBP_MODES.includes(mode.split(":")[0]);
}

export interface SessionInfo {
  id: string;
  snapshot: StateMessage;
}
