// Top-down world-frame renderer. Drawing is a pure function of the latest
// snapshot pair plus the interpolation clock; nothing here mutates state or
// affects the command stream.

import { StateMessage, Vec2 } from "./protocol.js";

export interface Camera {
  center: Vec2; // world coords at the canvas center
  scale: number; // pixels per meter
  follow: boolean;
}

export interface Overlays {
  dmpPath: boolean;
  goals: boolean;
  collisionFlash: boolean;
}

export const DEFAULT_CAMERA: Camera = { center: [1.0, 0.0], scale: 220, follow: false };
export const DEFAULT_OVERLAYS: Overlays = { dmpPath: true, goals: true, collisionFlash: true };

export function worldToScreen(
  p: Vec2,
  cam: Camera,
  width: number,
  height: number,
): Vec2 {
  // +y in world space points up on screen.
  return [
    width / 2 + (p[0] - cam.center[0]) * cam.scale,
    height / 2 - (p[1] - cam.center[1]) * cam.scale,
  ];
}

export function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

/** Interpolate robot pose between two snapshots; t in [0,1]. */
export function interpolateRobot(
  prev: StateMessage,
  next: StateMessage,
  t: number,
): { y: Vec2; heading: number } {
  const clamped = Math.max(0, Math.min(1, t));
  let dh = next.robot.heading - prev.robot.heading;
  if (dh > Math.PI) dh -= 2 * Math.PI;
  if (dh < -Math.PI) dh += 2 * Math.PI;
  return {
    y: [
      lerp(prev.robot.y[0], next.robot.y[0], clamped),
      lerp(prev.robot.y[1], next.robot.y[1], clamped),
    ],
    heading: prev.robot.heading + dh * clamped,
  };
}

function circle(ctx: CanvasRenderingContext2D, c: Vec2, r: number, fill: string) {
  ctx.beginPath();
  ctx.arc(c[0], c[1], r, 0, 2 * Math.PI);
  ctx.fillStyle = fill;
  ctx.fill();
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  prev: StateMessage,
  next: StateMessage,
  t: number,
  cam: Camera,
  overlays: Overlays,
): void {
  const { width, height } = ctx.canvas;
  const pose = interpolateRobot(prev, next, t);
  const camera: Camera = cam.follow ? { ...cam, center: pose.y } : cam;
  const w2s = (p: Vec2) => worldToScreen(p, camera, width, height);

  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, width, height);
  if (overlays.collisionFlash && next.colliding) {
    ctx.fillStyle = "rgba(255,40,40,0.18)";
    ctx.fillRect(0, 0, width, height);
  }

  // Grid every meter.
  ctx.strokeStyle = "#1e2630";
  ctx.lineWidth = 1;
  for (let gx = -10; gx <= 10; gx++) {
    const [sx] = w2s([gx, 0]);
    ctx.beginPath();
    ctx.moveTo(sx, 0);
    ctx.lineTo(sx, height);
    ctx.stroke();
    const [, sy] = w2s([0, gx]);
    ctx.beginPath();
    ctx.moveTo(0, sy);
    ctx.lineTo(width, sy);
    ctx.stroke();
  }

  if (overlays.dmpPath && next.dmp_path && next.dmp_path.length > 1) {
    ctx.strokeStyle = "#4fc3f7";
    ctx.lineWidth = 2;
    ctx.beginPath();
    const [x0, y0] = w2s(next.dmp_path[0]);
    ctx.moveTo(x0, y0);
    for (const p of next.dmp_path.slice(1)) {
      const [x, y] = w2s(p);
      ctx.lineTo(x, y);
    }
    ctx.stroke();
  }

  if (overlays.goals) {
    next.goals.forEach((g, i) => {
      const r = next.success_radius * camera.scale;
      // Commanded target gets the yellow ball; estimated goal a ring.
      circle(ctx, w2s(g), Math.max(r, 5), i === next.target_index ? "#ffd54f" : "#546e7a");
      if (i === next.active_goal) {
        ctx.strokeStyle = "#4fc3f7";
        ctx.lineWidth = 2;
        ctx.beginPath();
        const [sx, sy] = w2s(g);
        ctx.arc(sx, sy, Math.max(r, 5) + 4, 0, 2 * Math.PI);
        ctx.stroke();
      }
    });
  }

  for (const ob of next.obstacles) {
    circle(ctx, w2s(ob.pos), ob.radius * camera.scale, ob.activated ? "#ef5350" : "#8d6e63");
  }

  const [rx, ry] = w2s(pose.y);
  circle(ctx, [rx, ry], next.robot.radius * camera.scale, next.colliding ? "#ff8a65" : "#81c784");
  ctx.strokeStyle = "#0d3311";
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.moveTo(rx, ry);
  ctx.lineTo(
    rx + Math.cos(pose.heading) * next.robot.radius * camera.scale,
    ry - Math.sin(pose.heading) * next.robot.radius * camera.scale,
  );
  ctx.stroke();
}
