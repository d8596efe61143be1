import { describe, expect, it } from "vitest";

import {
  DEFAULT_CAMERA,
  interpolateRobot,
  lerp,
  worldToScreen,
} from "../src/render.js";
import type { StateMessage, Vec2 } from "../src/protocol.js";

const W = 1100;
const H = 720;

function snapAt(y: Vec2, heading: number): StateMessage {
  return {
    t: "state",
    tick: 0,
    mode: "teleop",
    robot: { y, dy: [0, 0], heading, radius: 0.25 },
    goals: [[2, 0]],
    target_index: 0,
    obstacles: [],
    active_goal: 0,
    colliding: false,
    phase: 1,
    success_radius: 0.05,
    outcome: null,
    metrics: { elapsed: 0, intervention_ratio: 0 },
  };
}

describe("worldToScreen", () => {
  it("puts the camera center at the canvas center", () => {
    const [sx, sy] = worldToScreen(DEFAULT_CAMERA.center, DEFAULT_CAMERA, W, H);
    expect(sx).toBeCloseTo(W / 2);
    expect(sy).toBeCloseTo(H / 2);
  });

  it("world +y points up on screen", () => {
    const cam = { ...DEFAULT_CAMERA, center: [0, 0] as Vec2 };
    const [, above] = worldToScreen([0, 1], cam, W, H);
    const [, below] = worldToScreen([0, -1], cam, W, H);
    expect(above).toBeLessThan(below);
  });

  it("scale converts meters to pixels", () => {
    const cam = { ...DEFAULT_CAMERA, center: [0, 0] as Vec2, scale: 100 };
    const [x0] = worldToScreen([0, 0], cam, W, H);
    const [x1] = worldToScreen([1, 0], cam, W, H);
    expect(x1 - x0).toBeCloseTo(100);
  });
});

describe("lerp", () => {
  it("hits the endpoints and the midpoint", () => {
    expect(lerp(2, 6, 0)).toBe(2);
    expect(lerp(2, 6, 1)).toBe(6);
    expect(lerp(2, 6, 0.5)).toBe(4);
  });
});

describe("interpolateRobot", () => {
  const a = snapAt([0, 0], 0);
  const b = snapAt([1, 2], 1);

  it("interpolates position and heading linearly", () => {
    const mid = interpolateRobot(a, b, 0.5);
    expect(mid.y[0]).toBeCloseTo(0.5);
    expect(mid.y[1]).toBeCloseTo(1);
    expect(mid.heading).toBeCloseTo(0.5);
  });

  it("clamps t outside [0, 1]", () => {
    expect(interpolateRobot(a, b, -0.5).y[0]).toBeCloseTo(0);
    expect(interpolateRobot(a, b, 1.7).y[0]).toBeCloseTo(1);
  });

  it("takes the short way around for heading", () => {
    const near = snapAt([0, 0], Math.PI - 0.1);
    const far = snapAt([0, 0], -Math.PI + 0.1);
    const mid = interpolateRobot(near, far, 0.5);
    // Midpoint sits near ±π, not near 0.
    expect(Math.abs(Math.abs(mid.heading) - Math.PI)).toBeLessThan(1e-9);
  });
});
