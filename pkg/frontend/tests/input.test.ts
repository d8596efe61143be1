import { describe, expect, it } from "vitest";

import {
  InputCoalescer,
  ROTATION_GAIN,
  ROTATION_MAX,
  TRANSLATION_GAIN,
} from "../src/input.js";

describe("key bindings", () => {
  it("maps arrows to lateral and longitudinal axes", () => {
    const input = new InputCoalescer();
    input.keyDown("ArrowLeft");
    expect(input.sample("teleop")?.u).toEqual([0, TRANSLATION_GAIN]);
    input.keyUp("ArrowLeft");
    input.sample("teleop"); // drain the release zero
    input.keyDown("ArrowRight");
    expect(input.sample("teleop")?.u).toEqual([0, -TRANSLATION_GAIN]);
    input.keyUp("ArrowRight");
    input.sample("teleop");
    input.keyDown("ArrowDown");
    expect(input.sample("teleop")?.u).toEqual([-TRANSLATION_GAIN, 0]);
  });

  it("ignores unbound keys", () => {
    const input = new InputCoalescer();
    expect(input.keyDown("KeyW")).toBe(false);
    expect(input.sample("teleop")).toBeNull();
  });

  it("opposing arrows cancel", () => {
    const input = new InputCoalescer();
    input.keyDown("ArrowLeft");
    input.keyDown("ArrowRight");
    expect(input.sample("teleop")).toBeNull();
  });
});

describe("forward key gating", () => {
  it("forward works in teleop", () => {
    const input = new InputCoalescer();
    input.keyDown("ArrowUp");
    expect(input.sample("teleop")?.u).toEqual([TRANSLATION_GAIN, 0]);
  });

  it.each(["alt", "cont", "nouser"])("forward is inert in %s", (mode) => {
    const input = new InputCoalescer();
    input.keyDown("ArrowUp");
    expect(input.sample(mode)).toBeNull();
    expect(input.forwardDisabled(mode)).toBe(true);
  });

  it("forward works under explicit arbitration", () => {
    const input = new InputCoalescer();
    input.keyDown("ArrowUp");
    expect(input.sample("explicit:0.5")?.u).toEqual([TRANSLATION_GAIN, 0]);
    expect(input.forwardDisabled("explicit:0.5")).toBe(false);
  });

  it("lateral input still passes in PBP modes", () => {
    const input = new InputCoalescer();
    input.keyDown("ArrowUp");
    input.keyDown("ArrowLeft");
    expect(input.sample("alt")?.u).toEqual([0, TRANSLATION_GAIN]);
  });
});

describe("release semantics", () => {
  it("emits exactly one zero command after release, then goes quiet", () => {
    const input = new InputCoalescer();
    input.keyDown("ArrowLeft");
    expect(input.sample("alt")).not.toBeNull();
    input.keyUp("ArrowLeft");
    expect(input.sample("alt")).toEqual({ u: [0, 0], rot: 0 });
    expect(input.sample("alt")).toBeNull();
    expect(input.sample("alt")).toBeNull();
  });

  it("is silent when nothing was ever pressed", () => {
    const input = new InputCoalescer();
    expect(input.sample("teleop")).toBeNull();
  });

  it("re-arms after new input", () => {
    const input = new InputCoalescer();
    input.keyDown("ArrowLeft");
    input.sample("alt");
    input.keyUp("ArrowLeft");
    input.sample("alt"); // release zero
    input.keyDown("ArrowRight");
    expect(input.sample("alt")).not.toBeNull();
    input.keyUp("ArrowRight");
    expect(input.sample("alt")).toEqual({ u: [0, 0], rot: 0 });
  });
});

describe("pointer rotation", () => {
  it("rotation is proportional to accumulated delta and consumed", () => {
    const input = new InputCoalescer();
    input.pointerMove(10);
    input.pointerMove(5);
    expect(input.sample("teleop")?.rot).toBeCloseTo(15 * ROTATION_GAIN);
    // Drain the release zero; further samples see no stale delta.
    input.sample("teleop");
    expect(input.sample("teleop")).toBeNull();
  });

  it("rotation saturates", () => {
    const input = new InputCoalescer();
    input.pointerMove(1e6);
    expect(input.sample("teleop")?.rot).toBe(ROTATION_MAX);
    input.sample("teleop");
    input.pointerMove(-1e6);
    expect(input.sample("teleop")?.rot).toBe(-ROTATION_MAX);
  });

  it("clear drops held keys, deltas, and the pending zero", () => {
    const input = new InputCoalescer();
    input.keyDown("ArrowLeft");
    input.pointerMove(50);
    input.sample("teleop");
    input.clear();
    expect(input.sample("teleop")).toBeNull();
  });
});
