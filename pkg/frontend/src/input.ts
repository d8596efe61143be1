// Keyboard/mouse mapping and the per-tick command coalescer.
//
// Arrows move the robot laterally and back; the forward arrow only works in
// Teleop mode (the server enforces this too, the UI just doesn't send it).
// Horizontal pointer movement rotates. Key state and accumulated pointer
// delta are coalesced into at most one command per tick; releasing all input
// emits exactly one explicit zero command so the primitive can resume, then
// goes quiet until input returns.

import { Vec2, isPbpMode } from "./protocol.js";

export interface Command {
  u: Vec2;
  rot: number;
}

export const TRANSLATION_GAIN = 0.05; // m per tick at full deflection
export const ROTATION_GAIN = 0.02; // rad/s per pixel of pointer delta
export const ROTATION_MAX = 2.0; // rad/s

const KEY_AXES: Record<string, Vec2> = {
  ArrowUp: [1, 0],
  ArrowDown: [-1, 0],
  ArrowLeft: [0, 1],
  ArrowRight: [0, -1],
};

export class InputCoalescer {
  private held = new Set<string>();
  private pointerDelta = 0;
  private zeroPending = false;

  keyDown(code: string): boolean {
    if (!(code in KEY_AXES)) return false;
    this.held.add(code);
    return true;
  }

  keyUp(code: string): boolean {
    if (!(code in KEY_AXES)) return false;
    this.held.delete(code);
    return true;
  }

  pointerMove(deltaX: number): void {
    this.pointerDelta += deltaX;
  }

  clear(): void {
    this.held.clear();
    this.pointerDelta = 0;
    this.zeroPending = false;
  }

  /**
   * One command per tick, or null when there is nothing to say.
   * The tick after input ceases returns a single zero command.
   */
  sample(mode: string): Command | null {
    let ux = 0;
    let uy = 0;
    for (const code of this.held) {
      const [ax, ay] = KEY_AXES[code];
      ux += ax;
      uy += ay;
    }
    if (isPbpMode(mode) && ux > 0) ux = 0;

    const delta = this.pointerDelta;
    this.pointerDelta = 0;
    let rot = delta * ROTATION_GAIN;
    rot = Math.max(-ROTATION_MAX, Math.min(ROTATION_MAX, rot));

    const active = ux !== 0 || uy !== 0 || rot !== 0;
    if (active) {
      this.zeroPending = true;
      return { u: [ux * TRANSLATION_GAIN, uy * TRANSLATION_GAIN], rot };
    }
    if (this.zeroPending) {
      this.zeroPending = false;
      return { u: [0, 0], rot: 0 };
    }
    return null;
  }

  /** True while the forward binding is inert under the given mode. */
  forwardDisabled(mode: string): boolean {
    return isPbpMode(mode);
  }
}
