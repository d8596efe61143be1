// HUD overlay and the mode switcher. Pure DOM; never touches the command
// path, so overlay state cannot alter what gets sent.

import { StateMessage, isPbpMode } from "./protocol.js";

export const MODE_CHOICES = ["teleop", "alt", "cont", "nouser", "explicit"];

export function hudText(snap: StateMessage, connected: boolean): string {
  const m = snap.metrics;
  const lines = [
    `mode ${snap.mode}`,
    `t ${m.elapsed.toFixed(1)}s  tick ${snap.tick}`,
    `intervention ${(m.intervention_ratio * 100).toFixed(1)}%`,
    `phase ${snap.phase.toFixed(3)}`,
    forwardKeyLegend(snap.mode),
  ];
  if (snap.outcome) lines.push(`outcome: ${snap.outcome.toUpperCase()}`);
  if (!connected) lines.push("RECONNECTING…");
  return lines.join("\n");
}

export function forwardKeyLegend(mode: string): string {
  return isPbpMode(mode)
    ? "↑ forward: DISABLED (primitive drives)"
    : "↑ forward: enabled";
}

export interface ModeSwitchHandler {
  (mode: string, alpha?: number): void;
}

/** Build the mode <select> plus the alpha slider shown only for explicit. */
export function buildModeSwitcher(
  container: HTMLElement,
  initialMode: string,
  onSwitch: ModeSwitchHandler,
): void {
  const select = document.createElement("select");
  for (const m of MODE_CHOICES) {
    const opt = document.createElement("option");
    opt.value = m;
    opt.textContent = m;
    select.appendChild(opt);
  }
  select.value = initialMode.split(":")[0];

  const slider = document.createElement("input");
  slider.type = "range";
  slider.min = "0";
  slider.max = "1";
  slider.step = "0.1";
  slider.value = "0.5";

  const alphaLabel = document.createElement("span");
  const syncSlider = () => {
    const explicit = select.value === "explicit";
    slider.style.display = explicit ? "" : "none";
    alphaLabel.style.display = explicit ? "" : "none";
    alphaLabel.textContent = `α=${slider.value}`;
  };

  const emit = () => {
    if (select.value === "explicit") {
      onSwitch("explicit", parseFloat(slider.value));
    } else {
      onSwitch(select.value);
    }
  };

  select.addEventListener("change", () => {
    syncSlider();
    emit();
  });
  slider.addEventListener("change", () => {
    syncSlider();
    emit();
  });

  syncSlider();
  container.appendChild(select);
  container.appendChild(slider);
  container.appendChild(alphaLabel);
}
