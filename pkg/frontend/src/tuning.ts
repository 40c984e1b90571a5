// Mapping tuning panel: one slider per tunable key plus the mode switch.
// Slider changes go out as config messages; the mirror repaints from the
// server ack, and everything locks while a benchmark run is active.

import { MAPPING_SLIDERS } from "./protocol.js";
import { CockpitSession } from "./session.js";

export class TuningPanel {
  private inputs = new Map<string, HTMLInputElement>();
  private modeSelect: HTMLSelectElement;
  private errorBox: HTMLElement;

  constructor(private readonly root: HTMLElement, private readonly session: CockpitSession) {
    const mode = document.createElement("div");
    mode.className = "tuning-row";
    const modeLabel = document.createElement("label");
    modeLabel.textContent = "mapping mode";
    this.modeSelect = document.createElement("select");
    for (const value of ["velocity", "acceleration"]) {
      const opt = document.createElement("option");
      opt.value = value;
      opt.textContent = value;
      this.modeSelect.appendChild(opt);
    }
    this.modeSelect.addEventListener("change", () => {
      this.session.sendMappingChange({ mode: this.modeSelect.value });
    });
    mode.append(modeLabel, this.modeSelect);
    root.appendChild(mode);

    for (const spec of MAPPING_SLIDERS) {
      const row = document.createElement("div");
      row.className = "tuning-row";
      const label = document.createElement("label");
      label.textContent = spec.label;
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(spec.min);
      slider.max = String(spec.max);
      slider.step = String(spec.step);
      const value = document.createElement("span");
      value.className = "tuning-value";
      slider.addEventListener("change", () => {
        this.session.sendMappingChange({ [spec.key]: Number(slider.value) });
      });
      slider.addEventListener("input", () => {
        value.textContent = slider.value;
      });
      this.inputs.set(spec.key, slider);
      row.append(label, slider, value);
      root.appendChild(row);
    }

    this.errorBox = document.createElement("div");
    this.errorBox.className = "tuning-error";
    root.appendChild(this.errorBox);
  }

  /** Repaint from the session mirror; called per animation frame. */
  refresh(): void {
    const mirror = this.session.mappingMirror;
    const locked = this.session.controlsLocked();
    if (typeof mirror["mode"] === "string" && document.activeElement !== this.modeSelect) {
      this.modeSelect.value = mirror["mode"];
    }
    this.modeSelect.disabled = locked;
    for (const [key, slider] of this.inputs) {
      const mirrored = mirror[key];
      if (typeof mirrored === "number" && document.activeElement !== slider) {
        slider.value = String(mirrored);
        const value = slider.nextElementSibling as HTMLElement | null;
        if (value) value.textContent = mirrored.toPrecision(3);
      }
      slider.disabled = locked;
    }
    this.errorBox.textContent = this.session.lastError ?? (locked ? "tuning locked during run" : "");
  }
}
