// Browser entry point: wires the session to a WebSocket, pumps pilot
// input at a fixed 60 Hz, and renders at display rate with interpolated
// pose so the view stays smooth regardless of telemetry cadence.

import { InputModel } from "./input.js";
import { CourseRenderer, GaugeRenderer } from "./render.js";
import { CockpitSession } from "./session.js";
import { TuningPanel } from "./tuning.js";

const INPUT_HZ = 60;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

function connect(session: CockpitSession, url: string, statusBox: HTMLElement): WebSocket {
  statusBox.textContent = `connecting to ${url} ...`;
  const ws = new WebSocket(url);
  ws.onopen = () => {
    session.attach({ send: (text) => ws.send(text), close: () => ws.close() });
    statusBox.textContent = `connected to ${url}`;
  };
  ws.onmessage = (event) => session.handleMessage(String(event.data));
  ws.onclose = () => {
    session.detach();
    statusBox.textContent = "disconnected";
  };
  ws.onerror = () => {
    statusBox.textContent = "connection error";
  };
  return ws;
}

function main(): void {
  const session = new CockpitSession();
  const input = new InputModel();
  const courseCanvas = el<HTMLCanvasElement>("course");
  const gaugeCanvas = el<HTMLCanvasElement>("gauges");
  const statusBox = el<HTMLElement>("status");
  const course = new CourseRenderer(courseCanvas.getContext("2d")!);
  const gauges = new GaugeRenderer(gaugeCanvas.getContext("2d")!);
  const tuning = new TuningPanel(el("tuning"), session);

  const urlInput = el<HTMLInputElement>("server-url");
  let ws: WebSocket | null = null;
  el<HTMLButtonElement>("connect").addEventListener("click", () => {
    if (ws) ws.close();
    course.reset();
    ws = connect(session, urlInput.value, statusBox);
  });

  window.addEventListener("keydown", (event) => {
    if (document.activeElement instanceof HTMLInputElement) return;
    if (input.keyEvent(event.code, true)) event.preventDefault();
  });
  window.addEventListener("keyup", (event) => {
    if (input.keyEvent(event.code, false)) event.preventDefault();
  });
  window.addEventListener("blur", () => input.releaseAll());

  // fixed-rate input pump, independent of render load
  const dt = 1 / INPUT_HZ;
  let lastGamepadWarned = false;
  setInterval(() => {
    const pads = navigator.getGamepads ? navigator.getGamepads() : [];
    const pad = pads && pads[0];
    if (pad && pad.connected) {
      input.setGamepad(-(pad.axes[1] ?? 0), -(pad.axes[0] ?? 0));
      lastGamepadWarned = false;
    } else {
      input.setGamepad(null, null);
      if (pad === null && !lastGamepadWarned) lastGamepadWarned = true;
    }
    input.step(dt);
    if (session.status === "connected") {
      session.sendInput(performance.now() / 1000.0, input.lean, input.twist);
    }
  }, 1000 / INPUT_HZ);

  const frame = () => {
    course.draw(session.latest, session.interpolatedPose(1.0), session.banner(),
                session.telemetryStale());
    gauges.draw(session.latest);
    tuning.refresh();
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

main();
