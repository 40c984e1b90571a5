// Cockpit session: owns the connection state, the latest telemetry, the
// mapping mirror, pending config acks, and the run banner/timer. The
// transport is injected so tests can drive it with a fake socket; the
// browser passes a thin WebSocket wrapper.

import {
  AckMessage,
  ConfigMessage,
  EventMessage,
  StateMessage,
  configMessage,
  decodeServerMessage,
  encodeMessage,
  inputMessage,
  validateMapping,
} from "./protocol.js";

export interface WireSocket {
  send(text: string): void;
  close(): void;
}

export type SessionStatus = "connecting" | "connected" | "lost" | "closed";

export interface BannerState {
  status: string; // countdown | running | finishing | success | <failure> | freerun
  timer: number | null; // seconds shown on the run clock
  frozen: boolean; // true once the verdict fixes the time
  verdict: string | null;
  countdownLeft: number | null;
  hitCone: number | null;
}

const STALE_TELEMETRY_S = 0.5;

export class CockpitSession {
  status: SessionStatus = "connecting";
  latest: StateMessage | null = null;
  previous: StateMessage | null = null;
  mappingMirror: Record<string, number | string> = {};
  lastError: string | null = null;
  events: EventMessage[] = [];
  private socket: WireSocket | null = null;
  private inputSeq = 0;
  private configSeq = 0;
  private pendingConfigs = new Map<number, Record<string, number | string>>();
  private lastTelemetryWall: number | null = null;
  private readonly now: () => number;

  constructor(now: () => number = () => performance.now() / 1000.0) {
    this.now = now;
  }

  attach(socket: WireSocket): void {
    this.socket = socket;
    this.status = "connected";
    // empty config change: the ack carries the full mapping, seeding the mirror
    this.configSeq += 1;
    this.pendingConfigs.set(this.configSeq, {});
    socket.send(encodeMessage(configMessage(this.configSeq, {})));
  }

  detach(): void {
    this.socket = null;
    this.status = "closed";
  }

  handleMessage(text: string): void {
    let msg;
    try {
      msg = decodeServerMessage(text);
    } catch (err) {
      this.lastError = String(err);
      return;
    }
    if (msg.type === "state") {
      this.previous = this.latest;
      this.latest = msg;
      this.lastTelemetryWall = this.now();
      if (this.status === "lost") this.status = "connected";
    } else if (msg.type === "ack") {
      this.handleAck(msg);
    } else {
      this.events.push(msg);
      if (this.events.length > 64) this.events.shift();
    }
  }

  private handleAck(ack: AckMessage): void {
    const sent = this.pendingConfigs.get(ack.seq);
    this.pendingConfigs.delete(ack.seq);
    if (!ack.ok) {
      if (sent !== undefined) this.lastError = ack.reason; // rejected config
      return;
    }
    if (ack.mapping) {
      this.mappingMirror = { ...ack.mapping };
      this.lastError = null;
    }
  }

  // -- outgoing ---------------------------------------------------------

  sendInput(t: number, lean: number, twist: number): number {
    if (!this.socket) return -1;
    this.inputSeq += 1;
    this.socket.send(encodeMessage(inputMessage(this.inputSeq, t, lean, twist)));
    return this.inputSeq;
  }

  /** Send a mapping change; returns the seq, or -1 if rejected locally. */
  sendMappingChange(changes: Record<string, number | string>): number {
    if (!this.socket) return -1;
    if (this.controlsLocked()) {
      this.lastError = "controls locked during an active run";
      return -1;
    }
    // local validation needs a populated mirror; before the first sync
    // ack arrives the server remains the sole authority
    if (Object.keys(this.mappingMirror).length > 0) {
      const candidate = { ...this.mappingMirror, ...changes };
      const problem = validateMapping(candidate);
      if (problem !== null) {
        this.lastError = problem;
        return -1;
      }
    }
    this.configSeq += 1;
    const msg: ConfigMessage = configMessage(this.configSeq, changes);
    this.pendingConfigs.set(this.configSeq, changes);
    this.socket.send(encodeMessage(msg));
    return this.configSeq;
  }

  // -- derived view state -------------------------------------------------

  telemetryStale(): boolean {
    if (this.lastTelemetryWall === null) return false;
    return this.now() - this.lastTelemetryWall > STALE_TELEMETRY_S;
  }

  /** Benchmark integrity rule: no tuning while a run is in progress. */
  controlsLocked(): boolean {
    const status = this.latest?.run.status;
    return status === "running" || status === "finishing" || status === "countdown";
  }

  banner(): BannerState {
    const run = this.latest?.run;
    if (!run) {
      return { status: "freerun", timer: null, frozen: false, verdict: null,
               countdownLeft: null, hitCone: null };
    }
    const hitCone = run.hit_cone ?? null;
    const completion = run.completion_time;
    if (completion !== undefined) {
      return {
        status: run.status,
        timer: completion,
        frozen: true,
        verdict: run.verdict ?? null,
        countdownLeft: null,
        hitCone,
      };
    }
    return {
      status: run.status,
      timer: run.status === "countdown" ? null : run.clock ?? null,
      frozen: false,
      verdict: run.verdict ?? null,
      countdownLeft: run.status === "countdown" ? run.countdown_left ?? null : null,
      hitCone,
    };
  }

  /** Pose interpolated between the last two telemetry frames for smooth
   *  rendering at display rate. */
  interpolatedPose(alpha: number): { x: number; y: number; gamma: number } | null {
    if (!this.latest) return null;
    if (!this.previous) return this.latest.pose;
    const a = Math.min(Math.max(alpha, 0), 1);
    const p = this.previous.pose;
    const q = this.latest.pose;
    return {
      x: p.x + (q.x - p.x) * a,
      y: p.y + (q.y - p.y) * a,
      gamma: p.gamma + (q.gamma - p.gamma) * a,
    };
  }
}
