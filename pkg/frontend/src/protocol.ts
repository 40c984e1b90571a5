// Wire protocol: JSON messages over a WebSocket, one message per text
// frame, all carrying v: 1. Mirrors the server's schema and enough of
// its mapping-config validation to flag bad slider values inline.

export const PROTOCOL_VERSION = 1;

export interface InputMessage {
  type: "input";
  v: 1;
  seq: number;
  t: number;
  p_x: number;
  gamma_h: number;
}

export interface RunInfo {
  status: string;
  clock?: number;
  countdown_left?: number;
  completion_time?: number;
  verdict?: string;
  hit_cone?: number;
}

export interface StateMessage {
  type: "state";
  v: 1;
  seq: number;
  t: number;
  pose: { x: number; y: number; gamma: number };
  pitch: number;
  pitch_rate: number;
  xdot: number;
  x_w: number;
  desired: { x: number; xdot: number; pitch: number; gamma: number; gammadot: number };
  spring: number;
  odometry: { x: number; y: number; gamma: number };
  flags: string[];
  run: RunInfo;
  mode: string;
}

export interface AckMessage {
  type: "ack";
  v: 1;
  ok: boolean;
  seq: number;
  reason: string;
  last_input_seq: number;
  mapping?: Record<string, number | string>;
}

export interface EventMessage {
  type: "event";
  v: 1;
  name: string;
  detail?: string;
  t?: number;
}

export interface ConfigMessage {
  type: "config";
  v: 1;
  seq: number;
  mapping?: Record<string, number | string>;
  gains?: Record<string, number | string>;
}

export type ServerMessage = StateMessage | AckMessage | EventMessage;
export type ClientMessage = InputMessage | ConfigMessage;

export function encodeMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

export function decodeServerMessage(text: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new Error(`not valid JSON: ${text.slice(0, 80)}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error("message must be a JSON object");
  }
  const msg = raw as { type?: string; v?: number };
  if (msg.v !== PROTOCOL_VERSION) {
    throw new Error(`unsupported protocol version ${msg.v}`);
  }
  if (msg.type === "state" || msg.type === "ack" || msg.type === "event") {
    return raw as ServerMessage;
  }
  throw new Error(`unexpected message type ${msg.type}`);
}

export function inputMessage(seq: number, t: number, lean: number, twist: number): InputMessage {
  return { type: "input", v: 1, seq, t, p_x: lean, gamma_h: twist };
}

export function configMessage(
  seq: number,
  mapping: Record<string, number | string>,
): ConfigMessage {
  return { type: "config", v: 1, seq, mapping };
}

// The tunable mapping keys, as the server names them.
export const MAPPING_SLIDERS: { key: string; label: string; min: number; max: number; step: number }[] = [
  { key: "vel.deadband", label: "lean deadband [m]", min: 0, max: 0.04, step: 0.001 },
  { key: "vel.swp", label: "lean switch point [m]", min: 0.02, max: 0.1, step: 0.005 },
  { key: "vel.max_in", label: "lean saturation [m]", min: 0.08, max: 0.3, step: 0.005 },
  { key: "vel.alpha1", label: "lean slope 1 [1/s]", min: 0, max: 8, step: 0.1 },
  { key: "vel.alpha2", label: "lean slope 2 [1/s]", min: 0, max: 20, step: 0.1 },
  { key: "yaw.deadband", label: "twist deadband [rad]", min: 0, max: 0.1, step: 0.005 },
  { key: "yaw.swp", label: "twist switch point [rad]", min: 0.05, max: 0.3, step: 0.01 },
  { key: "yaw.max_in", label: "twist saturation [rad]", min: 0.2, max: 1.0, step: 0.02 },
  { key: "yaw.alpha1", label: "twist slope 1 [1/s]", min: 0, max: 5, step: 0.1 },
  { key: "yaw.alpha2", label: "twist slope 2 [1/s]", min: 0, max: 10, step: 0.1 },
  { key: "acc.deadband", label: "tilt deadband [rad]", min: 0, max: 0.08, step: 0.005 },
  { key: "acc.slope", label: "tilt slope", min: 0, max: 0.5, step: 0.005 },
  { key: "acc.max_tilt", label: "tilt cap [rad]", min: 0.005, max: 0.3, step: 0.005 },
  { key: "k_spring", label: "spring stiffness [N/m]", min: 0, max: 600, step: 10 },
];

// Client-side mirror of the server's piecewise-map invariants so a bad
// slider combination is flagged before the round trip (the server ack
// remains the authority).
export function validateMapping(values: Record<string, number | string>): string | null {
  for (const section of ["vel", "yaw"]) {
    const deadband = Number(values[`${section}.deadband`]);
    const swp = Number(values[`${section}.swp`]);
    const maxIn = Number(values[`${section}.max_in`]);
    if (!(deadband >= 0 && deadband < swp && swp < maxIn)) {
      return `${section}: need 0 <= deadband < swp < max_in`;
    }
    const a1 = Number(values[`${section}.alpha1`]);
    const a2 = Number(values[`${section}.alpha2`]);
    if (a1 < 0 || a2 < 0) {
      return `${section}: slopes must be nonnegative`;
    }
  }
  const maxTilt = Number(values["acc.max_tilt"]);
  if (!(maxTilt > 0 && maxTilt <= 0.3)) {
    return "acc.max_tilt must be in (0, 0.3] rad";
  }
  if (Number(values["k_spring"]) < 0) {
    return "k_spring must be nonnegative";
  }
  return null;
}
