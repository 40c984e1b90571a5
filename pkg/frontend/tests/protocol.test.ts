import { describe, expect, it } from "vitest";

import {
  configMessage,
  decodeServerMessage,
  encodeMessage,
  inputMessage,
  validateMapping,
} from "../src/protocol.js";

describe("message codec", () => {
  it("encodes input messages with all fields", () => {
    const text = encodeMessage(inputMessage(7, 1.25, 0.1, -0.2));
    const parsed = JSON.parse(text);
    expect(parsed).toEqual({ type: "input", v: 1, seq: 7, t: 1.25, p_x: 0.1, gamma_h: -0.2 });
  });

  it("encodes config messages", () => {
    const text = encodeMessage(configMessage(3, { "vel.alpha1": 2.5 }));
    expect(JSON.parse(text).mapping["vel.alpha1"]).toBe(2.5);
  });

  it("decodes state, ack, and event messages", () => {
    const state = decodeServerMessage(
      JSON.stringify({ type: "state", v: 1, seq: 1, t: 0.1, pose: { x: 0, y: 0, gamma: 0 },
                       pitch: 0, pitch_rate: 0, xdot: 0, x_w: 0,
                       desired: { x: 0, xdot: 0, pitch: 0, gamma: 0, gammadot: 0 },
                       spring: 0, odometry: { x: 0, y: 0, gamma: 0 }, flags: [],
                       run: { status: "freerun" }, mode: "velocity" }));
    expect(state.type).toBe("state");
    const ack = decodeServerMessage(JSON.stringify(
      { type: "ack", v: 1, ok: true, seq: 2, reason: "", last_input_seq: 9 }));
    expect(ack.type).toBe("ack");
    const event = decodeServerMessage(JSON.stringify(
      { type: "event", v: 1, name: "input_stale" }));
    expect(event.type).toBe("event");
  });

  it("rejects wrong version, type, and shape", () => {
    expect(() => decodeServerMessage("{not json")).toThrow(/JSON/);
    expect(() => decodeServerMessage("[1,2]")).toThrow(/object/);
    expect(() => decodeServerMessage(JSON.stringify({ type: "state", v: 2 }))).toThrow(/version/);
    expect(() => decodeServerMessage(JSON.stringify({ type: "warp", v: 1 }))).toThrow(/type/);
  });
});

describe("mapping validation mirror", () => {
  const good: Record<string, number | string> = {
    "vel.deadband": 0.01, "vel.swp": 0.05, "vel.max_in": 0.15,
    "vel.alpha1": 2, "vel.alpha2": 10,
    "yaw.deadband": 0.03, "yaw.swp": 0.15, "yaw.max_in": 0.5,
    "yaw.alpha1": 1.5, "yaw.alpha2": 4,
    "acc.deadband": 0.02, "acc.slope": 0.09, "acc.max_tilt": 0.026,
    k_spring: 200,
  };

  it("accepts the default preset", () => {
    expect(validateMapping(good)).toBeNull();
  });

  it("rejects a switch point at or below the deadband", () => {
    expect(validateMapping({ ...good, "vel.swp": 0.01 })).toMatch(/deadband/);
  });

  it("rejects negative slopes and oversized tilt caps", () => {
    expect(validateMapping({ ...good, "yaw.alpha2": -1 })).toMatch(/slopes/);
    expect(validateMapping({ ...good, "acc.max_tilt": 0.5 })).toMatch(/max_tilt/);
    expect(validateMapping({ ...good, k_spring: -10 })).toMatch(/k_spring/);
  });
});
