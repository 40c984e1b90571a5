// Pilot input capture: held keys integrate lean/twist with spring-back,
// gamepad axes map directly. The emitter samples this model at a fixed
// 60 Hz, so multiple key events within one frame collapse into a single
// message (latest state wins).

export const LEAN_LIMIT = 0.15; // m
export const TWIST_LIMIT = 0.5; // rad

export interface InputConfig {
  leanRate: number; // m/s while a lean key is held
  twistRate: number; // rad/s while a twist key is held
  springTau: number; // s, exponential return to zero on release
}

export const DEFAULT_INPUT_CONFIG: InputConfig = {
  leanRate: 0.45,
  twistRate: 1.8,
  springTau: 0.12,
};

const clamp = (v: number, limit: number) => Math.min(Math.max(v, -limit), limit);

export class InputModel {
  lean = 0;
  twist = 0;
  private held = { forward: false, back: false, left: false, right: false };
  private gamepadLean: number | null = null;
  private gamepadTwist: number | null = null;

  constructor(readonly config: InputConfig = DEFAULT_INPUT_CONFIG) {}

  keyEvent(code: string, down: boolean): boolean {
    switch (code) {
      case "KeyW":
      case "ArrowUp":
        this.held.forward = down;
        return true;
      case "KeyS":
      case "ArrowDown":
        this.held.back = down;
        return true;
      case "KeyA":
      case "ArrowLeft":
        this.held.left = down;
        return true;
      case "KeyD":
      case "ArrowRight":
        this.held.right = down;
        return true;
      default:
        return false;
    }
  }

  // Gamepad axes override the keyboard while engaged: axis -1..1 maps
  // linearly onto the full lean/twist range and clamps there.
  setGamepad(leanAxis: number | null, twistAxis: number | null): void {
    this.gamepadLean = leanAxis === null ? null : clamp(leanAxis * LEAN_LIMIT, LEAN_LIMIT);
    this.gamepadTwist = twistAxis === null ? null : clamp(twistAxis * TWIST_LIMIT, TWIST_LIMIT);
  }

  releaseAll(): void {
    this.held = { forward: false, back: false, left: false, right: false };
    this.gamepadLean = null;
    this.gamepadTwist = null;
  }

  step(dt: number): void {
    if (this.gamepadLean !== null) {
      this.lean = this.gamepadLean;
    } else {
      const dir = (this.held.forward ? 1 : 0) - (this.held.back ? 1 : 0);
      if (dir !== 0) {
        this.lean = clamp(this.lean + dir * this.config.leanRate * dt, LEAN_LIMIT);
      } else {
        this.lean *= Math.exp(-dt / this.config.springTau);
        if (Math.abs(this.lean) < 1e-6) this.lean = 0;
      }
    }
    if (this.gamepadTwist !== null) {
      this.twist = this.gamepadTwist;
    } else {
      const dir = (this.held.left ? 1 : 0) - (this.held.right ? 1 : 0);
      if (dir !== 0) {
        this.twist = clamp(this.twist + dir * this.config.twistRate * dt, TWIST_LIMIT);
      } else {
        this.twist *= Math.exp(-dt / this.config.springTau);
        if (Math.abs(this.twist) < 1e-6) this.twist = 0;
      }
    }
  }
}
