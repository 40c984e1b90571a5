// Top-down course view plus side gauges, drawn on two canvases.

import { StateMessage } from "./protocol.js";
import { BannerState } from "./session.js";

export interface CourseView {
  goalLine: number;
  cones: [number, number][];
  coneRadius: number;
  robotRadius: number;
  bounds: [number, number, number, number]; // xmin xmax ymin ymax
}

// Default three-cone drill; the cockpit has no course download channel,
// so the view matches the server's shipped default.
export const DEFAULT_COURSE: CourseView = {
  goalLine: 4.0,
  cones: [
    [1.0, -0.25],
    [2.0, 0.25],
    [3.0, -0.25],
  ],
  coneRadius: 0.1,
  robotRadius: 0.2,
  bounds: [-0.5, 4.5, -1.0, 1.0],
};

export class CourseRenderer {
  private trail: [number, number][] = [];

  constructor(
    private readonly ctx: CanvasRenderingContext2D,
    private readonly course: CourseView = DEFAULT_COURSE,
  ) {}

  private toPx(x: number, y: number): [number, number] {
    const [xmin, xmax, ymin, ymax] = this.course.bounds;
    const w = this.ctx.canvas.width;
    const h = this.ctx.canvas.height;
    const margin = 20;
    const sx = (w - 2 * margin) / (xmax - xmin);
    const sy = (h - 2 * margin) / (ymax - ymin);
    const s = Math.min(sx, sy);
    return [margin + (x - xmin) * s, h - margin - (y - ymin) * s];
  }

  reset(): void {
    this.trail = [];
  }

  draw(state: StateMessage | null, pose: { x: number; y: number; gamma: number } | null,
       banner: BannerState, connectionLost: boolean): void {
    const ctx = this.ctx;
    const { width, height } = ctx.canvas;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, width, height);

    const [xmin, xmax, ymin, ymax] = this.course.bounds;
    const [bx0, by0] = this.toPx(xmin, ymax);
    const [bx1, by1] = this.toPx(xmax, ymin);
    ctx.strokeStyle = "#3a4250";
    ctx.lineWidth = 1.5;
    ctx.strokeRect(bx0, by0, bx1 - bx0, by1 - by0);

    // goal line
    const [gx0, gy0] = this.toPx(this.course.goalLine, ymin);
    const [gx1, gy1] = this.toPx(this.course.goalLine, ymax);
    ctx.strokeStyle = "#37b24d";
    ctx.setLineDash([8, 6]);
    ctx.beginPath();
    ctx.moveTo(gx0, gy0);
    ctx.lineTo(gx1, gy1);
    ctx.stroke();
    ctx.setLineDash([]);

    // cones; on a collision verdict the offending cone lights up
    this.course.cones.forEach(([cx, cy], i) => {
      const [px, py] = this.toPx(cx, cy);
      const [edge] = this.toPx(cx + this.course.coneRadius, cy);
      const hit = banner.verdict === "collision" && banner.hitCone === i;
      ctx.fillStyle = hit ? "#ff6b6b" : "#e8890c";
      ctx.beginPath();
      ctx.arc(px, py, Math.max(3, edge - px), 0, 2 * Math.PI);
      ctx.fill();
    });

    // breadcrumb odometry trail
    if (state) {
      const last = this.trail[this.trail.length - 1];
      const o = state.odometry;
      if (!last || Math.hypot(o.x - last[0], o.y - last[1]) > 0.02) {
        this.trail.push([o.x, o.y]);
        if (this.trail.length > 2000) this.trail.shift();
      }
      ctx.strokeStyle = "#4dabf7";
      ctx.lineWidth = 1;
      ctx.beginPath();
      this.trail.forEach(([tx, ty], i) => {
        const [px, py] = this.toPx(tx, ty);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }

    // robot footprint with heading tick
    if (pose) {
      const [px, py] = this.toPx(pose.x, pose.y);
      const [edge] = this.toPx(pose.x + this.course.robotRadius, pose.y);
      const r = Math.max(4, edge - px);
      ctx.fillStyle = "#dee2e6";
      ctx.beginPath();
      ctx.arc(px, py, r, 0, 2 * Math.PI);
      ctx.fill();
      ctx.strokeStyle = "#10141a";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(px, py);
      ctx.lineTo(px + r * Math.cos(-pose.gamma), py + r * Math.sin(-pose.gamma));
      ctx.stroke();
    }

    // banner
    ctx.font = "16px system-ui, sans-serif";
    ctx.fillStyle = "#f8f9fa";
    const timer = banner.timer === null ? "" : ` ${banner.timer.toFixed(1)} s`;
    const count = banner.countdownLeft === null ? "" : ` starts in ${banner.countdownLeft.toFixed(1)}`;
    ctx.fillText(`${banner.status}${timer}${count}`, 14, 24);

    if (connectionLost) {
      ctx.fillStyle = "rgba(16, 20, 26, 0.8)";
      ctx.fillRect(0, 0, width, height);
      ctx.fillStyle = "#ff8787";
      ctx.font = "22px system-ui, sans-serif";
      ctx.fillText("connection lost", width / 2 - 70, height / 2);
    }
  }
}

function bar(ctx: CanvasRenderingContext2D, x: number, y: number, w: number, h: number,
             frac: number, color: string, label: string, text: string): void {
  ctx.strokeStyle = "#3a4250";
  ctx.strokeRect(x, y, w, h);
  const mid = x + w / 2;
  ctx.fillStyle = color;
  const extent = Math.min(Math.max(frac, -1), 1) * (w / 2);
  if (extent >= 0) ctx.fillRect(mid, y + 1, extent, h - 2);
  else ctx.fillRect(mid + extent, y + 1, -extent, h - 2);
  ctx.strokeStyle = "#5c6672";
  ctx.beginPath();
  ctx.moveTo(mid, y);
  ctx.lineTo(mid, y + h);
  ctx.stroke();
  ctx.fillStyle = "#adb5bd";
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText(label, x, y - 4);
  ctx.fillText(text, x + w + 8, y + h - 2);
}

export class GaugeRenderer {
  constructor(private readonly ctx: CanvasRenderingContext2D) {}

  draw(state: StateMessage | null): void {
    const ctx = this.ctx;
    const { width, height } = ctx.canvas;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, width, height);
    if (!state) return;
    const w = width - 120;
    // forward lean of the body renders as a positive (forward) bar:
    // plant pitch is positive leaning back, so flip the sign for display
    bar(ctx, 10, 30, w, 14, -state.pitch / 0.3, "#ffd43b", "pitch [rad]",
        (-state.pitch).toFixed(3));
    bar(ctx, 10, 66, w, 14, -state.desired.pitch / 0.3, "#fab005", "pitch target",
        (-state.desired.pitch).toFixed(3));
    bar(ctx, 10, 102, w, 14, state.xdot / 1.5, "#4dabf7", "velocity [m/s]",
        state.xdot.toFixed(2));
    bar(ctx, 10, 138, w, 14, state.desired.xdot / 1.5, "#339af0", "velocity target",
        state.desired.xdot.toFixed(2));
    bar(ctx, 10, 174, w, 14, state.spring / 100.0, "#69db7c", "spring force [N]",
        state.spring.toFixed(1));

    // saturation / status lamps
    const lamps: [string, boolean][] = [
      ["sat L", state.flags.includes("sat_left")],
      ["sat R", state.flags.includes("sat_right")],
      ["sat hip", state.flags.includes("sat_hip")],
      ["speed", state.flags.includes("speed_limit")],
      ["stale", state.flags.includes("stale")],
      ["tuned", state.flags.includes("gains_changed")],
    ];
    lamps.forEach(([label, on], i) => {
      const x = 10 + i * 64;
      ctx.fillStyle = on ? "#ff6b6b" : "#2b3440";
      ctx.beginPath();
      ctx.arc(x + 8, 216, 7, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillStyle = "#adb5bd";
      ctx.font = "11px system-ui, sans-serif";
      ctx.fillText(label, x, 238);
    });
  }
}
