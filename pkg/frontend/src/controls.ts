/** Operator input: drag steering, corner scale handles, slider, buttons.
 *
 * The mapping from pointer motion to commands is pure; the DOM wiring
 * lives at the bottom and is exercised only in the browser.
 */

import { GatewayClient } from "./net.js";
import { CommandMessage, Point } from "./types.js";
import {
  Box,
  ViewState,
  boundingBox,
  screenDeltaToWorld,
  worldToScreen,
} from "./view.js";

export const DRAG_GAIN = 1.0;
export const MAX_SPEED = 2.0; // m/s
export const SCALE_GAIN = 1.0;
export const MAX_SCALE_RATE = 0.5; // 1/s
export const HANDLE_RADIUS_PX = 12;
export const COMMAND_THROTTLE_MS = 80;

/** Pointer displacement (world meters over dt seconds) to a velocity
 * command, clamped in magnitude. */
export function dragVelocity(
  worldDelta: Point,
  dtSeconds: number,
  gain = DRAG_GAIN,
  maxSpeed = MAX_SPEED,
): { vx: number; vy: number } {
  if (dtSeconds <= 0) return { vx: 0, vy: 0 };
  let vx = (gain * worldDelta[0]) / dtSeconds;
  let vy = (gain * worldDelta[1]) / dtSeconds;
  const speed = Math.hypot(vx, vy);
  if (speed > maxSpeed) {
    vx *= maxSpeed / speed;
    vy *= maxSpeed / speed;
  }
  return { vx, vy };
}

/** Corner-handle displacement to per-axis scale rates. Outward motion
 * relative to the domain box grows the axis. */
export function cornerScaleRate(
  worldDelta: Point,
  corner: Point,
  box: Box,
  dtSeconds: number,
  gain = SCALE_GAIN,
  maxRate = MAX_SCALE_RATE,
): { sx: number; sy: number } {
  if (dtSeconds <= 0) return { sx: 0, sy: 0 };
  const cx = 0.5 * (box.minX + box.maxX);
  const cy = 0.5 * (box.minY + box.maxY);
  const halfX = Math.max(0.5 * (box.maxX - box.minX), 1e-9);
  const halfY = Math.max(0.5 * (box.maxY - box.minY), 1e-9);
  const signX = corner[0] >= cx ? 1 : -1;
  const signY = corner[1] >= cy ? 1 : -1;
  const clamp = (v: number) => Math.max(-maxRate, Math.min(maxRate, v));
  return {
    sx: clamp((gain * signX * worldDelta[0]) / (halfX * dtSeconds)),
    sy: clamp((gain * signY * worldDelta[1]) / (halfY * dtSeconds)),
  };
}

export function domainCorners(box: Box): Point[] {
  return [
    [box.minX, box.minY],
    [box.maxX, box.minY],
    [box.maxX, box.maxY],
    [box.minX, box.maxY],
  ];
}

/** Index of the corner within radius of a screen point, or -1. */
export function hitCorner(
  cornersScreen: Point[],
  sx: number,
  sy: number,
  radius = HANDLE_RADIUS_PX,
): number {
  for (let i = 0; i < cornersScreen.length; i += 1) {
    if (Math.hypot(cornersScreen[i][0] - sx, cornersScreen[i][1] - sy) <= radius) {
      return i;
    }
  }
  return -1;
}

export type EchoStatus = "pending" | "acked" | "error" | "late";

export interface EchoEntry {
  kind: string;
  sentAtFrame: number;
  status: EchoStatus;
  detail: string;
}

const ECHO_CAPACITY = 8;
const ACK_FRAME_BUDGET = 2;

/** Pending-command panel: pairs outbound commands with acks/errors and
 * flags anything unacknowledged after two frames. */
export class CommandEcho {
  entries: EchoEntry[] = [];
  private frameCount = 0;

  record(kind: string): void {
    this.entries.push({
      kind,
      sentAtFrame: this.frameCount,
      status: "pending",
      detail: "",
    });
    if (this.entries.length > ECHO_CAPACITY) this.entries.shift();
  }

  ack(command: string, appliesSeq: number): void {
    const entry = this.entries.find(
      (e) => e.status === "pending" && e.kind === command,
    );
    if (entry) {
      entry.status = "acked";
      entry.detail = `applies seq ${appliesSeq}`;
    }
  }

  error(detail: string): void {
    const entry = this.entries.find((e) => e.status === "pending");
    if (entry) {
      entry.status = "error";
      entry.detail = detail;
    } else {
      this.entries.push({
        kind: "(server)",
        sentAtFrame: this.frameCount,
        status: "error",
        detail,
      });
      if (this.entries.length > ECHO_CAPACITY) this.entries.shift();
    }
  }

  noteFrame(): void {
    this.frameCount += 1;
    for (const entry of this.entries) {
      if (
        entry.status === "pending" &&
        this.frameCount - entry.sentAtFrame > ACK_FRAME_BUDGET
      ) {
        entry.status = "late";
      }
    }
  }
}

interface DragState {
  mode: "translate" | "scale";
  cornerIndex: number;
  lastX: number;
  lastY: number;
  lastTime: number;
  lastSent: number;
}

export interface ControlElements {
  canvas: HTMLCanvasElement;
  kappa: HTMLInputElement;
  pause: HTMLElement;
  resume: HTMLElement;
  reset: HTMLElement;
}

export function attachControls(
  ui: ControlElements,
  state: ViewState,
  client: GatewayClient,
  echo: CommandEcho,
): void {
  const send = (cmd: CommandMessage): void => {
    if (client.send(cmd)) echo.record(cmd.type);
  };
  let drag: DragState | null = null;

  ui.canvas.addEventListener("pointerdown", (ev) => {
    if (!state.latest) return;
    const rect = ui.canvas.getBoundingClientRect();
    const sx = ev.clientX - rect.left;
    const sy = ev.clientY - rect.top;
    const corners = domainCorners(boundingBox(state.latest.domain));
    const cornersScreen = corners.map((c) => worldToScreen(state.transform, c));
    const hit = hitCorner(cornersScreen, sx, sy);
    drag = {
      mode: hit >= 0 ? "scale" : "translate",
      cornerIndex: hit,
      lastX: ev.clientX,
      lastY: ev.clientY,
      lastTime: ev.timeStamp,
      lastSent: 0,
    };
    ui.canvas.setPointerCapture(ev.pointerId);
  });

  ui.canvas.addEventListener("pointermove", (ev) => {
    if (!drag || !state.latest) return;
    const dtSeconds = (ev.timeStamp - drag.lastTime) / 1000;
    if (dtSeconds <= 0) return;
    const delta = screenDeltaToWorld(
      state.transform,
      ev.clientX - drag.lastX,
      ev.clientY - drag.lastY,
    );
    drag.lastX = ev.clientX;
    drag.lastY = ev.clientY;
    drag.lastTime = ev.timeStamp;
    if (ev.timeStamp - drag.lastSent < COMMAND_THROTTLE_MS) return;
    drag.lastSent = ev.timeStamp;
    const box = boundingBox(state.latest.domain);
    if (drag.mode === "translate") {
      const { vx, vy } = dragVelocity(delta, dtSeconds);
      send({ type: "set_velocity", vx, vy });
    } else {
      const corner = domainCorners(box)[drag.cornerIndex];
      const { sx, sy } = cornerScaleRate(delta, corner, box, dtSeconds);
      send({ type: "set_scale_rate", sx, sy });
    }
  });

  const release = (): void => {
    if (!drag) return;
    if (drag.mode === "translate") {
      send({ type: "set_velocity", vx: 0, vy: 0 });
    } else {
      send({ type: "set_scale_rate", sx: 0, sy: 0 });
    }
    drag = null;
  };
  ui.canvas.addEventListener("pointerup", release);
  ui.canvas.addEventListener("pointercancel", release);

  ui.kappa.addEventListener("change", () => {
    const kappa = Number(ui.kappa.value);
    if (Number.isFinite(kappa) && kappa > 0) {
      send({ type: "set_kappa", kappa });
    }
  });
  ui.pause.addEventListener("click", () => send({ type: "pause" }));
  ui.resume.addEventListener("click", () => send({ type: "resume" }));
  ui.reset.addEventListener("click", () => send({ type: "reset" }));
}
