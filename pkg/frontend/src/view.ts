/** Scene rendering: world-to-screen fit, discs, cells, domain, sparkline.
 *
 * The transform math is pure so it can be unit tested; drawing goes
 * through the canvas 2D context handed in by main.
 */

import { RingBuffer } from "./ring.js";
import { FrameMessage, Point } from "./types.js";

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export interface Box {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

export function boundingBox(points: Point[]): Box {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const [x, y] of points) {
    if (x < minX) minX = x;
    if (y < minY) minY = y;
    if (x > maxX) maxX = x;
    if (y > maxY) maxY = y;
  }
  return { minX, minY, maxX, maxY };
}

/** Fit a world box into a canvas, preserving aspect, y up in world. */
export function fitTransform(
  box: Box,
  width: number,
  height: number,
  marginPx = 24,
): Transform {
  const spanX = Math.max(box.maxX - box.minX, 1e-9);
  const spanY = Math.max(box.maxY - box.minY, 1e-9);
  const scale = Math.min(
    (width - 2 * marginPx) / spanX,
    (height - 2 * marginPx) / spanY,
  );
  const cx = 0.5 * (box.minX + box.maxX);
  const cy = 0.5 * (box.minY + box.maxY);
  return {
    scale,
    offsetX: width / 2 - scale * cx,
    offsetY: height / 2 + scale * cy,
  };
}

export function worldToScreen(tr: Transform, p: Point): Point {
  return [tr.scale * p[0] + tr.offsetX, -tr.scale * p[1] + tr.offsetY];
}

/** Screen-pixel displacement to world meters (y flipped back). */
export function screenDeltaToWorld(tr: Transform, dx: number, dy: number): Point {
  return [dx / tr.scale, -dy / tr.scale];
}

export interface ViewState {
  transform: Transform;
  latest: FrameMessage | null;
  status: string;
  sparkline: RingBuffer;
}

export function newViewState(capacity = 600): ViewState {
  return {
    transform: { scale: 1, offsetX: 0, offsetY: 0 },
    latest: null,
    status: "connecting",
    sparkline: new RingBuffer(capacity),
  };
}

/** Record a frame; rendering picks up only the newest one. */
export function acceptFrame(state: ViewState, frame: FrameMessage): void {
  state.latest = frame;
  state.sparkline.push(frame.e_a);
}

const DOMAIN_STYLE = "#1d3557";
const CELL_STYLE = "#a8b8c8";
const AGENT_STYLE = "#e63946";
const SPARK_STYLE = "#2a9d8f";
const AGENT_RADIUS_PX = 4;

function tracePolygon(
  ctx: CanvasRenderingContext2D,
  tr: Transform,
  polygon: Point[],
): void {
  ctx.beginPath();
  polygon.forEach((p, i) => {
    const [sx, sy] = worldToScreen(tr, p);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.closePath();
}

export function render(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  state: ViewState,
): void {
  ctx.clearRect(0, 0, width, height);
  const frame = state.latest;
  if (!frame) return;
  const tr = fitTransform(boundingBox(frame.domain), width, height);
  state.transform = tr;

  ctx.lineWidth = 1;
  ctx.strokeStyle = CELL_STYLE;
  for (const cell of frame.cells) {
    tracePolygon(ctx, tr, cell);
    ctx.stroke();
  }

  ctx.lineWidth = 3;
  ctx.strokeStyle = DOMAIN_STYLE;
  tracePolygon(ctx, tr, frame.domain);
  ctx.stroke();

  ctx.fillStyle = AGENT_STYLE;
  for (const p of frame.positions) {
    const [sx, sy] = worldToScreen(tr, p);
    ctx.beginPath();
    ctx.arc(sx, sy, AGENT_RADIUS_PX, 0, 2 * Math.PI);
    ctx.fill();
  }

  renderSparkline(ctx, width, state.sparkline);

  if (frame.paused) {
    ctx.fillStyle = "rgba(0, 0, 0, 0.65)";
    ctx.font = "bold 16px system-ui";
    ctx.fillText("paused", 12, 24);
  }
}

const SPARK_HEIGHT = 60;
const SPARK_WIDTH = 220;

function renderSparkline(
  ctx: CanvasRenderingContext2D,
  width: number,
  ring: RingBuffer,
): void {
  if (ring.length < 2) return;
  const values = ring.values();
  const top = 10;
  const left = width - SPARK_WIDTH - 10;
  const peak = Math.max(ring.max(), 1e-12);
  ctx.strokeStyle = SPARK_STYLE;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  values.forEach((v, i) => {
    const x = left + (i / (ring.capacity - 1)) * SPARK_WIDTH;
    const y = top + SPARK_HEIGHT * (1 - v / peak);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.font = "11px system-ui";
  const last = values[values.length - 1];
  ctx.fillText(`e_a ${last.toExponential(2)}`, left, top + SPARK_HEIGHT + 14);
}
