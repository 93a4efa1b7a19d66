/** Message schemas shared with the gateway, plus runtime parsing.
 *
 * The server is authoritative; everything arriving on the socket is
 * validated here before the rest of the client sees it.
 */

export type Point = [number, number];

export interface FrameMessage {
  type: "frame";
  t: number;
  positions: Point[];
  cells: Point[][];
  domain: Point[];
  e_a: number;
  kappa: number;
  paused: boolean;
  seq: number;
}

export interface AckMessage {
  type: "ack";
  command: string;
  applies_seq: number;
}

export interface ErrorMessage {
  type: "error";
  detail: string;
}

export type ServerMessage = FrameMessage | AckMessage | ErrorMessage;

export type CommandMessage =
  | { type: "set_velocity"; vx: number; vy: number }
  | { type: "set_scale_rate"; sx: number; sy: number }
  | { type: "set_kappa"; kappa: number }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "reset"; seed?: number };

function isFiniteNumber(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function isPoint(x: unknown): x is Point {
  return (
    Array.isArray(x) &&
    x.length === 2 &&
    isFiniteNumber(x[0]) &&
    isFiniteNumber(x[1])
  );
}

function isPolygon(x: unknown): x is Point[] {
  return Array.isArray(x) && x.length >= 3 && x.every(isPoint);
}

/** Parse one server message; returns null for anything malformed. */
export function parseServerMessage(data: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case "frame": {
      if (
        !isFiniteNumber(msg.t) ||
        !isFiniteNumber(msg.e_a) ||
        !isFiniteNumber(msg.kappa) ||
        typeof msg.paused !== "boolean" ||
        !isFiniteNumber(msg.seq) ||
        !Array.isArray(msg.positions) ||
        !msg.positions.every(isPoint) ||
        !Array.isArray(msg.cells) ||
        !msg.cells.every(isPolygon) ||
        !isPolygon(msg.domain) ||
        msg.positions.length !== msg.cells.length
      ) {
        return null;
      }
      return msg as unknown as FrameMessage;
    }
    case "ack": {
      if (typeof msg.command !== "string" || !isFiniteNumber(msg.applies_seq)) {
        return null;
      }
      return msg as unknown as AckMessage;
    }
    case "error": {
      if (typeof msg.detail !== "string") return null;
      return msg as unknown as ErrorMessage;
    }
    default:
      return null;
  }
}
