/** End-to-end drive of the live service with the real client stack.
 *
 * Spawns `python3 -m swarmcover serve` on a private port, connects the
 * GatewayClient through a Node WebSocket, and scripts the operator loop:
 * wait for convergence, start a drag-equivalent translation, watch the
 * domain move and the coverage error rise, release, watch it re-converge.
 * Every command must be acknowledged within two frames.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import WebSocket from "ws";
import { afterAll, beforeAll, expect, it } from "vitest";

import { CommandEcho, dragVelocity } from "../src/controls.js";
import { GatewayClient, SocketLike } from "../src/net.js";
import { FrameMessage } from "../src/types.js";
import { ViewState, acceptFrame, newViewState } from "../src/view.js";

const SCENARIO = {
  n_agents: 8,
  rng_seed: 4,
  domain: {
    type: "static",
    vertices: [
      [0.0, 0.0],
      [1.0, 0.0],
      [1.0, 1.0],
      [0.0, 1.0],
    ],
  },
  control: { kappa: 1.0, law: "tvd_d1", feedforward: true, neumann_order: 1 },
  dt: 0.05,
  duration: 1.0,
  record_every: 1,
  containment: "project",
  integrator: "heun",
};

const CONVERGED_EA = 0.03;
const RISEN_EA = 0.06;

function nodeSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const adapter: SocketLike = {
    send: (data: string) => ws.send(data),
    close: () => ws.close(),
    onopen: null,
    onclose: null,
    onerror: null,
    onmessage: null,
    get readyState() {
      return ws.readyState;
    },
  };
  ws.on("open", () => adapter.onopen?.());
  ws.on("close", () => adapter.onclose?.());
  ws.on("error", () => adapter.onerror?.());
  ws.on("message", (data) => adapter.onmessage?.({ data: data.toString() }));
  return adapter;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

const port = 18000 + Math.floor(Math.random() * 1000);
let workDir = "";
let server: ChildProcess | null = null;
let serverExited = false;
let serverStderr = "";

let client: GatewayClient;
let state: ViewState;
let echo: CommandEcho;
const frameLog: FrameMessage[] = [];
const acks: { command: string; appliesSeq: number; atFrame: number }[] = [];
const errors: string[] = [];
let framesReceived = 0;
let status = "closed";

async function waitFor(
  cond: () => boolean,
  what: string,
  timeoutMs = 30_000,
): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (serverExited) {
      throw new Error(`server exited while waiting for ${what}\n${serverStderr}`);
    }
    if (Date.now() - start > timeoutMs) {
      throw new Error(`timed out waiting for ${what}\n${serverStderr}`);
    }
    await sleep(20);
  }
}

function settledBelow(level: number, count: number): boolean {
  if (frameLog.length < count) return false;
  return frameLog.slice(-count).every((f) => f.e_a < level);
}

function domainMinX(frame: FrameMessage): number {
  return Math.min(...frame.domain.map(([x]) => x));
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "steer-ui-"));
  const scenarioPath = join(workDir, "scenario.json");
  writeFileSync(scenarioPath, JSON.stringify(SCENARIO));

  server = spawn(
    "python3",
    [
      "-u",
      "-m",
      "swarmcover",
      "serve",
      "--scenario",
      scenarioPath,
      "--port",
      String(port),
      "--realtime-factor",
      "10",
      "--decimation",
      "2",
    ],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  server.on("exit", () => {
    serverExited = true;
  });
  server.stderr?.on("data", (chunk) => {
    serverStderr += chunk.toString();
  });

  state = newViewState();
  echo = new CommandEcho();
  client = new GatewayClient(
    `ws://127.0.0.1:${port}/session`,
    {
      onMessage: (msg) => {
        if (msg.type === "frame") {
          framesReceived += 1;
          frameLog.push(msg);
          acceptFrame(state, msg);
          echo.noteFrame();
        } else if (msg.type === "ack") {
          acks.push({
            command: msg.command,
            appliesSeq: msg.applies_seq,
            atFrame: framesReceived,
          });
          echo.ack(msg.command, msg.applies_seq);
        } else {
          errors.push(msg.detail);
          echo.error(msg.detail);
        }
      },
      onStatus: (s) => {
        status = s;
      },
    },
    nodeSocket,
  );
  client.connect();
  await waitFor(() => status === "open", "the websocket to open", 60_000);
}, 90_000);

afterAll(async () => {
  client?.close();
  if (server && !serverExited) {
    server.kill("SIGTERM");
    const deadline = Date.now() + 5000;
    while (!serverExited && Date.now() < deadline) {
      await sleep(50);
    }
    if (!serverExited) server.kill("SIGKILL");
  }
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

it("steers the live session through a drag and release", async () => {
  const send = (cmd: Parameters<GatewayClient["send"]>[0]): number => {
    const before = framesReceived;
    expect(client.send(cmd)).toBe(true);
    echo.record(cmd.type);
    return before;
  };

  // phase 1: the swarm settles on the static square
  await waitFor(
    () => settledBelow(CONVERGED_EA, 10),
    "the swarm to converge",
    60_000,
  );
  const baseline = frameLog[frameLog.length - 1];
  const baselineMinX = domainMinX(baseline);

  // phase 2: drag right; 3 cm of world per 100 ms frame maps to 0.3 m/s
  const { vx, vy } = dragVelocity([0.03, 0], 0.1);
  expect(vx).toBeCloseTo(0.3, 12);
  expect(vy).toBe(0);
  const sentAt = send({ type: "set_velocity", vx, vy });
  await waitFor(() => acks.length >= 1, "the drag command ack");
  const dragAck = acks[0];
  expect(dragAck.command).toBe("set_velocity");
  expect(dragAck.atFrame - sentAt).toBeLessThanOrEqual(2);

  // the first frame past the ack's effective step shows the moved domain
  await waitFor(
    () => frameLog.some((f) => f.seq >= dragAck.appliesSeq + 1),
    "a frame after the command applies",
  );
  const firstMoved = frameLog.find((f) => f.seq >= dragAck.appliesSeq + 1)!;
  expect(domainMinX(firstMoved)).toBeGreaterThan(baselineMinX + 0.001);

  // the coverage error climbs off its converged floor while tracking
  await waitFor(
    () =>
      frameLog.some((f) => f.seq > dragAck.appliesSeq && f.e_a > RISEN_EA),
    "the coverage error to rise",
    60_000,
  );
  expect(state.sparkline.max()).toBeGreaterThan(RISEN_EA);

  // let the domain travel a little before releasing
  await waitFor(
    () => domainMinX(frameLog[frameLog.length - 1]) > baselineMinX + 0.5,
    "the domain to travel",
    60_000,
  );

  // phase 3: release the drag and watch the swarm re-converge
  const release = dragVelocity([0, 0], 0.1);
  const releasedAt = send({ type: "set_velocity", ...release });
  await waitFor(() => acks.length >= 2, "the release ack");
  const releaseAck = acks[1];
  expect(releaseAck.command).toBe("set_velocity");
  expect(releaseAck.atFrame - releasedAt).toBeLessThanOrEqual(2);

  const logAtRelease = frameLog.length;
  await waitFor(
    () =>
      frameLog.length > logAtRelease + 10 && settledBelow(CONVERGED_EA, 10),
    "the swarm to re-converge",
    60_000,
  );

  // the domain stopped where it was released
  const stopped = frameLog[frameLog.length - 1];
  await waitFor(
    () => frameLog[frameLog.length - 1].seq > stopped.seq + 20,
    "a few more frames",
  );
  const later = frameLog[frameLog.length - 1];
  expect(domainMinX(later)).toBeCloseTo(domainMinX(stopped), 6);

  // the echo panel saw both commands acknowledged, never late
  expect(echo.entries.map((e) => e.status)).toEqual(["acked", "acked"]);
  expect(errors).toEqual([]);
}, 240_000);
