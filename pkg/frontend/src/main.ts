/** Browser entry point: wires socket, view state, controls and the
 * render loop together. */

import { CommandEcho, attachControls, domainCorners } from "./controls.js";
import { GatewayClient, gatewayUrl } from "./net.js";
import {
  ViewState,
  acceptFrame,
  boundingBox,
  newViewState,
  render,
  worldToScreen,
} from "./view.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const canvas = byId<HTMLCanvasElement>("scene");
const banner = byId<HTMLDivElement>("banner");
const echoList = byId<HTMLUListElement>("echo");
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("canvas 2d context unavailable");

const state: ViewState = newViewState();
const echo = new CommandEcho();
let dirty = false;

const client = new GatewayClient(
  gatewayUrl(window.location.search),
  {
    onMessage: (msg) => {
      if (msg.type === "frame") {
        acceptFrame(state, msg);
        echo.noteFrame();
        dirty = true;
      } else if (msg.type === "ack") {
        echo.ack(msg.command, msg.applies_seq);
        renderEcho();
      } else {
        echo.error(msg.detail);
        renderEcho();
      }
    },
    onStatus: (status) => {
      state.status = status;
      banner.textContent =
        status === "open" ? "" : `disconnected, retrying (${status})`;
      banner.style.display = status === "open" ? "none" : "block";
    },
  },
  (url) => new WebSocket(url),
);

function renderEcho(): void {
  echoList.replaceChildren(
    ...echo.entries.map((entry) => {
      const li = document.createElement("li");
      li.className = entry.status;
      li.textContent = `${entry.kind}: ${entry.status}` +
        (entry.detail ? ` (${entry.detail})` : "");
      return li;
    }),
  );
}

function drawHandles(): void {
  if (!state.latest) return;
  const corners = domainCorners(boundingBox(state.latest.domain));
  ctx!.fillStyle = "#457b9d";
  for (const corner of corners) {
    const [sx, sy] = worldToScreen(state.transform, corner);
    ctx!.fillRect(sx - 5, sy - 5, 10, 10);
  }
}

function loop(): void {
  if (dirty) {
    dirty = false;
    render(ctx!, canvas.width, canvas.height, state);
    drawHandles();
    renderEcho();
  }
  requestAnimationFrame(loop);
}

attachControls(
  {
    canvas,
    kappa: byId<HTMLInputElement>("kappa"),
    pause: byId("pause"),
    resume: byId("resume"),
    reset: byId("reset"),
  },
  state,
  client,
  echo,
);
client.connect();
requestAnimationFrame(loop);
