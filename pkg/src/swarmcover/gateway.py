"""Live steerable simulation service over a WebSocket.

One authoritative asyncio loop advances the simulation at wall-clock
rate and fans frames out to clients through bounded per-client buffers
(oldest frames dropped, acks and errors never dropped). Steering
commands cross into the loop through a queue drained once per tick.

The live domain is a keyframe list grown one entry per step, always one
segment ahead of the integrator: commands drained at tick k shape the
segment starting at (k+1) dt, which is exactly the earliest segment the
previous step's predictor has not already consumed. Every quantity the
engine evaluates lands exactly on a stored keyframe, so replaying the
recorded list as a batch keyframe script reproduces the positions bit
for bit (see Session.replay_config). A live set_kappa changes the gain
mid-run, which a single batch config cannot express; replay equivalence
is stated for command sequences without it.
"""

from __future__ import annotations

import asyncio
import json
import math
from collections import deque
from contextlib import asynccontextmanager, suppress
from dataclasses import dataclass, field, replace

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .control import ControlConfig
from .domain import _validate_segments, keyframe_state
from .engine import evaluate, step_once
from .errors import CoverageError
from .geometry import ConvexPolygon, mass_centroid_of
from .scenario import ScenarioConfig, seed_positions

FRAME_BUFFER = 8  # frames a slow client may lag before dropping
_MIN_SCALE_STEP = 1e-3  # reject scale rates that nearly invert in one dt

COMMAND_KINDS = (
    "set_velocity", "set_scale_rate", "set_kappa", "pause", "resume", "reset",
)


@dataclass(eq=False)
class _Client:
    socket: WebSocket
    frames: deque = field(default_factory=lambda: deque(maxlen=FRAME_BUFFER))
    priority: deque = field(default_factory=deque)
    wake: asyncio.Event = field(default_factory=asyncio.Event)

    def push_frame(self, payload: str):
        self.frames.append(payload)
        self.wake.set()

    def push_priority(self, message: dict):
        self.priority.append(json.dumps(message))
        self.wake.set()


class _SessionScript:
    """Live keyframe list with the same evaluation path as batch replay."""

    def __init__(self, times, polys):
        self.times = times
        self.polys = polys

    def at(self, t):
        return keyframe_state(self.times, self.polys, t)


class Session:
    def __init__(self, cfg: ScenarioConfig, decimation: int = 2,
                 realtime_factor: float = 1.0):
        self.cfg = cfg
        self.dt = cfg.dt
        self.decimation = decimation
        self.realtime_factor = realtime_factor
        self.seq = 0
        self.clients: set[_Client] = set()
        self.pending: deque = deque()  # (client, command dict)
        self._start_run(cfg.rng_seed)

    # -- run state ---------------------------------------------------------

    def _start_run(self, seed: int):
        self.seed = seed
        base = replace(self.cfg, rng_seed=seed)
        self.positions = seed_positions(base)
        self.initial_positions = self.positions.copy()
        p0 = self.cfg.domain.at(0.0).polygon.vertices
        # the first segment [0, dt] is static: its endpoint was already
        # fixed before any command can be drained
        self.times = [0.0, self.dt]
        self.polys = [p0, p0]
        self.script = _SessionScript(self.times, self.polys)
        self.tick = 0
        self.velocity = (0.0, 0.0)
        self.scale_rate = (0.0, 0.0)
        self.control = replace(self.cfg.control)
        self.paused = False
        self.position_log = [self.positions.copy()]
        self._idle_eval = None

    def replay_config(self) -> dict:
        """Batch scenario reproducing this session's trajectory so far."""
        return {
            "n_agents": self.cfg.n_agents,
            "rng_seed": self.seed,
            "initial_positions": [list(p) for p in self.initial_positions],
            "domain": {
                "type": "keyframes",
                "times": list(self.times),
                "polygons": [[list(v) for v in p] for p in self.polys],
            },
            "control": {
                "kappa": self.control.kappa,
                "law": self.control.law,
                "feedforward": self.control.feedforward,
                "neumann_order": self.control.neumann_order,
            },
            "dt": self.dt,
            "duration": self.tick * self.dt,
            "record_every": 1,
            "containment": self.cfg.containment,
            "integrator": self.cfg.integrator,
        }

    # -- domain frontier ---------------------------------------------------

    def _transformed(self, verts):
        vx, vy = self.velocity
        sx, sy = self.scale_rate
        if sx == 0.0 and sy == 0.0:
            if vx == 0.0 and vy == 0.0:
                return verts  # static extension, segment ends share floats
            # pure translation: keep the exact dt * v shift per vertex
            new = tuple((x + vx * self.dt, y + vy * self.dt) for x, y in verts)
        else:
            _, (cx, cy) = mass_centroid_of(verts)
            fx = 1.0 + sx * self.dt
            fy = 1.0 + sy * self.dt
            new = tuple(
                (cx + fx * (x - cx) + vx * self.dt,
                 cy + fy * (y - cy) + vy * self.dt)
                for x, y in verts
            )
        poly = ConvexPolygon(new)
        _validate_segments((0.0, self.dt), (verts, poly.vertices))
        return poly.vertices

    def _check_motion(self, velocity, scale_rate) -> str | None:
        """Validate a candidate motion against the frontier polygon.

        Returns an error string, or None when the resulting segment is a
        legal (convex, shear-free, non-inverting) keyframe extension.
        """
        sx, sy = scale_rate
        if 1.0 + sx * self.dt < _MIN_SCALE_STEP or 1.0 + sy * self.dt < _MIN_SCALE_STEP:
            return "scale rate would invert the domain within one step"
        saved = (self.velocity, self.scale_rate)
        self.velocity, self.scale_rate = velocity, scale_rate
        try:
            self._transformed(self.polys[-1])
        except CoverageError as err:
            return str(err)
        finally:
            self.velocity, self.scale_rate = saved
        return None

    def _extend_frontier(self):
        """Append the keyframe at (tick + 2) dt under the current motion.

        If the geometry degenerates (a long shrink, say), the motion is
        frozen and the domain extended statically so the session lives on.
        A failed step leaves tick unchanged, so the guard keeps a retry
        from appending the same keyframe twice.
        """
        if len(self.times) == self.tick + 3:
            return
        frontier = self.polys[-1]
        try:
            new_verts = self._transformed(frontier)
        except CoverageError as err:
            self.velocity = (0.0, 0.0)
            self.scale_rate = (0.0, 0.0)
            new_verts = frontier
            self._broadcast_priority({
                "type": "error",
                "detail": f"domain motion frozen: {err}",
            })
        self.times.append((self.tick + 2) * self.dt)
        self.polys.append(new_verts)

    # -- commands ----------------------------------------------------------

    def _drain_commands(self):
        while self.pending:
            client, cmd = self.pending.popleft()
            kind = cmd["type"]
            if kind == "set_velocity":
                candidate = (cmd["vx"], cmd["vy"])
                fail = self._check_motion(candidate, self.scale_rate)
                if fail:
                    client.push_priority({"type": "error", "detail": fail})
                    continue
                self.velocity = candidate
                self._ack(client, kind, self.seq + 1)
            elif kind == "set_scale_rate":
                candidate = (cmd["sx"], cmd["sy"])
                fail = self._check_motion(self.velocity, candidate)
                if fail:
                    client.push_priority({"type": "error", "detail": fail})
                    continue
                self.scale_rate = candidate
                self._ack(client, kind, self.seq + 1)
            elif kind == "set_kappa":
                self.control = replace(self.control, kappa=cmd["kappa"])
                self._ack(client, kind, self.seq)
            elif kind == "pause":
                self.paused = True
                self._ack(client, kind, self.seq)
            elif kind == "resume":
                self.paused = False
                self._ack(client, kind, self.seq)
            elif kind == "reset":
                self._start_run(int(cmd.get("seed", self.cfg.rng_seed)))
                self._ack(client, kind, self.seq)

    def _ack(self, client, command, applies_seq):
        client.push_priority({
            "type": "ack", "command": command, "applies_seq": applies_seq,
        })

    # -- frames ------------------------------------------------------------

    def _frame_payload(self, t, positions, ev) -> str:
        return json.dumps({
            "type": "frame",
            "t": t,
            "positions": positions.tolist(),
            "cells": [
                [list(v) for v in cell.polygon.vertices] for cell in ev.tess.cells
            ],
            "domain": [list(v) for v in ev.polygon_vertices],
            "e_a": ev.e_a,
            "kappa": self.control.kappa,
            "paused": self.paused,
            "seq": self.seq,
        })

    def _broadcast(self, payload: str):
        for client in self.clients:
            client.push_frame(payload)

    def _broadcast_priority(self, message: dict):
        for client in self.clients:
            client.push_priority(message)

    # -- main loop ---------------------------------------------------------

    def step_iteration(self):
        """One loop iteration: drain, advance or heartbeat, bump seq.

        Synchronous so tests can drive a session tick by tick without an
        event loop; run_loop only adds the wall-clock pacing around it.
        """
        self._drain_commands()
        if self.paused:
            t = self.tick * self.dt
            key = (self.tick, self.control.kappa)
            if self._idle_eval is None or self._idle_eval[0] != key:
                ev = evaluate(self.positions, t, self.script, self.control,
                              singular_fallback=True)
                self._idle_eval = (key, ev)
            self._broadcast(self._frame_payload(t, self.positions,
                                                self._idle_eval[1]))
        else:
            self._idle_eval = None
            try:
                self._extend_frontier()
                new_pos, ev = step_once(
                    self.positions, self.tick, self.dt, self.script,
                    self.control, integrator=self.cfg.integrator,
                    containment=self.cfg.containment,
                    singular_fallback=True,
                )
            except CoverageError as err:
                self.paused = True
                self._broadcast_priority({
                    "type": "error",
                    "detail": f"simulation paused: {type(err).__name__}: {err}",
                })
            else:
                if self.tick % self.decimation == 0:
                    t = self.tick * self.dt
                    self._broadcast(self._frame_payload(t, self.positions, ev))
                self.positions = new_pos
                self.position_log.append(new_pos.copy())
                self.tick += 1
        self.seq += 1

    async def run_loop(self):
        loop = asyncio.get_running_loop()
        start = loop.time()
        iteration = 0
        while True:
            self.step_iteration()
            iteration += 1
            target = start + iteration * (self.dt / self.realtime_factor)
            delay = target - loop.time()
            await asyncio.sleep(delay if delay > 0.0 else 0.0)


# -- message validation ----------------------------------------------------

def _parse_command(text: str):
    """(command, None) for a well-formed command, else (None, detail)."""
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as err:
        return None, f"not valid JSON: {err.msg}"
    if not isinstance(msg, dict) or "type" not in msg:
        return None, "message must be an object with a 'type' field"
    kind = msg["type"]
    if kind not in COMMAND_KINDS:
        return None, f"unknown command type {kind!r}"
    required = {
        "set_velocity": ("vx", "vy"),
        "set_scale_rate": ("sx", "sy"),
        "set_kappa": ("kappa",),
        "pause": (),
        "resume": (),
        "reset": (),
    }[kind]
    for name in required:
        value = msg.get(name)
        if not isinstance(value, (int, float)) or isinstance(value, bool) \
                or not math.isfinite(value):
            return None, f"{kind} needs a finite numeric {name!r}"
    if kind == "set_kappa" and msg["kappa"] <= 0:
        return None, "kappa must be positive"
    if kind == "reset" and "seed" in msg:
        seed = msg["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            return None, "reset seed must be a nonnegative integer"
    return msg, None


async def _sender(client: _Client):
    try:
        while True:
            await client.wake.wait()
            client.wake.clear()
            while client.priority:
                await client.socket.send_text(client.priority.popleft())
            while client.frames:
                await client.socket.send_text(client.frames.popleft())
    except (WebSocketDisconnect, RuntimeError):
        return  # client vanished mid-send; the receiver cleans up


def build_app(cfg: ScenarioConfig, decimation: int = 2,
              realtime_factor: float = 1.0) -> FastAPI:
    session = Session(cfg, decimation=decimation,
                      realtime_factor=realtime_factor)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(session.run_loop())
        yield
        task.cancel()
        with suppress(asyncio.CancelledError):
            await task

    app = FastAPI(lifespan=lifespan)
    app.state.session = session

    @app.websocket("/session")
    async def session_socket(socket: WebSocket):
        await socket.accept()
        client = _Client(socket)
        session.clients.add(client)
        send_task = asyncio.create_task(_sender(client))
        try:
            while True:
                text = await socket.receive_text()
                msg, detail = _parse_command(text)
                if detail is not None:
                    client.push_priority({"type": "error", "detail": detail})
                else:
                    session.pending.append((client, msg))
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            session.clients.discard(client)
            send_task.cancel()
            with suppress(asyncio.CancelledError):
                await send_task

    return app


def serve(cfg: ScenarioConfig, host: str = "127.0.0.1", port: int = 8700,
          realtime_factor: float = 1.0, decimation: int = 2):
    import uvicorn

    app = build_app(cfg, decimation=decimation,
                    realtime_factor=realtime_factor)
    uvicorn.run(app, host=host, port=port, log_level="warning")
