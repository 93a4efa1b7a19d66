"""Fixed-step swarm simulation loop.

Time is always k * dt (never accumulated), so a run is reproducible
bit-for-bit from its configuration and the live gateway can replay a
recorded session through this same code path. Heun is the default
integrator; its predictor is evaluated at (k + 1) * dt and is always
projected into the domain there, because the tessellation needs strictly
interior generators regardless of the containment policy. The policy
itself only governs the corrected update.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .control import ControlConfig, desired_rate, tvd_c, tvd_d1
from .domain import StaticScript
from .errors import (
    AgentOutsideDomain,
    CoincidentAgents,
    SingularSystem,
    WindowTooLong,
)
from .geometry import polygon_mass_centroid, project_into
from .kernels import (
    CellMoments,
    cell_moments,
    feedforward_vectors,
    jacobian_blocks,
    locational_cost,
)
from .scenario import ScenarioConfig, seed_positions
from .tessellation import Tessellation, neighbor_histogram, voronoi_partition


@dataclass
class StepEval:
    """Everything the control law derives from one instant."""

    polygon_vertices: tuple
    tess: Tessellation
    moments: CellMoments
    velocities: np.ndarray  # (n, 2)
    e_a: float
    cost: float


def aggregated_error(positions, centroids) -> float:
    """Norm of the stacked per-agent centroid offsets."""
    return float(np.linalg.norm(np.asarray(positions) - centroids))


def evaluate(positions, t, script, control: ControlConfig,
             singular_fallback: bool = False) -> StepEval:
    """Tessellate at time t and compute the commanded velocities.

    With singular_fallback, a singular implicit system degrades to the
    truncated expansion instead of raising; batch runs keep the raise.
    """
    state = script.at(t)
    tess = voronoi_partition(positions, state.polygon)
    moments = cell_moments(tess)
    ff = None
    if control.feedforward:
        ff = feedforward_vectors(tess, moments, state.edge_speeds)
    b = desired_rate(moments, positions, control.kappa, ff)
    jac = jacobian_blocks(tess, moments, positions)
    if control.law == "tvd_c":
        try:
            out = tvd_c(jac, b)
        except SingularSystem:
            if not singular_fallback:
                raise
            out = tvd_d1(jac, b, order=control.neumann_order)
    else:
        out = tvd_d1(jac, b, order=control.neumann_order)
    e_a = aggregated_error(positions, moments.centroid)
    cost = locational_cost(tess, moments, positions)
    return StepEval(state.polygon.vertices, tess, moments, out.velocities, e_a, cost)


TIE_EPS = 1e-7  # agents closer than this cannot be tessellated apart
TIE_FLOOR_SCALE = 0.02  # re-separation distance relative to sqrt(area)
_FAN_STEP = math.pi / 12.0  # angle between parking rays
_FAN_HALF = 5  # rays swept up to +-5 steps off the centroid ray


def _ray_span(anchor, direction, planes):
    """Distance from an interior point to the polygon boundary along a ray."""
    span = math.inf
    for nx, ny, b in planes:
        denom = nx * direction[0] + ny * direction[1]
        if denom > 0.0:
            span = min(span, (b - nx * anchor[0] - ny * anchor[1]) / denom)
    return max(span, 0.0)


def _resolve_ties(out, polygon):
    """Deterministically re-separate agents merged by boundary projection.

    When the domain sweeps past slow agents, a moving corner maps its
    whole outside quadrant onto one point, so projection alone can emit
    coincident generators, dozens at once when stragglers pool behind a
    trailing corner. Each agent within TIE_EPS of a lower-indexed one
    moves to the first free slot on a fan of rays anchored at the merge
    point: the ray toward the domain centroid plus rotations of it, each
    clipped to the polygon, with slots spaced by a floor proportional to
    the domain scale so the coupling blocks (which grow like 1/distance)
    stay bounded. Nearer slots fill first across the whole fan. The
    lower index keeps the projected point, so the outcome is a pure
    function of the positions and the polygon.
    """
    n = out.shape[0]
    if n < 2:
        return out
    area, centre = polygon_mass_centroid(polygon)
    centre = np.array(centre)
    floor = TIE_FLOOR_SCALE * math.sqrt(area)
    planes = None
    for i in range(1, n):
        diff = out[:i] - out[i]
        nearest = int(np.argmin((diff * diff).sum(axis=1)))
        gap2 = float((diff[nearest] * diff[nearest]).sum())
        if gap2 >= TIE_EPS * TIE_EPS:
            continue
        anchor = out[i].copy()
        ray = centre - anchor
        length = float(np.hypot(ray[0], ray[1]))
        if length <= floor:
            raise CoincidentAgents(
                nearest, i, f"agents {nearest} and {i} coincide in a domain "
                            "too small to separate them")
        ray /= length
        if planes is None:
            planes = polygon.edge_normals_offsets()
        rays = []
        for k in (0, *(s * j for j in range(1, _FAN_HALF + 1)
                       for s in (1, -1))):
            c, s = math.cos(k * _FAN_STEP), math.sin(k * _FAN_STEP)
            direction = np.array([c * ray[0] - s * ray[1],
                                  s * ray[0] + c * ray[1]])
            span = _ray_span(anchor, direction, planes) - 0.5 * floor
            if span >= floor:
                rays.append((direction, span))
        others = np.delete(out, i, axis=0)
        placed = False
        slot = 1
        while not placed and any(slot * floor <= span for _, span in rays):
            for direction, span in rays:
                if slot * floor > span:
                    continue
                cand = anchor + (slot * floor) * direction
                d2 = ((others - cand) ** 2).sum(axis=1)
                if float(d2.min()) >= (0.5 * floor) ** 2:
                    out[i] = cand
                    placed = True
                    break
            slot += 1
        if not placed:
            raise CoincidentAgents(
                nearest, i, f"agents {nearest} and {i} coincide with no free "
                            "space to separate them")
    return out


def _contain(positions, polygon, policy):
    """Apply the containment policy against the given polygon.

    "error" raises for any agent the projection would have moved, i.e.
    anything outside or within the interior margin of the boundary; the
    tessellation could not accept such a position either way. "project"
    additionally re-separates agents that projection merged onto the
    same boundary point, keeping the output a valid tessellation input.
    """
    out = np.array(positions, dtype=float)
    moved = False
    for i in range(out.shape[0]):
        q = (out[i, 0], out[i, 1])
        proj = project_into(polygon, q)
        if proj is q:
            continue
        if policy == "error":
            raise AgentOutsideDomain(i)
        out[i] = proj
        moved = True
    if moved:
        out = _resolve_ties(out, polygon)
    return out


def step_once(positions, k: int, dt: float, script, control: ControlConfig,
              integrator: str = "heun", containment: str = "project",
              singular_fallback: bool = False):
    """Advance one step from t = k dt. Returns (new_positions, eval at k dt)."""
    t = k * dt
    ev = evaluate(positions, t, script, control, singular_fallback)
    t_next = (k + 1) * dt
    next_polygon = script.at(t_next).polygon
    if integrator == "euler":
        new = positions + dt * ev.velocities
    else:
        pred = _contain(positions + dt * ev.velocities, next_polygon, "project")
        ev2 = evaluate(pred, t_next, script, control, singular_fallback)
        new = positions + 0.5 * dt * (ev.velocities + ev2.velocities)
    new = _contain(new, next_polygon, containment)
    return new, ev


@dataclass
class TrajectoryLog:
    times: list = field(default_factory=list)
    positions: list = field(default_factory=list)  # (n, 2) arrays
    domains: list = field(default_factory=list)  # vertex tuples
    e_a: list = field(default_factory=list)
    cost: list = field(default_factory=list)
    hist: list = field(default_factory=list)  # {neighbor count: agents}

    def record(self, t, positions, ev: StepEval):
        self.times.append(t)
        self.positions.append(np.array(positions))
        self.domains.append(ev.polygon_vertices)
        self.e_a.append(ev.e_a)
        self.cost.append(ev.cost)
        self.hist.append(neighbor_histogram(ev.tess))

    @property
    def final_positions(self) -> np.ndarray:
        return self.positions[-1]


def run(cfg: ScenarioConfig) -> TrajectoryLog:
    """Simulate a scenario and return the thinned record.

    Records land every record_every steps plus always at the final time;
    a zero duration yields the single t = 0 record.
    """
    pos = seed_positions(cfg)
    n_steps = int(round(cfg.duration / cfg.dt))
    log = TrajectoryLog()
    for k in range(n_steps):
        new_pos, ev = step_once(
            pos, k, cfg.dt, cfg.domain, cfg.control,
            integrator=cfg.integrator, containment=cfg.containment,
        )
        if k % cfg.record_every == 0:
            log.record(k * cfg.dt, pos, ev)
        pos = new_pos
    ev = evaluate(pos, n_steps * cfg.dt, cfg.domain, cfg.control)
    log.record(n_steps * cfg.dt, pos, ev)
    return log


def steady_state_mean(log: TrajectoryLog, window: float) -> float:
    """Mean aggregated error over the trailing window of the run."""
    t_end = log.times[-1]
    span = t_end - log.times[0]
    if window > span:
        raise WindowTooLong(f"window {window} exceeds the recorded span {span}")
    cut = t_end - window
    vals = [e for t, e in zip(log.times, log.e_a) if t >= cut - 1e-12]
    return float(np.mean(vals))


def write_jsonl(log: TrajectoryLog, path):
    with open(path, "w") as fh:
        for i, t in enumerate(log.times):
            row = {
                "t": t,
                "p": log.positions[i].tolist(),
                "domain": [list(v) for v in log.domains[i]],
                "e_a": log.e_a[i],
                "H": log.cost[i],
                "hist": {str(k): v for k, v in log.hist[i].items()},
            }
            fh.write(json.dumps(row) + "\n")


def read_jsonl(path) -> TrajectoryLog:
    log = TrajectoryLog()
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            log.times.append(row["t"])
            log.positions.append(np.array(row["p"]))
            log.domains.append(tuple(tuple(v) for v in row["domain"]))
            log.e_a.append(row["e_a"])
            log.cost.append(row["H"])
            log.hist.append({int(k): v for k, v in row["hist"].items()})
    return log


def write_metrics_csv(log: TrajectoryLog, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "e_a", "H"])
        for t, e, h in zip(log.times, log.e_a, log.cost):
            writer.writerow([repr(t), repr(e), repr(h)])


def fixed_point_residual(positions, t, script, control: ControlConfig) -> float:
    """Norm of the commanded velocity field; zero at a tracked tessellation."""
    ev = evaluate(positions, t, script, control)
    return float(np.linalg.norm(ev.velocities))


def simulate_to_convergence(cfg: ScenarioConfig, tol: float = 1e-9,
                            max_steps: int = 200000):
    """Run until the aggregated error stalls below tol (or the step cap).

    Utility for seeding near-centroidal configurations in scripts and
    tests; uses the scenario's integrator and a static snapshot of the
    domain at t = 0.
    """
    frozen = StaticScript(cfg.domain.at(0.0).polygon)
    pos = seed_positions(cfg)
    for k in range(max_steps):
        new_pos, ev = step_once(pos, k, cfg.dt, frozen, cfg.control,
                                integrator=cfg.integrator)
        pos = new_pos
        if ev.e_a < tol:
            break
    return pos
