"""Self-contained validation suites behind the `verify` CLI command.

Three suites cross-check the analytic kernels against slower independent
references:

* derivatives: centroid derivative blocks against central finite
  differences (1e-5 absolute) and adaptive quadrature oracles (1e-8
  relative) on randomly sampled generic instances.
* partition: mass conservation (1e-9 relative) and nearest-generator
  ownership of bulk probe points for swarms of 10, 100 and 500.
* convergence: the closed-loop decay rate of the aggregated error equals
  the gain within 10% for kappa 1 and 2.

Each suite returns a SuiteResult whose checks list one (label, ok,
detail) entry per assertion, so the CLI can print one line each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .control import ControlConfig
from .domain import StaticScript
from .engine import run
from .errors import CoverageError
from .geometry import ConvexPolygon
from .kernels import (
    DensityField,
    cell_moments,
    feedforward_vectors,
    jacobian_blocks,
    oracle_dci_dpj,
    oracle_dci_dt,
)
from .scenario import ScenarioConfig
from .tessellation import BOUNDARY, INTERIOR, voronoi_partition

FD_STEP = 1e-6
FD_TOL = 1e-5
ORACLE_RTOL = 1e-8
MASS_RTOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)  # (label, ok, detail)

    def add(self, label: str, ok: bool, detail: str = ""):
        self.checks.append((label, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)


_DOMAINS = (
    ConvexPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)]),
    ConvexPolygon.from_points(
        [(0.1, 0.0), (1.1, 0.2), (1.3, 1.0), (0.5, 1.4), (-0.2, 0.8)]
    ),
    ConvexPolygon.from_points([(0, 0), (1.6, 0.1), (1.4, 0.9), (0.2, 1.1)]),
)


def _sample_generic(rng, domain, n, margin=0.05, min_sep=0.08):
    """Positions well inside the domain and well separated, so finite
    differences do not cross a topology change."""
    arr = domain.as_array()
    lo, hi = arr.min(axis=0), arr.max(axis=0)
    for _ in range(20000):
        pts = lo + rng.random((8 * n, 2)) * (hi - lo)
        keep = []
        for q in pts:
            if not domain.contains(q, tol=-margin):
                continue
            if keep and min(np.hypot(*(q - k)) for k in keep) < min_sep:
                continue
            keep.append(q)
            if len(keep) == n:
                return np.array(keep)
    raise RuntimeError("sampling failed")


def _neighbor_sets(pos, domain):
    tess = voronoi_partition(pos, domain)
    return tess, tuple(tess.neighbors)


def _fd_block(pos, domain, i, j):
    """Central finite difference of centroid i w.r.t. generator j, or None
    when the perturbation changes the adjacency structure."""
    base = voronoi_partition(pos, domain)
    block = np.empty((2, 2))
    for axis in range(2):
        shifted = []
        for sign in (1.0, -1.0):
            p = pos.copy()
            p[j, axis] += sign * FD_STEP
            tess = voronoi_partition(p, domain)
            if tuple(tess.neighbors) != tuple(base.neighbors):
                return None
            shifted.append(cell_moments(tess).centroid[i])
        block[:, axis] = (shifted[0] - shifted[1]) / (2.0 * FD_STEP)
    return block


def _oracle_block(tess, moments, pos, i, j, tol=1e-12):
    """Derivative block (i, j) rebuilt from per-face line quadrature.

    The diagonal reuses the off-diagonal oracle with the reference point
    swapped to p_i and the sign flipped, which is exactly how the faces
    enter the closed form.
    """
    uniform = DensityField.uniform()
    cell = tess.cells[i]
    c_i = moments.centroid[i]
    m_i = moments.mass[i]
    if i == j:
        total = np.zeros((2, 2))
        for f in cell.faces:
            if f.tag.kind == INTERIOR:
                k = f.tag.index
                total -= oracle_dci_dpj(
                    (f.v1, f.v2), pos[k], pos[i], c_i, m_i, uniform, 0.0, tol
                )
        return total
    for f in cell.faces:
        if f.tag.kind == INTERIOR and f.tag.index == j:
            return oracle_dci_dpj(
                (f.v1, f.v2), pos[i], pos[j], c_i, m_i, uniform, 0.0, tol
            )
    raise CoverageError(f"no shared face behind block ({i}, {j})")


def derivatives_suite(trials: int = 50, seed: int = 2024) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = SuiteResult("derivatives")
    max_fd = 0.0
    max_oracle = 0.0
    max_ff_fd = 0.0
    max_ff_oracle = 0.0
    done = 0
    attempts = 0
    while done < trials and attempts < trials * 10:
        attempts += 1
        domain = _DOMAINS[int(rng.integers(len(_DOMAINS)))]
        n = int(rng.integers(3, 9))
        pos = _sample_generic(rng, domain, n)
        tess, nbrs = _neighbor_sets(pos, domain)
        moments = cell_moments(tess)
        jac = jacobian_blocks(tess, moments, pos)

        stable = True
        for (i, j), block in jac.blocks.items():
            fd = _fd_block(pos, domain, i, j)
            if fd is None:
                stable = False
                break
            max_fd = max(max_fd, float(np.max(np.abs(block - fd))))
        if not stable:
            continue  # resample; the instance was not generic enough

        for (i, j), block in jac.blocks.items():
            ora = _oracle_block(tess, moments, pos, i, j)
            scale = max(1.0, float(np.max(np.abs(ora))))
            max_oracle = max(
                max_oracle, float(np.max(np.abs(block - ora))) / scale
            )

        ff_fd, ff_ora = _feedforward_errors(rng, domain, pos)
        max_ff_fd = max(max_ff_fd, ff_fd)
        max_ff_oracle = max(max_ff_oracle, ff_ora)
        done += 1

    res.add(
        f"{done} generic instances sampled",
        done == trials,
        f"{attempts} attempts",
    )
    res.add(
        "centroid/generator blocks vs central differences",
        max_fd <= FD_TOL,
        f"max abs dev {max_fd:.3e} (tol {FD_TOL:.0e})",
    )
    res.add(
        "centroid/generator blocks vs quadrature oracle",
        max_oracle <= ORACLE_RTOL,
        f"max rel dev {max_oracle:.3e} (tol {ORACLE_RTOL:.0e})",
    )
    res.add(
        "boundary-motion centroid rate vs central differences",
        max_ff_fd <= FD_TOL,
        f"max abs dev {max_ff_fd:.3e} (tol {FD_TOL:.0e})",
    )
    res.add(
        "boundary-motion centroid rate vs quadrature oracle",
        max_ff_oracle <= ORACLE_RTOL,
        f"max rel dev {max_ff_oracle:.3e} (tol {ORACLE_RTOL:.0e})",
    )
    return res


def _feedforward_errors(rng, domain, pos):
    """Compare the analytic boundary-motion centroid rate against a
    finite difference of a translating copy of the domain, and against
    the quadrature oracle. Translation keeps every edge's normal speed
    constant along the edge, which is the regime the closed form covers.
    """
    v = rng.uniform(-1.0, 1.0, size=2)
    planes = domain.edge_normals_offsets()
    speeds = tuple(nx * v[0] + ny * v[1] for nx, ny, _ in planes)

    tess = voronoi_partition(pos, domain)
    moments = cell_moments(tess)
    analytic = feedforward_vectors(tess, moments, speeds)

    cents = []
    for sign in (1.0, -1.0):
        shift = sign * FD_STEP * v
        moved = ConvexPolygon.from_points(
            [(x + shift[0], y + shift[1]) for x, y in domain.vertices]
        )
        t2 = voronoi_partition(pos, moved)
        cents.append(cell_moments(t2).centroid)
    fd = (cents[0] - cents[1]) / (2.0 * FD_STEP)
    fd_err = float(np.max(np.abs(analytic - fd)))

    ora_err = 0.0
    for i, cell in enumerate(tess.cells):
        faces = [
            (f.v1, f.v2, speeds[f.tag.index])
            for f in cell.faces
            if f.tag.kind == BOUNDARY
        ]
        ora = oracle_dci_dt(cell.polygon, faces, moments.centroid[i],
                            moments.mass[i], DensityField.uniform(), 0.0)
        scale = max(1.0, float(np.max(np.abs(ora))))
        ora_err = max(
            ora_err, float(np.max(np.abs(analytic[i] - ora))) / scale
        )
    return fd_err, ora_err


def partition_suite(sizes=(10, 100, 500), probes: int = 100000,
                    seed: int = 2024) -> SuiteResult:
    res = SuiteResult("partition")
    domain = ConvexPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])
    area = domain.area
    rng = np.random.default_rng(seed)
    for n in sizes:
        pos = _sample_generic(rng, domain, n, margin=1e-3,
                              min_sep=0.5 / math.sqrt(n))
        tess = voronoi_partition(pos, domain)
        total = float(np.sum(cell_moments(tess).mass))
        rel = abs(total - area) / area
        res.add(
            f"n={n}: cell masses sum to the domain area",
            rel <= MASS_RTOL,
            f"rel dev {rel:.3e} (tol {MASS_RTOL:.0e})",
        )

        pts = rng.random((probes, 2))
        owners = np.empty(probes, dtype=int)
        gap = np.empty(probes)
        for lo in range(0, probes, 20000):
            chunk = pts[lo:lo + 20000]
            d2 = np.sum((chunk[:, None, :] - pos[None, :, :]) ** 2, axis=-1)
            part = np.partition(d2, 1, axis=1)
            owners[lo:lo + len(chunk)] = np.argmin(d2, axis=1)
            gap[lo:lo + len(chunk)] = part[:, 1] - part[:, 0]

        decisive = gap > 1e-9  # skip probes sitting on a bisector
        bad = 0
        for i, cell in enumerate(tess.cells):
            mine = pts[decisive & (owners == i)]
            if not len(mine):
                continue
            arr = cell.polygon.as_array()
            m = len(arr)
            inside = np.ones(len(mine), dtype=bool)
            for k in range(m):
                x1, y1 = arr[k]
                x2, y2 = arr[(k + 1) % m]
                cross = (x2 - x1) * (mine[:, 1] - y1) - (y2 - y1) * (mine[:, 0] - x1)
                inside &= cross >= -1e-9
            bad += int(np.sum(~inside))
        checked = int(np.sum(decisive))
        res.add(
            f"n={n}: {checked} probes land in their nearest generator's cell",
            bad == 0,
            f"{bad} misassigned",
        )
    return res


def _fit_decay_slope(log):
    e0 = log.e_a[0]
    ts = [t for t, e in zip(log.times, log.e_a) if 1e-5 <= e <= e0 / 2]
    es = [math.log(e) for e in log.e_a if 1e-5 <= e <= e0 / 2]
    if len(ts) < 5:
        raise CoverageError("too few samples inside the fit window")
    A = np.vstack([ts, np.ones(len(ts))]).T
    slope, _ = np.linalg.lstsq(A, np.array(es), rcond=None)[0]
    return float(slope)


def convergence_suite(kappas=(1.0, 2.0), seed: int = 3) -> SuiteResult:
    """Closed-loop decay of log e_a fits a line of slope -kappa.

    The seed is fixed to a trajectory that stays clear of near-singular
    (I - dc/dp) systems; see the control module notes.
    """
    res = SuiteResult("convergence")
    domain = StaticScript(
        ConvexPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])
    )
    for kappa in kappas:
        cfg = ScenarioConfig(
            n_agents=10,
            domain=domain,
            control=ControlConfig(kappa=kappa, law="tvd_c"),
            dt=0.005,
            duration=12.0 / kappa,
            rng_seed=seed,
            record_every=4,
            integrator="euler",
        )
        log = run(cfg)
        slope = _fit_decay_slope(log)
        dev = abs(slope + kappa) / kappa
        res.add(
            f"kappa={kappa:g}: log-error slope within 10% of -{kappa:g}",
            dev <= 0.10,
            f"slope {slope:+.4f}, deviation {dev * 100:.2f}%",
        )
    return res


SUITES = {
    "derivatives": derivatives_suite,
    "partition": partition_suite,
    "convergence": convergence_suite,
}


def run_suite(name: str) -> SuiteResult:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; have {sorted(SUITES)}")
    return SUITES[name]()
