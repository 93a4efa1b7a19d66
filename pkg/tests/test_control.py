import numpy as np
import pytest

from swarmcover.control import (
    ControlConfig,
    assemble_system,
    desired_rate,
    tvd_c,
    tvd_d1,
)
from swarmcover.errors import SingularSystem
from swarmcover.kernels import (
    JacobianBlocks,
    cell_moments,
    feedforward_vectors,
    jacobian_blocks,
)
from swarmcover.tessellation import voronoi_partition

from conftest import sample_inside


def _lloyd(domain, positions, steps):
    pos = np.array(positions, dtype=float)
    for _ in range(steps):
        tess = voronoi_partition(pos, domain)
        pos = cell_moments(tess).centroid.copy()
    return pos


def _setup(domain, positions):
    tess = voronoi_partition(positions, domain)
    moments = cell_moments(tess)
    jac = jacobian_blocks(tess, moments, positions)
    return tess, moments, jac


class TestConfig:
    def test_defaults(self):
        cfg = ControlConfig()
        assert cfg.kappa == 1.0
        assert cfg.law == "tvd_c"
        assert cfg.feedforward
        assert cfg.neumann_order == 1

    @pytest.mark.parametrize("kwargs", [
        {"kappa": 0.0},
        {"kappa": -2.0},
        {"kappa": float("nan")},
        {"law": "pid"},
        {"neumann_order": -1},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            ControlConfig(**kwargs)


def test_single_agent_pulls_to_centroid(unit_square):
    pos = np.array([[0.2, 0.2]])
    tess, moments, jac = _setup(unit_square, pos)
    b = desired_rate(moments, pos, kappa=1.0)
    # one agent owns the whole square, so dc/dp has no interior faces and
    # the diagonal block vanishes; both laws return b itself
    for out in (tvd_c(jac, b), tvd_d1(jac, b, order=1)):
        assert np.allclose(out.velocities, [[0.3, 0.3]], atol=1e-12)


def test_single_agent_tracks_moving_wall(unit_square):
    pos = np.array([[0.5, 0.5]])
    tess, moments, jac = _setup(unit_square, pos)
    # right wall (domain edge 1) moving outward at unit speed
    ff = feedforward_vectors(tess, moments, (0.0, 1.0, 0.0, 0.0))
    b = desired_rate(moments, pos, kappa=1.0, feedforward=ff)
    out = tvd_c(jac, b)
    assert np.allclose(out.velocities, [[0.5, 0.0]], atol=1e-12)


def test_order_zero_is_plain_rate(pentagon):
    rng = np.random.default_rng(42)
    pos = sample_inside(pentagon, 8, rng)
    tess, moments, jac = _setup(pentagon, pos)
    b = desired_rate(moments, pos, kappa=1.5)
    out = tvd_d1(jac, b, order=0)
    assert np.array_equal(out.velocities, b)


def test_neumann_orders_approach_exact_solution(unit_square):
    # seed chosen so the converged config has |dc/dp| < 1; some local CVTs
    # of ten agents in a square sit slightly above it
    rng = np.random.default_rng(4)
    pos = _lloyd(unit_square, sample_inside(unit_square, 10, rng), steps=12)
    tess, moments, jac = _setup(unit_square, pos)
    J = jac.to_dense()
    norm = np.linalg.norm(J, 2)
    assert norm < 1.0  # near-centroidal configs keep the expansion valid
    b = desired_rate(moments, pos, kappa=1.0)
    exact = tvd_c(jac, b).velocities
    errs = [
        np.linalg.norm(tvd_d1(jac, b, order=k).velocities - exact)
        for k in range(5)
    ]
    assert errs[4] < errs[0]
    for lo, hi in zip(errs[1:], errs[:-1]):
        assert lo <= hi * (1.0 + 1e-9)


def test_neumann_remainder_bound(unit_square):
    rng = np.random.default_rng(10)
    pos = _lloyd(unit_square, sample_inside(unit_square, 10, rng), steps=12)
    tess, moments, jac = _setup(unit_square, pos)
    J = jac.to_dense()
    norm = np.linalg.norm(J, 2)
    assert norm < 1.0
    b = desired_rate(moments, pos, kappa=1.0)
    exact = tvd_c(jac, b).velocities
    approx = tvd_d1(jac, b, order=1).velocities
    # geometric series tail: |pdot - pdot_1| <= |J|^2 |pdot| / (1 - |J|)
    bound = norm ** 2 * np.linalg.norm(exact) / (1.0 - norm)
    assert np.linalg.norm(approx - exact) <= bound * (1.0 + 1e-9)


def test_exact_law_residual_is_tiny(pentagon):
    rng = np.random.default_rng(11)
    pos = sample_inside(pentagon, 12, rng)
    tess, moments, jac = _setup(pentagon, pos)
    b = desired_rate(moments, pos, kappa=2.0)
    out = tvd_c(jac, b)
    assert out.diagnostics.residual < 1e-10


def test_condition_estimate(unit_square):
    pos = np.array([[0.3, 0.4], [0.7, 0.6]])
    tess, moments, jac = _setup(unit_square, pos)
    b = desired_rate(moments, pos, kappa=1.0)
    out = tvd_c(jac, b, estimate_condition=True)
    assert out.diagnostics.condition is not None
    assert out.diagnostics.condition >= 1.0


def test_assemble_system_shapes(unit_square):
    pos = np.array([[0.25, 0.5], [0.75, 0.5]])
    tess, moments, jac = _setup(unit_square, pos)
    b = desired_rate(moments, pos, kappa=1.0)
    A, rhs = assemble_system(jac, b)
    assert A.shape == (4, 4)
    assert rhs.shape == (4,)


def test_singular_system_raises():
    jac = JacobianBlocks(n=1, blocks={(0, 0): np.eye(2)})
    with pytest.raises(SingularSystem):
        tvd_c(jac, np.array([[1.0, 0.0]]))


def test_negative_order_rejected():
    jac = JacobianBlocks(n=1, blocks={})
    with pytest.raises(ValueError):
        tvd_d1(jac, np.zeros((1, 2)), order=-1)
