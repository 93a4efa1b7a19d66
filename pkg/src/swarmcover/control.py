"""Swarm velocity laws built on the centroid derivative blocks.

Two variants share the same desired rate b = kappa (c - p) + dc/dt:

* tvd_c solves the implicit system (I - dc/dp) pdot = b exactly.
* tvd_d1 applies the truncated Neumann expansion of that inverse,
  pdot = sum_{m=0..k} (dc/dp)^m b, blockwise on the sparse neighbor
  structure (order 1 is the (I + dc/dp) b form; order 0 is plain b).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SingularSystem
from .kernels import CellMoments, JacobianBlocks

log = logging.getLogger(__name__)

LAWS = ("tvd_c", "tvd_d1")
CONDITION_WARN = 1e6


@dataclass
class ControlConfig:
    kappa: float = 1.0
    law: str = "tvd_c"
    feedforward: bool = True
    neumann_order: int = 1

    def __post_init__(self):
        if not (self.kappa > 0 and np.isfinite(self.kappa)):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa}")
        if self.law not in LAWS:
            raise ValueError(f"unknown control law {self.law!r}")
        if self.neumann_order < 0:
            raise ValueError("neumann_order must be >= 0")


@dataclass
class Diagnostics:
    residual: float = 0.0
    condition: Optional[float] = None


@dataclass
class ControlOutput:
    velocities: np.ndarray  # (n, 2)
    diagnostics: Diagnostics = field(default_factory=Diagnostics)


def desired_rate(moments: CellMoments, positions, kappa: float,
                 feedforward: Optional[np.ndarray] = None) -> np.ndarray:
    """b = kappa (c - p) plus the domain-motion centroid rate when given."""
    pos = np.asarray(positions, dtype=float)
    b = kappa * (moments.centroid - pos)
    if feedforward is not None:
        b = b + feedforward
    return b


def assemble_system(jac: JacobianBlocks, b: np.ndarray):
    """Dense (I - dc/dp) and stacked right-hand side for the exact law."""
    A = np.eye(2 * jac.n) - jac.to_dense()
    return A, b.reshape(-1)


def tvd_c(jac: JacobianBlocks, b: np.ndarray,
          estimate_condition: bool = False) -> ControlOutput:
    """Exact law: solve (I - dc/dp) pdot = b."""
    A, rhs = assemble_system(jac, b)
    try:
        x = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as err:
        raise SingularSystem(str(err)) from err
    if not np.all(np.isfinite(x)):
        raise SingularSystem("solver produced non-finite velocities")
    residual = float(np.linalg.norm(A @ x - rhs))
    cond = None
    if estimate_condition:
        cond = float(np.linalg.cond(A))
        if cond > CONDITION_WARN:
            log.warning("control system condition estimate %.3e", cond)
    return ControlOutput(x.reshape(-1, 2), Diagnostics(residual, cond))


def tvd_d1(jac: JacobianBlocks, b: np.ndarray, order: int = 1) -> ControlOutput:
    """Truncated Neumann law of the given order, computed blockwise."""
    if order < 0:
        raise ValueError("order must be >= 0")
    acc = b.copy()
    term = b
    for _ in range(order):
        term = jac.apply(term)
        acc = acc + term
    # residual against the implicit system the expansion approximates
    residual = float(np.linalg.norm((acc - jac.apply(acc) - b).ravel()))
    return ControlOutput(acc, Diagnostics(residual, None))
