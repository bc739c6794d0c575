"""Optimal sub-pattern assignment of measured path lengths to virtual anchors."""
from __future__ import annotations

import math

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .geometry import FloorPlan, VisibleSet, expected_visible_set

#: Pairs with ``metric >= dc - REJECT_TOL`` are treated as saturated.
REJECT_TOL = 1e-12


@dataclass
class AssociationProblem:
    measured_Z: Sequence[float]
    expected_D: Sequence[tuple[int, float]]
    cutoff_dc: float

    def __post_init__(self):
        if not self.cutoff_dc > 0:
            raise ValueError("cutoff distance must be positive")


@dataclass
class Correspondences:
    assignments: list[tuple[int, int]] = field(default_factory=list)  # (measurement index, va_id)
    clutter: list[int] = field(default_factory=list)
    total_cost: float = 0.0
    expected: Optional[VisibleSet] = field(default=None, repr=False)

    def va_of(self) -> dict[int, int]:
        return dict(self.assignments)


def cutoff_metric(d, z, dc: float):
    """``min(|d - z|, dc)``; broadcasts over arrays."""
    if not dc > 0:
        raise ValueError("cutoff distance must be positive")
    return np.minimum(np.abs(np.asarray(d) - np.asarray(z)), dc)


def cost_matrix(problem: AssociationProblem) -> np.ndarray:
    """Rows: expected anchors. Columns: measurements, padded with dummy clutter at cost ``dc``."""
    Z = np.asarray(problem.measured_Z, dtype=np.float64)
    D = np.array([d for _, d in problem.expected_D], dtype=np.float64)
    k, k_hat = D.size, Z.size
    cols = max(k, k_hat)
    cost = np.full((k, cols), problem.cutoff_dc, dtype=np.float64)
    if k and k_hat:
        cost[:, :k_hat] = cutoff_metric(D[:, None], Z[None, :], problem.cutoff_dc)
    return cost


def assign(problem: AssociationProblem) -> Correspondences:
    """Minimum total cut-off distance matching of anchors to measurements.

    Matches whose distance saturates at the cut-off are rejected; every
    measurement not accepted is clutter.
    """
    k_hat = len(problem.measured_Z)
    out = Correspondences()
    if len(problem.expected_D) == 0:
        out.clutter = list(range(k_hat))
        return out
    cost = cost_matrix(problem)
    cols = _kernels.linear_assignment(cost)
    dc = problem.cutoff_dc
    used = set()
    terms = []
    for row, col in enumerate(cols):
        c = float(cost[row, col])
        terms.append(c)
        if col < k_hat and c < dc - REJECT_TOL:
            out.assignments.append((int(col), int(problem.expected_D[row][0])))
            used.add(int(col))
    out.total_cost = math.fsum(terms)  # correctly rounded, independent of row order
    out.assignments.sort()
    out.clutter = [i for i in range(k_hat) if i not in used]
    return out


def associate_at(position, vas, plan: FloorPlan, Z: Sequence[float], dc: float,
                 position_index: int = 0) -> Correspondences:
    """Associate ``Z`` with the anchors expected at ``position``.

    ``position`` is the EKF prediction for regular DA or the true position for
    genie-aided DA. The expected set uses the plan without obstructions, since
    the tracker does not know about them; it is kept on ``.expected``.
    """
    vis = expected_visible_set(position, position_index, vas, plan.without_obstructions())
    problem = AssociationProblem(list(Z), list(zip((va.id for va in vis.vas), vis.distances)), dc)
    out = assign(problem)
    out.expected = vis
    return out
