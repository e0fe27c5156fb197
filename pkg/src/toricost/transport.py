"""Desk-scale discrete transport: exact brute force and entropic scaling.

Two finite measures of equal total mass are coupled either by a transport
map (a permutation, when both supports have the same size and uniform
weights) or by a transport plan (a nonnegative matrix with prescribed
marginals).  For uniform equal-size marginals the coupling polytope has
permutation vertices, so exhaustive search over permutations solves the
plan problem exactly as well; that brute-force optimum is the oracle every
other solver here is checked against, and the plan sitting on the graph of
a map reproduces the map's cost exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .costs import ambient_cost
from .errors import (SinkhornConvergenceError, UnsupportedMeasureError,
                     ValidationError)
from .ioutil import csv_line, json_dumps

BRUTE_FORCE_MAX = 9
MASS_RTOL = 1e-9
MARGINAL_TOL = 1e-8


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted points in ambient space; weights are positive and finite."""

    points: np.ndarray   # (m, d)
    weights: np.ndarray  # (m,)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if len(pts) != len(w):
            raise ValidationError("points and weights must have equal length")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)):
            raise ValidationError("measure data must be finite")
        if not np.all(w > 0):
            raise ValidationError("weights must be strictly positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())


def uniform_measure(points, total_mass: float = 1.0) -> DiscreteMeasure:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = len(pts)
    return DiscreteMeasure(pts, np.full(m, total_mass / m))


def cost_matrix(mu_minus: DiscreteMeasure, mu_plus: DiscreteMeasure,
                cost_name: str = "chordal-sq") -> np.ndarray:
    """Pairwise costs between the two supports, shape (m, k)."""
    if mu_minus.points.shape[1] != mu_plus.points.shape[1]:
        raise ValidationError(
            "measures live in ambient spaces of different dimension")
    fn = ambient_cost(cost_name)
    x = mu_minus.points[:, None, :]
    y = mu_plus.points[None, :, :]
    return np.ascontiguousarray(fn(x, y))


@dataclass(frozen=True)
class TransportMap:
    """Source-to-target assignment pushing the first measure onto the second."""

    assignment: np.ndarray
    cost: float


@dataclass(frozen=True)
class TransportPlan:
    """Coupling matrix with both marginal defects within tolerance."""

    matrix: np.ndarray
    cost: float
    marginal_defect: float
    n_iter: int = 0


def plan_cost(plan_matrix: np.ndarray, costs: np.ndarray) -> float:
    return float((plan_matrix * costs).sum())


def _check_same_mass(mu_minus: DiscreteMeasure, mu_plus: DiscreteMeasure):
    a, b = mu_minus.total_mass, mu_plus.total_mass
    if abs(a - b) > MASS_RTOL * max(a, b):
        raise UnsupportedMeasureError(
            f"total masses differ: {a!r} vs {b!r}")


def _check_bruteforce_instance(mu_minus: DiscreteMeasure,
                               mu_plus: DiscreteMeasure):
    _check_same_mass(mu_minus, mu_plus)
    if mu_minus.size != mu_plus.size:
        raise UnsupportedMeasureError(
            "transport maps need equal support sizes; splitting the mass of "
            "one point over several targets requires a plan, not a map")
    for mu in (mu_minus, mu_plus):
        w = mu.weights
        if np.abs(w - w.mean()).max() > 1e-12 * w.mean():
            raise UnsupportedMeasureError(
                "exact search is restricted to uniform weights, where maps "
                "are exactly the permutations")
    if mu_minus.size > BRUTE_FORCE_MAX:
        raise UnsupportedMeasureError(
            f"brute force is capped at {BRUTE_FORCE_MAX} support points")


def solve_monge_bruteforce(mu_minus: DiscreteMeasure, mu_plus: DiscreteMeasure,
                           costs: np.ndarray) -> TransportMap:
    """Exhaustive minimum over all permutation maps (uniform, m = k <= 9)."""
    _check_bruteforce_instance(mu_minus, mu_plus)
    c = np.asarray(costs, dtype=float)
    if c.shape != (mu_minus.size, mu_plus.size):
        raise ValidationError("cost matrix shape does not match the supports")
    best_sum, perm = kernels.monge_bruteforce(c)
    w = float(mu_minus.weights[0])
    return TransportMap(assignment=np.asarray(perm, dtype=np.int64),
                        cost=w * float(best_sum))


def graph_plan(mu_minus: DiscreteMeasure, assignment: np.ndarray,
               k: int) -> np.ndarray:
    """Plan supported on the graph of a map: entry (i, f(i)) = weight_i."""
    m = mu_minus.size
    plan = np.zeros((m, k))
    plan[np.arange(m), np.asarray(assignment, dtype=int)] = mu_minus.weights
    return plan


def solve_kantorovich_sinkhorn(mu_minus: DiscreteMeasure,
                               mu_plus: DiscreteMeasure, costs: np.ndarray,
                               epsilon: float, max_iter: int = 20_000,
                               tol: float = 1e-9) -> TransportPlan:
    """Entropic-regularized coupling by alternating marginal scaling.

    Iterates on the Gibbs kernel exp(-C/epsilon); switches to log-domain
    arithmetic when epsilon is below 5% of the largest cost entry to avoid
    kernel underflow.  Raises when the marginal defect stays above tol.
    """
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    _check_same_mass(mu_minus, mu_plus)
    c = np.ascontiguousarray(costs, dtype=float)
    if c.shape != (mu_minus.size, mu_plus.size):
        raise ValidationError("cost matrix shape does not match the supports")
    a = np.ascontiguousarray(mu_minus.weights, dtype=float)
    b = np.ascontiguousarray(mu_plus.weights, dtype=float)
    if epsilon < 0.05 * c.max():
        plan, n_iter, defect = kernels.sinkhorn_log(c, a, b, float(epsilon),
                                                    tol, max_iter)
    else:
        gibbs = np.exp(-c / epsilon)
        plan, n_iter, defect = kernels.sinkhorn_scaling(gibbs, a, b, tol,
                                                        max_iter)
    if not np.isfinite(defect) or defect >= tol:
        raise SinkhornConvergenceError(
            f"scaling stalled after {n_iter} iterations "
            f"(marginal defect {defect:.3e} >= tol {tol:.3e})", defect=defect)
    return TransportPlan(matrix=plan, cost=plan_cost(plan, c),
                         marginal_defect=float(defect), n_iter=int(n_iter))


def verify_monge_kantorovich_bound(mu_minus: DiscreteMeasure,
                                   mu_plus: DiscreteMeasure,
                                   costs: np.ndarray,
                                   epsilon: float = 0.1) -> dict:
    """Check that the plan optimum lower-bounds the map optimum.

    For uniform equal-size marginals the two optima coincide (permutation
    vertices), so the exact plan value comes from the same brute force.  The
    report also carries the graph-plan identity (the plan on the optimal
    map's graph reproduces the map cost exactly) and the entropic cost at
    the given epsilon, which upper-bounds the optimum.
    """
    c = np.asarray(costs, dtype=float)
    monge = solve_monge_bruteforce(mu_minus, mu_plus, c)
    kantorovich_cost = monge.cost  # exact: uniform-marginal LP optimum
    graph = graph_plan(mu_minus, monge.assignment, mu_plus.size)
    graph_cost = plan_cost(graph, c)
    sinkhorn_cost = None
    sinkhorn_defect = None
    if epsilon is not None:
        try:
            plan = solve_kantorovich_sinkhorn(mu_minus, mu_plus, c, epsilon)
            sinkhorn_cost = plan.cost
            sinkhorn_defect = plan.marginal_defect
        except SinkhornConvergenceError as exc:
            sinkhorn_defect = exc.defect
    return {
        "monge_cost": monge.cost,
        "kantorovich_cost": kantorovich_cost,
        "holds": bool(monge.cost >= kantorovich_cost - 1e-9),
        "graph_plan_cost": graph_cost,
        "assignment": [int(i) for i in monge.assignment],
        "sinkhorn_cost": sinkhorn_cost,
        "sinkhorn_marginal_defect": sinkhorn_defect,
        "epsilon": float(epsilon) if epsilon is not None else None,
    }


def sampled_flow_coupling(system, t, cost, n_samples: int = 256, seed=42,
                          cfg=None) -> dict:
    """Discretize the flow coupling: samples vs their time-t images.

    Builds uniform measures on the embedded samples and their flowed images,
    the pairwise ambient cost matrix, and reports the graph-plan cost of the
    flow coupling next to the Monte Carlo periodicity-cost estimate computed
    from the same seed (they agree up to the volume normalization).  Keep
    ``n_samples`` modest: the cost matrix is dense.
    """
    from .costs import estimate_on_samples
    from .dynamics import DEFAULT_INTEGRATOR, flow
    from .geometry import embed, sample_points, total_volume

    cfg = cfg or DEFAULT_INTEGRATOR
    samples = sample_points(system.chart, n_samples, seed,
                            reject=system.singular.contains)
    flowed = flow(system, t, samples, cfg)
    mu_minus = uniform_measure(embed(system.chart, samples))
    mu_plus = uniform_measure(embed(system.chart, flowed))
    c = cost_matrix(mu_minus, mu_plus, cost.name)
    graph_value = plan_cost(graph_plan(mu_minus, np.arange(n_samples),
                                       n_samples), c)
    estimate = estimate_on_samples(system, t, cost, samples, cfg, seed=seed)
    volume = total_volume(system.chart)
    return {
        "mu_minus": mu_minus,
        "mu_plus": mu_plus,
        "cost_matrix": c,
        "graph_plan_cost": float(graph_value),
        "estimate": estimate,
        "scaled_graph_cost": float(graph_value * volume),
    }


# --- serialization -------------------------------------------------------

def measure_to_json(measure: DiscreteMeasure) -> str:
    return json_dumps({
        "points": [[float(v) for v in row] for row in measure.points],
        "weights": [float(w) for w in measure.weights],
    }) + "\n"


def measure_from_json(text: str) -> DiscreteMeasure:
    try:
        payload = json.loads(text)
        return DiscreteMeasure(np.asarray(payload["points"], dtype=float),
                               np.asarray(payload["weights"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed measure JSON: {exc}") from exc


def plan_csv_text(plan_matrix: np.ndarray) -> str:
    lines = [csv_line(row) for row in np.atleast_2d(plan_matrix)]
    return "\n".join(lines) + "\n"
