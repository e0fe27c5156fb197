"""Metric-like cost functions and the Monte Carlo periodicity-cost estimate.

The headline quantity is the integral over the whole chart of
``c(x, phi_t(x))`` against the invariant volume: zero exactly when the time-t
map is the identity, strictly positive otherwise.  It is estimated by plain
Monte Carlo, which is dimension-agnostic and returns an honest standard
error; scans over many time vectors reuse one sample set (common random
numbers) so the estimated landscape is a smooth function of t.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import (DEFAULT_INTEGRATOR, IntegratorConfig, SystemDef,
                       as_times, flow_with_status)
from .errors import NumericError, UnknownCostError, ValidationError
from .geometry import DarbouxChart, embed, sample_points, total_volume

COST_NAMES = ("chordal", "chordal-sq")

MAX_FAILED_FRACTION = 1e-3


def ambient_cost(name: str) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Cost on raw ambient vectors: Euclidean distance or its square."""
    if name == "chordal-sq":
        def eval_sq(x, y):
            d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
            return (d * d).sum(axis=-1)
        return eval_sq
    if name == "chordal":
        def eval_dist(x, y):
            d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
            return np.sqrt((d * d).sum(axis=-1))
        return eval_dist
    raise UnknownCostError(f"unknown cost '{name}' (known: {COST_NAMES})")


@dataclass(frozen=True)
class CostFunction:
    """Symmetric nonnegative cost vanishing exactly on the diagonal.

    Evaluated through the chart embedding, so metric-likeness is inherited
    from injectivity of the embedding.
    """

    name: str
    chart: DarbouxChart
    pair_eval: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, x, y):
        return self.pair_eval(x, y)


def make_cost(name: str, chart: DarbouxChart) -> CostFunction:
    """Build "chordal" (ambient distance) or "chordal-sq" (its square)."""
    raw = ambient_cost(name)

    def pair_eval(x, y):
        return raw(embed(chart, x), embed(chart, y))

    return CostFunction(name, chart, pair_eval)


@dataclass(frozen=True)
class CostEstimate:
    """Monte Carlo estimate of a periodicity cost.

    ``std_error`` is the sample standard deviation of the integrand times
    total volume over sqrt(sample count).
    """

    value: float
    std_error: float
    n_samples: int
    t: tuple
    seed: object
    n_failed: int = 0


def _estimate_from_values(values: np.ndarray, volume: float, n_samples: int,
                          t_tuple: tuple, seed, n_failed: int) -> CostEstimate:
    n_used = values.size
    if n_used < 2:
        raise NumericError("too few usable samples for an estimate")
    mean = float(values.mean())
    std = float(values.std(ddof=1))
    return CostEstimate(
        value=mean * volume,
        std_error=std * volume / np.sqrt(n_used),
        n_samples=int(n_samples),
        t=t_tuple,
        seed=seed,
        n_failed=int(n_failed),
    )


def estimate_on_samples(system: SystemDef, t, cost: CostFunction,
                        samples: np.ndarray,
                        cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                        seed=None,
                        region: Optional[Callable[[np.ndarray], np.ndarray]] = None
                        ) -> CostEstimate:
    """Periodicity-cost estimate on a fixed sample set (common random numbers).

    ``region`` optionally restricts the integral to an open subset: integrand
    values outside the region count as zero, so the estimate remains unbiased
    for the restricted integral.
    """
    times = as_times(system, t)
    flowed, status = flow_with_status(system, times, samples, cfg)
    ok = status == 0
    n_failed = int((~ok).sum())
    if n_failed > MAX_FAILED_FRACTION * len(samples):
        raise NumericError(
            f"{n_failed} of {len(samples)} samples failed to integrate "
            f"(> {MAX_FAILED_FRACTION:.1%} budget)")
    values = cost.pair_eval(samples[ok], flowed[ok])
    if region is not None:
        values = np.where(region(samples[ok]), values, 0.0)
    return _estimate_from_values(values, total_volume(system.chart),
                                 len(samples), tuple(times), seed, n_failed)


def periodicity_cost(system: SystemDef, t, cost: CostFunction,
                     n_samples: int = 100_000, seed=42,
                     cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                     region=None) -> CostEstimate:
    """Monte Carlo estimate of the time-t periodicity cost over the chart.

    Draws ``n_samples`` volume-uniform points (singular draws are resampled),
    flows each one for time t and averages the cost between a point and its
    image.  Deterministic for a fixed seed.
    """
    if n_samples < 100:
        raise ValidationError("n_samples must be >= 100")
    samples = sample_points(system.chart, n_samples, seed,
                            reject=system.singular.contains)
    return estimate_on_samples(system, t, cost, samples, cfg, seed=seed,
                               region=region)


def cost_continuity_probe(system: SystemDef, cost: CostFunction, t_path,
                          n_samples: int = 100_000, seed=42,
                          cfg: IntegratorConfig = DEFAULT_INTEGRATOR):
    """Estimates along a path of time vectors, reusing one sample set.

    With common random numbers the returned sequence is a smooth function of
    t up to integrator error, so successive values inherit the continuity of
    the underlying cost landscape.
    """
    t_path = list(t_path)
    if not t_path:
        raise ValidationError("t_path must be nonempty")
    samples = sample_points(system.chart, n_samples, seed,
                            reject=system.singular.contains)
    return [estimate_on_samples(system, t, cost, samples, cfg, seed=seed)
            for t in t_path]


def periodicity_cost_quadrature(system: SystemDef, t, cost: CostFunction,
                                nodes_per_axis: int = 256,
                                cfg: IntegratorConfig = DEFAULT_INTEGRATOR
                                ) -> CostEstimate:
    """Deterministic midpoint-grid cross-check, 2-coordinate charts only.

    Tensor midpoint rule over the coordinate box; spectrally accurate along
    angle coordinates (the rule coincides with the periodic trapezoid rule)
    and second order along interval coordinates.  The returned std_error is
    zero: this is a quadrature, not a sample estimate.
    """
    chart = system.chart
    if chart.half_dim != 1:
        raise ValidationError(
            "midpoint-grid quadrature is limited to 2-coordinate charts")
    if nodes_per_axis < 2:
        raise ValidationError("nodes_per_axis must be >= 2")
    times = as_times(system, t)
    axes = []
    for j in range(chart.dim):
        width = (chart.hi[j] - chart.lo[j]) / nodes_per_axis
        axes.append(chart.lo[j] + (np.arange(nodes_per_axis) + 0.5) * width)
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    flowed, status = flow_with_status(system, times, nodes, cfg)
    if int((status != 0).sum()):
        raise NumericError("quadrature node failed to integrate")
    values = cost.pair_eval(nodes, flowed)
    return CostEstimate(
        value=float(values.mean()) * total_volume(chart),
        std_error=0.0,
        n_samples=int(values.size),
        t=tuple(times),
        seed=None,
    )


def estimate_cost_scale(chart: DarbouxChart, cost: CostFunction, seed,
                        n_pairs: int = 2048) -> float:
    """Mean cost over random point pairs; used for scale-aware thresholds."""
    seed_seq = [seed, 0xC057] if np.isscalar(seed) else list(seed) + [0xC057]
    x = sample_points(chart, n_pairs, seed_seq + [1])
    y = sample_points(chart, n_pairs, seed_seq + [2])
    return float(np.mean(cost.pair_eval(x, y)))
