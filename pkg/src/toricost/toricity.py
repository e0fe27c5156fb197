"""Zero-set scans of the periodicity-cost landscape and the toric verdict.

A system whose composed flow is periodic with per-axis period vector T has
vanishing cost exactly on the lattice {(k_1 T_1, ..., k_n T_n)} and positive
cost everywhere else.  A finite scan cannot certify a quantifier over all of
R^n, so the positive verdict is named ToricEvidence: a zero-cost lattice was
found on the scanned window with positive costs everywhere off it.

Thresholds are scale- and noise-aware.  A grid value counts as zero when it
is below max(zero_threshold, 5 * its standard error), where zero_threshold =
1e-6 * volume * cost_scale and cost_scale is the mean cost over random point
pairs; positivity requires clearing ten times that threshold plus the same
5-sigma separation (the factor-10 hysteresis gap prevents verdict flapping).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .costs import (CostEstimate, CostFunction, estimate_cost_scale,
                    estimate_on_samples)
from .dynamics import DEFAULT_INTEGRATOR, IntegratorConfig, SystemDef
from .errors import ValidationError
from .geometry import sample_points, total_volume
from .ioutil import csv_line, json_dumps

TWO_PI = 2.0 * np.pi

TORIC_EVIDENCE = "ToricEvidence"
NOT_TORIC = "NotToric"
INCONCLUSIVE = "Inconclusive"

_LATTICE_SNAP = 1e-9


@dataclass(frozen=True)
class ScanGrid:
    """Per-axis uniform grids over the time-parameter window.

    Axis values are snapped onto exact multiples of 2*pi whenever the uniform
    spacing lands within 1e-9 of one, so the expected lattice points are hit
    exactly on default windows.
    """

    mins: tuple
    maxs: tuple
    steps: tuple

    def __post_init__(self):
        mins = tuple(float(v) for v in np.atleast_1d(self.mins))
        maxs = tuple(float(v) for v in np.atleast_1d(self.maxs))
        steps = tuple(int(v) for v in np.atleast_1d(self.steps))
        if not (len(mins) == len(maxs) == len(steps)) or not mins:
            raise ValidationError("grid axes must have matching nonzero lengths")
        for lo, hi, k in zip(mins, maxs, steps):
            if not lo < hi:
                raise ValidationError("grid needs t_min < t_max on every axis")
            if k < 2:
                raise ValidationError("grid needs at least 2 steps per axis")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        object.__setattr__(self, "steps", steps)

    @classmethod
    def default(cls, ndim: int) -> "ScanGrid":
        if ndim > 2:
            raise ValidationError(
                "full grids are limited to n <= 2; supply probe lines instead")
        return cls(mins=(0.0,) * ndim, maxs=(2.0 * TWO_PI,) * ndim,
                   steps=(129,) * ndim)

    @property
    def ndim(self) -> int:
        return len(self.mins)

    def axis_values(self, axis: int) -> np.ndarray:
        vals = np.linspace(self.mins[axis], self.maxs[axis], self.steps[axis])
        k_lo = int(np.ceil(self.mins[axis] / TWO_PI))
        k_hi = int(np.floor(self.maxs[axis] / TWO_PI))
        for k in range(k_lo, k_hi + 1):
            target = TWO_PI * k
            idx = int(np.argmin(np.abs(vals - target)))
            if abs(vals[idx] - target) < _LATTICE_SNAP:
                vals[idx] = target
        return vals

    def points(self) -> np.ndarray:
        """All grid points, lexicographic in (t_1, ..., t_n), shape (P, n)."""
        axes = [self.axis_values(i) for i in range(self.ndim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def is_lattice_point(t: np.ndarray, tol: float = 1e-9) -> bool:
    """True when every entry is within tol of a multiple of 2*pi."""
    t = np.asarray(t, dtype=float)
    return bool(np.all(np.abs(t - TWO_PI * np.round(t / TWO_PI)) <= tol))


@dataclass
class ScanResult:
    grid: ScanGrid
    points: np.ndarray          # (P, n) grid points, lexicographic
    values: np.ndarray          # (P,) cost estimates
    std_errors: np.ndarray      # (P,)
    zeros: list                 # grid points flagged numerically zero
    verdict: str
    zero_threshold: float
    positivity_margin: float
    cost_scale: float
    lattice_point: np.ndarray   # the diagonal point (2*pi, ..., 2*pi)
    lattice_value: float
    lattice_std_error: float
    n_samples: int
    seed: object
    system: str
    cost: str

    @property
    def estimates(self) -> list:
        return [CostEstimate(float(v), float(s), self.n_samples,
                             tuple(p), self.seed)
                for p, v, s in zip(self.points, self.values, self.std_errors)]


def _is_zero(value: float, std_error: float, base_threshold: float) -> bool:
    return value < max(base_threshold, 5.0 * std_error)


def _is_positive(value: float, std_error: float, margin: float) -> bool:
    return value > max(margin, 5.0 * std_error)


def scan(system: SystemDef, cost: CostFunction,
         grid: Optional[ScanGrid] = None, n_samples: int = 100_000,
         seed=42, cfg: IntegratorConfig = DEFAULT_INTEGRATOR) -> ScanResult:
    """Evaluate the cost landscape on a grid and issue the strict verdict.

    All grid points share one sample set.  The diagonal point
    (2*pi, ..., 2*pi) is evaluated even when the window misses it, since the
    strict verdict is anchored there: ToricEvidence needs that value to be
    numerically zero and every off-lattice grid value to clear the
    positivity margin; NotToric needs it positive by at least five standard
    errors.  Anything in between is Inconclusive.
    """
    if grid is None:
        grid = ScanGrid.default(system.n)
    if grid.ndim != system.n:
        raise ValidationError(
            f"grid has {grid.ndim} axes but system '{system.name}' has n={system.n}")
    samples = sample_points(system.chart, n_samples, seed,
                            reject=system.singular.contains)
    pts = grid.points()
    values = np.empty(len(pts))
    errors = np.empty(len(pts))
    for i, t in enumerate(pts):
        est = estimate_on_samples(system, t, cost, samples, cfg, seed=seed)
        values[i] = est.value
        errors[i] = est.std_error

    cost_scale = estimate_cost_scale(system.chart, cost, seed)
    base = 1e-6 * total_volume(system.chart) * cost_scale
    margin = 10.0 * base

    diag = np.full(system.n, TWO_PI)
    on_grid = np.flatnonzero(np.all(pts == diag, axis=1))
    if on_grid.size:
        lat_value = float(values[on_grid[0]])
        lat_err = float(errors[on_grid[0]])
    else:
        est = estimate_on_samples(system, diag, cost, samples, cfg, seed=seed)
        lat_value, lat_err = est.value, est.std_error

    zero_flags = np.array([_is_zero(v, s, base)
                           for v, s in zip(values, errors)])
    lattice_flags = np.array([is_lattice_point(t) for t in pts])
    zeros = [pts[i].copy() for i in np.flatnonzero(zero_flags)]

    lattice_zero = _is_zero(lat_value, lat_err, base)
    off_lattice = ~lattice_flags
    all_off_positive = all(
        _is_positive(values[i], errors[i], margin)
        for i in np.flatnonzero(off_lattice))

    if lattice_zero and all_off_positive:
        verdict = TORIC_EVIDENCE
    elif not lattice_zero and lat_value > 5.0 * lat_err and lat_value > margin:
        verdict = NOT_TORIC
    else:
        verdict = INCONCLUSIVE

    return ScanResult(
        grid=grid, points=pts, values=values, std_errors=errors, zeros=zeros,
        verdict=verdict, zero_threshold=base, positivity_margin=margin,
        cost_scale=cost_scale, lattice_point=diag, lattice_value=lat_value,
        lattice_std_error=lat_err, n_samples=int(n_samples), seed=seed,
        system=system.name, cost=cost.name)


def _golden_min(fn, lo: float, hi: float, xtol: float):
    """Golden-section minimum of a scalar function on [lo, hi]."""
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return (a + b) / 2.0


def refine_zero(system: SystemDef, cost: CostFunction, t_candidate,
                radius: float, n_samples: int = 100_000, seed=42,
                cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                xtol: float = 1e-4):
    """Localize a flagged zero by minimizing over a radius ball.

    Golden-section search per axis (coordinate descent for n = 2) on the
    common-random-numbers estimate, which is a smooth function of t.
    Returns ``(t_refined, estimate)``; the input is returned unchanged when
    no improvement is found.
    """
    t0 = np.atleast_1d(np.asarray(t_candidate, dtype=float))
    if t0.shape != (system.n,):
        raise ValidationError("t_candidate must have one entry per component")
    samples = sample_points(system.chart, n_samples, seed,
                            reject=system.singular.contains)

    def value_at(t):
        return estimate_on_samples(system, t, cost, samples, cfg, seed=seed).value

    best = t0.copy()
    sweeps = 1 if system.n == 1 else 3
    for _ in range(sweeps):
        for axis in range(system.n):
            def along(x, axis=axis):
                trial = best.copy()
                trial[axis] = x
                return value_at(trial)

            best[axis] = _golden_min(along, best[axis] - radius,
                                     best[axis] + radius, xtol)
    if value_at(best) >= value_at(t0):
        best = t0.copy()
    est = estimate_on_samples(system, best, cost, samples, cfg, seed=seed)
    return best, est


@dataclass
class ClassifyReport:
    verdict: str
    period: Optional[tuple]
    zeros: list                # refined nontrivial zeros
    scan: ScanResult
    notes: str = ""


def _cluster_values(values, tol: float):
    reps: list[float] = []
    for v in sorted(values):
        if not reps or v - reps[-1] > tol:
            reps.append(v)
    return reps


def classify(system: SystemDef, cost: CostFunction,
             grid: Optional[ScanGrid] = None, n_samples: int = 100_000,
             seed=42, cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
             xtol: float = 1e-4) -> ClassifyReport:
    """Scan, refine the flagged zeros, and report the general-period verdict.

    Unlike :func:`scan`, which anchors its verdict at (2*pi, ..., 2*pi), this
    accepts any per-axis period vector T: refined zeros must fill out the
    lattice {(k_1 T_1, ..., k_n T_n)} inside the window while every grid
    point off that lattice stays positive.  The reported period is the
    smallest positive generator found per axis at the refinement resolution.
    """
    result = scan(system, cost, grid, n_samples, seed, cfg)
    grid = result.grid
    spacing = np.array([(grid.maxs[i] - grid.mins[i]) / (grid.steps[i] - 1)
                        for i in range(grid.ndim)])
    radius = float(spacing.max())
    base = result.zero_threshold

    refined = []
    for z in result.zeros:
        t_ref, est = refine_zero(system, cost, z, radius, n_samples, seed,
                                 cfg, xtol)
        if _is_zero(est.value, est.std_error, base):
            refined.append(np.where(np.abs(t_ref) < 10 * xtol, 0.0, t_ref))
    # dedupe refinements that collapsed onto the same lattice site
    unique: list[np.ndarray] = []
    for z in refined:
        if not any(np.all(np.abs(z - u) < 100 * xtol) for u in unique):
            unique.append(z)
    nontrivial = [z for z in unique if np.any(np.abs(z) > 10 * xtol)]

    lattice_sound = (result.lattice_value
                     > 5.0 * result.lattice_std_error)

    if not nontrivial:
        all_positive = all(
            _is_positive(v, s, result.positivity_margin)
            for t, v, s in zip(result.points, result.values, result.std_errors)
            if np.any(np.abs(t) > 10 * xtol))
        if lattice_sound and all_positive:
            return ClassifyReport(NOT_TORIC, None, [], result,
                                  "no nontrivial zero on the window")
        return ClassifyReport(INCONCLUSIVE, None, [], result,
                              "no zeros, but positivity not resolved")

    # per-axis generators: smallest positive coordinate among the zeros
    period = np.empty(grid.ndim)
    for axis in range(grid.ndim):
        vals = _cluster_values(
            [z[axis] for z in unique + [np.zeros(grid.ndim)]], 100 * xtol)
        positive = [v for v in vals if v > 10 * xtol]
        if not positive:
            return ClassifyReport(
                INCONCLUSIVE, None, nontrivial, result,
                f"axis {axis + 1} shows no positive zero coordinate")
        period[axis] = positive[0]

    match_tol = np.maximum(spacing / 2.0, 100 * xtol)

    def on_period_lattice(t):
        k = np.round(t / period)
        return np.all(np.abs(t - k * period) <= match_tol)

    if not all(on_period_lattice(z) for z in unique):
        return ClassifyReport(INCONCLUSIVE, None, nontrivial, result,
                              "zeros do not sit on a per-axis lattice")

    # every lattice point inside the window must have been flagged zero
    for axis_multiples in np.ndindex(
            *[int(np.floor(grid.maxs[i] / period[i])) + 1
              for i in range(grid.ndim)]):
        target = np.array(axis_multiples) * period
        if np.any(target < np.array(grid.mins) - 1e-12):
            continue
        if not any(np.all(np.abs(target - z) <= match_tol)
                   for z in unique + [np.zeros(grid.ndim)]):
            return ClassifyReport(
                INCONCLUSIVE, None, nontrivial, result,
                "expected lattice point missing from the detected zeros")

    def off_lattice_positive():
        for t, v, s in zip(result.points, result.values, result.std_errors):
            k = np.round(t / period)
            if np.all(np.abs(t - k * period) <= match_tol):
                continue
            if not _is_positive(v, s, result.positivity_margin):
                return False
        return True

    if not off_lattice_positive():
        return ClassifyReport(INCONCLUSIVE, None, nontrivial, result,
                              "off-lattice positivity not resolved")
    return ClassifyReport(TORIC_EVIDENCE, tuple(float(p) for p in period),
                          nontrivial, result,
                          "zero lattice with positive costs elsewhere")


# --- serialization -------------------------------------------------------

def scan_csv_text(result: ScanResult) -> str:
    """CSV with header t_1,...,t_n,value,std_error; one row per grid point."""
    n = result.grid.ndim
    header = ",".join([f"t_{i + 1}" for i in range(n)] + ["value", "std_error"])
    lines = [header]
    for t, v, s in zip(result.points, result.values, result.std_errors):
        lines.append(csv_line(list(t) + [v, s]))
    return "\n".join(lines) + "\n"


def scan_sidecar_json(result: ScanResult) -> str:
    payload = {
        "system": result.system,
        "cost": result.cost,
        "verdict": result.verdict,
        "zero_threshold": result.zero_threshold,
        "positivity_margin": result.positivity_margin,
        "cost_scale": result.cost_scale,
        "lattice_point": [float(v) for v in result.lattice_point],
        "lattice_value": result.lattice_value,
        "lattice_std_error": result.lattice_std_error,
        "zeros": [[float(v) for v in z] for z in result.zeros],
        "n_samples": result.n_samples,
        "seed": result.seed,
        "grid": {
            "mins": list(result.grid.mins),
            "maxs": list(result.grid.maxs),
            "steps": list(result.grid.steps),
        },
    }
    return json_dumps(payload) + "\n"
