"""Vector fields, brackets and flows of commuting Hamiltonian families.

Sign convention: in a Darboux pair (q, p) the vector field of a function h
is (dq/dt, dp/dt) = (-dh/dp, +dh/dq), so on the sphere chart with h equal to
the height coordinate the flow is the rotation theta -> theta - t.

Components carry vectorized ``value``/``gradient`` callables operating on
(..., 2n) coordinate arrays.  Analytic flows override numeric integration
when present; otherwise the flow is computed by the implicit midpoint rule
(symplectic, second order) with a fixed step and an exactly shortened final
partial step.  Components whose Hamiltonian matches one of the encoded
kernel families additionally run on the compiled backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import (NewtonDivergenceError, SingularPointError,
                     ValidationError)
from .geometry import (TWO_PI, DarbouxChart, SingularSetSpec,
                       EMPTY_SINGULAR_SET, embed, reduce_angles,
                       sample_points)

KERNEL_QUAD_HEIGHT = 1   # h = a*p + b*p^2
KERNEL_COS_ANGLE = 2     # h = a*cos(q)
KERNEL_SPHERE_X = 3      # h = a*sqrt(1-p^2)*cos(q)
KERNEL_CROSS_TRIG = 4    # h = a*cos(q) + b*sin(p)


@dataclass(frozen=True)
class KernelSpec:
    """Encoding of a Hamiltonian for the compiled integrator backend."""
    code: int
    pair: int
    a: float
    b: float


@dataclass(frozen=True)
class HamiltonianComponent:
    """One component of a momentum map.

    ``value`` maps (..., 2n) coordinates to (...,) function values and
    ``gradient`` to (..., 2n) coordinate partials.  ``analytic_flow``, when
    present, maps (t, points) to flowed points and takes precedence over the
    numeric integrator.  ``kernel`` is an optional fast-path encoding.
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    analytic_flow: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    kernel: Optional[KernelSpec] = None


@dataclass(frozen=True)
class SystemDef:
    """A commuting family of Hamiltonians on a box chart."""

    name: str
    chart: DarbouxChart
    components: tuple
    singular: SingularSetSpec = EMPTY_SINGULAR_SET

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != self.chart.half_dim:
            raise ValidationError(
                f"system '{self.name}' needs {self.chart.half_dim} components, "
                f"got {len(self.components)}")

    @property
    def n(self) -> int:
        return self.chart.half_dim


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step implicit midpoint settings."""

    step_size: float = 1e-3
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        if not 0.0 < self.step_size <= 0.1:
            raise ValidationError("step_size must lie in (0, 0.1]")
        if not 0.0 < self.newton_tol < self.step_size ** 2:
            raise ValidationError("newton_tol must be positive and below step_size^2")
        if self.newton_max_iter < 1:
            raise ValidationError("newton_max_iter must be >= 1")


DEFAULT_INTEGRATOR = IntegratorConfig()


def as_times(system: SystemDef, t) -> np.ndarray:
    """Normalize a flow-time argument to an (n,) float array (radians)."""
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if arr.shape != (system.n,):
        raise ValidationError(
            f"system '{system.name}' expects {system.n} flow times, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("flow times must be finite")
    return arr


def _check_regular(system: SystemDef, points: np.ndarray) -> None:
    if np.any(system.singular.contains(np.atleast_2d(points))):
        raise SingularPointError(
            f"point on the singular locus of system '{system.name}'")


def field_from_gradient(grad: np.ndarray) -> np.ndarray:
    """Turn coordinate partials into the Hamiltonian vector field.

    Per pair: (dq/dt, dp/dt) = (-g_p, +g_q)."""
    out = np.empty_like(grad)
    out[..., 0::2] = -grad[..., 1::2]
    out[..., 1::2] = grad[..., 0::2]
    return out


def hamiltonian_vector_field(system: SystemDef, k: int, points: np.ndarray) -> np.ndarray:
    """Vector field of component k at one point or a batch of points."""
    _check_regular(system, points)
    grad = system.components[k].gradient(np.asarray(points, dtype=float))
    return field_from_gradient(grad)


def poisson_bracket(system: SystemDef, i: int, j: int, points: np.ndarray):
    """Bracket of components i and j, evaluated pointwise.

    Computed as sum over pairs of g_i,q * g_j,p - g_i,p * g_j,q, which makes
    antisymmetry exact in floating point (the same products appear with the
    subtraction reversed).
    """
    _check_regular(system, points)
    pts = np.asarray(points, dtype=float)
    gi = system.components[i].gradient(pts)
    gj = system.components[j].gradient(pts)
    terms = gi[..., 0::2] * gj[..., 1::2] - gi[..., 1::2] * gj[..., 0::2]
    return terms.sum(axis=-1)


def _numeric_flow_with_status(system: SystemDef, k: int, t: float,
                              points: np.ndarray, cfg: IntegratorConfig):
    comp = system.components[k]
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    spec = comp.kernel
    if spec is not None and kernels.use_numba():
        impl = kernels.numba_impl()
        out = pts.copy()
        status = impl.midpoint_flow_encoded(
            spec.code, spec.pair, spec.a, spec.b, float(t),
            cfg.step_size, cfg.newton_tol, cfg.newton_max_iter, out,
            bool(system.chart.is_angle[2 * spec.pair]),
            bool(system.chart.is_angle[2 * spec.pair + 1]))
        return out, np.asarray(status)

    def field_fn(y):
        return field_from_gradient(comp.gradient(y))

    impl = kernels.numpy_impl()
    out, status = impl.midpoint_flow(
        field_fn, float(t), cfg.step_size, cfg.newton_tol,
        cfg.newton_max_iter, pts, system.chart.is_angle)
    return out, status


def flow_component_with_status(system: SystemDef, k: int, t: float,
                               points: np.ndarray,
                               cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                               force_numeric: bool = False):
    """Time-t map of component k on a batch; returns (points, status).

    status is an int32 array, zero where the point flowed cleanly.  Callers
    that cannot tolerate failures should use :func:`flow_component`.
    """
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    t = float(t)
    if t == 0.0:
        return pts.copy(), np.zeros(len(pts), dtype=np.int32)
    comp = system.components[k]
    if comp.analytic_flow is not None and not force_numeric:
        out = reduce_angles(system.chart, comp.analytic_flow(t, pts))
        return out, np.zeros(len(pts), dtype=np.int32)
    return _numeric_flow_with_status(system, k, t, pts, cfg)


def flow_component(system: SystemDef, k: int, t: float, points: np.ndarray,
                   cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                   force_numeric: bool = False) -> np.ndarray:
    """Time-t map of component k.  Raises on singular input or Newton failure."""
    _check_regular(system, points)
    single = np.asarray(points).ndim == 1
    out, status = flow_component_with_status(system, k, t, points, cfg,
                                             force_numeric)
    n_failed = int((status != 0).sum())
    if n_failed:
        raise NewtonDivergenceError(
            f"implicit solve failed for {n_failed} point(s) in component "
            f"{k} of '{system.name}'", n_failed=n_failed)
    return out[0] if single else out


def flow_with_status(system: SystemDef, t, points: np.ndarray,
                     cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                     force_numeric: bool = False):
    """Composed flow, components applied in index order; returns (points, status)."""
    times = as_times(system, t)
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    status = np.zeros(len(pts), dtype=np.int32)
    for k in range(system.n):
        pts, st = flow_component_with_status(system, k, times[k], pts, cfg,
                                             force_numeric)
        status |= st
    return pts, status


def flow(system: SystemDef, t, points: np.ndarray,
         cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
         force_numeric: bool = False) -> np.ndarray:
    """Composed time-t map phi_t = phi_{t_1} o ... o phi_{t_n}."""
    _check_regular(system, points)
    single = np.asarray(points).ndim == 1
    out, status = flow_with_status(system, t, points, cfg, force_numeric)
    n_failed = int((status != 0).sum())
    if n_failed:
        raise NewtonDivergenceError(
            f"implicit solve failed for {n_failed} point(s) in '{system.name}'",
            n_failed=n_failed)
    return out[0] if single else out


def check_flow_commutativity(system: SystemDef, trials: int, seed,
                             cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                             t_scale: float = 1.0,
                             force_numeric: bool = False) -> float:
    """Max ambient distance between the two composition orders.

    Draws ``trials`` random (point, times, permutation) triples and compares
    the flow applied in index order against a random permutation of the
    component order.  Exact for commuting analytic flows; bounded by the
    integrator error otherwise.
    """
    if system.n < 2:
        raise ValidationError("flow commutativity needs n >= 2 components")
    pts = sample_points(system.chart, trials, seed,
                        reject=system.singular.contains)
    rng = np.random.default_rng([seed, 0x0C0]) if np.isscalar(seed) \
        else np.random.default_rng(seed)
    worst = 0.0
    for i in range(trials):
        times = rng.uniform(0.0, t_scale, size=system.n)
        perm = rng.permutation(system.n)
        p = pts[i:i + 1]
        a = p
        for k in range(system.n):
            a = flow_component(system, k, times[k], a, cfg, force_numeric)
        b = p
        for k in perm:
            b = flow_component(system, int(k), times[int(k)], b, cfg,
                               force_numeric)
        dist = float(np.linalg.norm(embed(system.chart, a) - embed(system.chart, b)))
        worst = max(worst, dist)
    return worst


def _wrapped_difference(chart: DarbouxChart, a: np.ndarray, b: np.ndarray):
    d = a - b
    mask = chart.is_angle
    d[..., mask] = np.mod(d[..., mask] + np.pi, TWO_PI) - np.pi
    return d


def check_volume_preservation(system: SystemDef, t, trials: int, seed,
                              cfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                              fd_step: float = 1e-5,
                              force_numeric: bool = False) -> float:
    """Worst |det(d phi_t) - 1| over random points, by central differences.

    The flow is symplectic, so the exact determinant is 1; the returned
    defect mixes integrator and finite-difference error.
    """
    times = as_times(system, t)
    pts = sample_points(system.chart, trials, seed,
                        reject=system.singular.contains)
    dim = system.chart.dim
    stack = []
    for j in range(dim):
        up = pts.copy()
        dn = pts.copy()
        up[:, j] += fd_step
        dn[:, j] -= fd_step
        stack.append(up)
        stack.append(dn)
    batch = np.concatenate(stack, axis=0)
    flowed = flow(system, times, batch, cfg, force_numeric)
    jac = np.empty((trials, dim, dim))
    for j in range(dim):
        up = flowed[2 * j * trials:(2 * j + 1) * trials]
        dn = flowed[(2 * j + 1) * trials:(2 * j + 2) * trials]
        jac[:, :, j] = _wrapped_difference(system.chart, up, dn) / (2.0 * fd_step)
    dets = np.linalg.det(jac)
    return float(np.abs(dets - 1.0).max())


def check_rank_independence(system: SystemDef, n_points: int, seed,
                            rel_tol: float = 1e-8) -> float:
    """Fraction of sampled points where the n field vectors have full rank."""
    pts = sample_points(system.chart, n_points, seed,
                        reject=system.singular.contains)
    fields = np.stack(
        [field_from_gradient(c.gradient(pts)) for c in system.components],
        axis=1)  # (N, n, 2n)
    sv = np.linalg.svd(fields, compute_uv=False)
    full = sv[:, -1] > rel_tol * np.maximum(sv[:, 0], 1e-300)
    return float(np.mean(full))


# --- component factories -----------------------------------------------

def component_from_callables(name: str, value, gradient,
                             analytic_flow=None) -> HamiltonianComponent:
    """Wrap raw vectorized callables; no compiled fast path."""
    return HamiltonianComponent(name, value, gradient, analytic_flow, None)


def height_rotation_component(pair: int, rate: float,
                              quad: float = 0.0) -> HamiltonianComponent:
    """h = rate*p + quad*p^2 on the given pair.

    The conjugate angle rotates at speed -(rate + 2*quad*p) while p is
    conserved, which gives the analytic flow directly.
    """
    iq, ip = 2 * pair, 2 * pair + 1

    def value(pts):
        p = pts[..., ip]
        return rate * p + quad * p * p

    def gradient(pts):
        g = np.zeros_like(pts)
        g[..., ip] = rate + 2.0 * quad * pts[..., ip]
        return g

    def analytic_flow(t, pts):
        out = np.array(pts, dtype=float)
        speed = rate + 2.0 * quad * out[..., ip]
        out[..., iq] = out[..., iq] - speed * t
        return out

    label = f"height(pair={pair}, rate={rate:g}"
    label += f", quad={quad:g})" if quad else ")"
    return HamiltonianComponent(
        label, value, gradient, analytic_flow,
        KernelSpec(KERNEL_QUAD_HEIGHT, pair, float(rate), float(quad)))


def angle_cos_component(pair: int, amp: float = 1.0) -> HamiltonianComponent:
    """h = amp*cos(q) on the given pair: q is conserved, p shears."""
    iq, ip = 2 * pair, 2 * pair + 1

    def value(pts):
        return amp * np.cos(pts[..., iq])

    def gradient(pts):
        g = np.zeros_like(pts)
        g[..., iq] = -amp * np.sin(pts[..., iq])
        return g

    def analytic_flow(t, pts):
        out = np.array(pts, dtype=float)
        out[..., ip] = out[..., ip] - amp * t * np.sin(out[..., iq])
        return out

    return HamiltonianComponent(
        f"cos-angle(pair={pair}, amp={amp:g})", value, gradient, analytic_flow,
        KernelSpec(KERNEL_COS_ANGLE, pair, float(amp), 0.0))


def sphere_x_component(pair: int, amp: float = 1.0) -> HamiltonianComponent:
    """h = amp * (x-coordinate of the embedded sphere factor).

    The flow rotates the factor about the ambient x-axis by -amp*t; unlike
    the height Hamiltonians its chart-coordinate field varies along its own
    trajectories, which makes it the reference case for integrator accuracy.
    """
    iq, ip = 2 * pair, 2 * pair + 1

    def value(pts):
        q = pts[..., iq]
        p = pts[..., ip]
        return amp * np.sqrt(1.0 - p * p) * np.cos(q)

    def gradient(pts):
        q = pts[..., iq]
        p = pts[..., ip]
        r = np.sqrt(1.0 - p * p)
        g = np.zeros_like(pts)
        g[..., iq] = -amp * r * np.sin(q)
        g[..., ip] = -amp * p * np.cos(q) / r
        return g

    def analytic_flow(t, pts):
        out = np.array(pts, dtype=float)
        q = out[..., iq]
        p = out[..., ip]
        r = np.sqrt(1.0 - p * p)
        x = r * np.cos(q)
        y = r * np.sin(q)
        c, s = np.cos(amp * t), np.sin(amp * t)
        y2 = y * c + p * s
        z2 = -y * s + p * c
        tiny = np.nextafter(1.0, 0.0)
        out[..., ip] = np.clip(z2, -tiny, tiny)
        out[..., iq] = np.arctan2(y2, x)
        return out

    return HamiltonianComponent(
        f"sphere-x(pair={pair}, amp={amp:g})", value, gradient, analytic_flow,
        KernelSpec(KERNEL_SPHERE_X, pair, float(amp), 0.0))


def cross_trig_component(pair: int, a: float = 1.0,
                         b: float = 1.0) -> HamiltonianComponent:
    """h = a*cos(q) + b*sin(p): a pendulum-like field with no analytic flow.

    Used to validate the numeric integrator on genuinely curved trajectories.
    """
    iq, ip = 2 * pair, 2 * pair + 1

    def value(pts):
        return a * np.cos(pts[..., iq]) + b * np.sin(pts[..., ip])

    def gradient(pts):
        g = np.zeros_like(pts)
        g[..., iq] = -a * np.sin(pts[..., iq])
        g[..., ip] = b * np.cos(pts[..., ip])
        return g

    return HamiltonianComponent(
        f"cross-trig(pair={pair}, a={a:g}, b={b:g})", value, gradient, None,
        KernelSpec(KERNEL_CROSS_TRIG, pair, float(a), float(b)))
