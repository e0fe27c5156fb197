"""Box charts for compact phase spaces with exact uniform volume sampling.

A manifold is represented by a single chart whose coordinates live on a
product of circles and open intervals and in which the invariant volume is
Lebesgue measure on the coordinate box.  The cylindrical chart on the unit
sphere (angle, height) and the flat chart on the 2-torus both have this
property, as do their products, which covers every system in the catalog.

Coordinates come in consecutive conjugate pairs ``(q, p) = (coords[2i],
coords[2i+1])``; all dynamics downstream relies on that pairing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ChartDomainError, UnknownChartError, ValidationError

TWO_PI = 2.0 * np.pi

Predicate = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SingularSetSpec:
    """Measure-zero locus to avoid, given as a vectorized point predicate.

    ``contains`` maps an (..., 2n) coordinate array to a boolean array of
    shape (...,).
    """

    name: str
    contains: Predicate


def _never(points: np.ndarray) -> np.ndarray:
    return np.zeros(points.shape[:-1], dtype=bool)


EMPTY_SINGULAR_SET = SingularSetSpec("empty", _never)


@dataclass(frozen=True)
class DarbouxChart:
    """Coordinate box with an ambient embedding.

    Parameters
    ----------
    half_dim : n, so the chart has 2n coordinates
    lo, hi : per-coordinate range bounds; angles are [0, 2*pi)
    is_angle : marks circle coordinates (wrapped modulo 2*pi); the rest are
        open intervals
    embedding_dim : dimension of the ambient Euclidean space used by costs
    embed_fn : vectorized map from (..., 2n) coordinates to (..., d) ambient
        points, injective on the chart
    singular : chart-level degenerate locus (e.g. the height hitting a pole)
    """

    name: str
    half_dim: int
    lo: np.ndarray
    hi: np.ndarray
    is_angle: np.ndarray
    embedding_dim: int
    embed_fn: Callable[[np.ndarray], np.ndarray]
    singular: SingularSetSpec = field(default=EMPTY_SINGULAR_SET)

    def __post_init__(self):
        dim = 2 * self.half_dim
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        angle = np.asarray(self.is_angle, dtype=bool)
        if self.half_dim < 1:
            raise ValidationError("half_dim must be a positive integer")
        if lo.shape != (dim,) or hi.shape != (dim,) or angle.shape != (dim,):
            raise ValidationError("range arrays must have length 2*half_dim")
        if not np.all(lo < hi):
            raise ValidationError("every coordinate range needs lo < hi")
        if np.any(angle & ((lo != 0.0) | (hi != TWO_PI))):
            raise ValidationError("angle coordinates must span [0, 2*pi)")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "is_angle", angle)

    @property
    def dim(self) -> int:
        return 2 * self.half_dim


def total_volume(chart: DarbouxChart) -> float:
    """Invariant volume of the chart: the product of range lengths."""
    return float(np.prod(chart.hi - chart.lo))


def reduce_angles(chart: DarbouxChart, points: np.ndarray) -> np.ndarray:
    out = np.array(points, dtype=float)
    mask = chart.is_angle
    out[..., mask] = np.mod(out[..., mask], TWO_PI)
    return out


def validate_points(chart: DarbouxChart, points: np.ndarray) -> None:
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != chart.dim:
        raise ChartDomainError(
            f"expected {chart.dim} coordinates, got {pts.shape[-1]}")
    interval = ~chart.is_angle
    if interval.any():
        vals = pts[..., interval]
        if np.any(vals <= chart.lo[interval]) or np.any(vals >= chart.hi[interval]):
            raise ChartDomainError(
                f"coordinates outside the open ranges of chart '{chart.name}'")
    angles = pts[..., chart.is_angle]
    if angles.size and (np.any(angles < 0.0) or np.any(angles >= TWO_PI)):
        raise ChartDomainError("angle coordinates must be reduced to [0, 2*pi)")


def embed(chart: DarbouxChart, points: np.ndarray) -> np.ndarray:
    """Map chart coordinates to ambient Euclidean space.

    Raises ChartDomainError when interval coordinates leave their open range
    (angles are accepted unreduced since embeddings are 2*pi-periodic).
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != chart.dim:
        raise ChartDomainError(
            f"expected {chart.dim} coordinates, got {pts.shape[-1]}")
    interval = ~chart.is_angle
    if interval.any():
        vals = pts[..., interval]
        if np.any(vals <= chart.lo[interval]) or np.any(vals >= chart.hi[interval]):
            raise ChartDomainError(
                f"interval coordinate outside open range in chart '{chart.name}'")
    return chart.embed_fn(pts)


def sample_points(chart: DarbouxChart, count: int, seed,
                  reject: Predicate | None = None) -> np.ndarray:
    """Draw ``count`` points i.i.d. uniform on the coordinate box.

    Deterministic for a fixed seed.  Points on the chart's singular locus
    (or on the optional extra ``reject`` locus) are redrawn; both are
    measure-zero events guarded against rather than expected.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(chart.lo, chart.hi, size=(int(count), chart.dim))

    def bad_mask(block):
        mask = np.asarray(chart.singular.contains(block), dtype=bool)
        if reject is not None:
            mask = mask | np.asarray(reject(block), dtype=bool)
        if mask.shape != block.shape[:-1]:
            raise ValidationError(
                "singular/reject predicates must map (N, 2n) points to (N,) "
                f"booleans, got shape {mask.shape}")
        return mask

    bad = bad_mask(pts)
    rounds = 0
    while bad.any():
        rounds += 1
        if rounds > 64:
            raise ValidationError(
                "singular-locus rejection did not terminate; the locus is "
                "not measure zero on this chart")
        idx = np.flatnonzero(bad)
        fresh = rng.uniform(chart.lo, chart.hi, size=(idx.size, chart.dim))
        pts[idx] = fresh
        bad = np.zeros(len(pts), dtype=bool)
        bad[idx] = bad_mask(fresh)
    return pts


# --- chart catalog -----------------------------------------------------

def _embed_sphere_pair(theta, z):
    r = np.sqrt(1.0 - z * z)
    return r * np.cos(theta), r * np.sin(theta), z


def _sphere_embed(pts):
    x, y, z = _embed_sphere_pair(pts[..., 0], pts[..., 1])
    return np.stack([x, y, z], axis=-1)


def _sphere_pole_guard(pts):
    return np.abs(pts[..., 1]) >= 1.0


def sphere_chart() -> DarbouxChart:
    """Unit sphere in cylindrical coordinates (angle, height).

    The poles are excluded by the open height interval; the area form is
    d(theta) ^ d(z), so uniform box sampling is exactly area-uniform and the
    total volume 4*pi equals the analytic sphere area.
    """
    return DarbouxChart(
        name="s2",
        half_dim=1,
        lo=np.array([0.0, -1.0]),
        hi=np.array([TWO_PI, 1.0]),
        is_angle=np.array([True, False]),
        embedding_dim=3,
        embed_fn=_sphere_embed,
        singular=SingularSetSpec("s2-poles", _sphere_pole_guard),
    )


def _torus_embed(pts):
    t1 = pts[..., 0]
    t2 = pts[..., 1]
    return np.stack([np.cos(t1), np.sin(t1), np.cos(t2), np.sin(t2)], axis=-1)


def torus_chart() -> DarbouxChart:
    """Flat 2-torus as two unit circles embedded in R^4."""
    return DarbouxChart(
        name="t2",
        half_dim=1,
        lo=np.array([0.0, 0.0]),
        hi=np.array([TWO_PI, TWO_PI]),
        is_angle=np.array([True, True]),
        embedding_dim=4,
        embed_fn=_torus_embed,
    )


def product_chart(first: DarbouxChart, second: DarbouxChart,
                  name: str | None = None) -> DarbouxChart:
    """Concatenate two charts: coordinates, ranges and embeddings stack.

    Squared ambient distance on the product is the sum of the factor squared
    distances, which keeps product costs additive.
    """
    da = first.dim
    db = second.dim

    def embed_fn(pts):
        ea = first.embed_fn(pts[..., :da])
        eb = second.embed_fn(pts[..., da:])
        return np.concatenate([ea, eb], axis=-1)

    def singular(pts):
        return first.singular.contains(pts[..., :da]) | \
            second.singular.contains(pts[..., da:])

    return DarbouxChart(
        name=name or f"{first.name}x{second.name}",
        half_dim=first.half_dim + second.half_dim,
        lo=np.concatenate([first.lo, second.lo]),
        hi=np.concatenate([first.hi, second.hi]),
        is_angle=np.concatenate([first.is_angle, second.is_angle]),
        embedding_dim=first.embedding_dim + second.embedding_dim,
        embed_fn=embed_fn,
        singular=SingularSetSpec(
            f"{first.singular.name}|{second.singular.name}", singular),
    )


_CHART_BUILDERS = {
    "s2": sphere_chart,
    "t2": torus_chart,
    "s2xs2": lambda: product_chart(sphere_chart(), sphere_chart(), name="s2xs2"),
}


def chart(name: str) -> DarbouxChart:
    """Look up a chart by identifier: "s2", "t2" or "s2xs2"."""
    try:
        builder = _CHART_BUILDERS[name]
    except KeyError:
        raise UnknownChartError(
            f"unknown chart '{name}' (known: {sorted(_CHART_BUILDERS)})") from None
    return builder()
