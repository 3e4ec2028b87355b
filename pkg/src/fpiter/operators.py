"""Projections and nonexpansive maps used by the iteration engines.

Closed convex sets come in three flavors here: half-spaces
``{u : <a, u> <= b}``, balls ``{u : ||u - c|| <= r}``, and the two
integral-constrained sets of the discretized function-space benchmark.
Their metric projections are closed-form; the composite operators built
from them (forward-projection sweep, averaged ball projections, Weiszfeld
step) are the fixed-point maps the solvers iterate.

All functions are pure; the small dataclasses are frozen. A note on
nonexpansiveness: every projection here, and the half-space/ball
composites, satisfy ``||T x - T y|| <= ||x - y||``. The Weiszfeld map does
not: it is a strong contraction near the weighted-median point but
expansive near the anchors, so callers must keep iterates away from the
anchor set (see :class:`SingularityError`).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .space import InnerProductSpace, PeriodicGridSpace

__all__ = [
    "HalfSpace",
    "Ball",
    "AnchorSet",
    "Operator",
    "InfeasibleSetError",
    "SingularityError",
    "PROJECTION_MODES",
    "project_halfspace",
    "project_ball",
    "project_integral_halfspace",
    "project_l2_ball",
    "project_halfspace_pair",
    "halfspace_from_cq_sets",
    "sfp_operator",
    "cfp_operator",
    "weiszfeld_map",
]

# "damped" scales the integral-halfspace correction by 1/L^2 instead of the
# metrically correct 1/L; it moves toward the set without reaching the
# boundary in one application. Kept because the reference benchmark runs
# use it; "exact" is the true metric projection.
PROJECTION_MODES = ("damped", "exact")

ANCHOR_SINGULARITY_TOL = 1e-12


class InfeasibleSetError(ValueError):
    """Projection target is empty (or numerically indistinguishable from empty)."""


class SingularityError(ArithmeticError):
    """Operator evaluated at a point where it is undefined."""


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """``{u : <normal, u> <= offset}`` under a space's inner product.

    A zero normal makes the set the whole space when ``offset >= 0`` and
    empty otherwise.
    """

    normal: np.ndarray
    offset: float


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed ball ``{u : ||u - center|| <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")


@dataclass(frozen=True, eq=False)
class AnchorSet:
    """Weighted anchor points for the Weiszfeld map.

    ``anchors`` has one point per row; ``weights`` are strictly positive.
    """

    anchors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        anchors = np.asarray(self.anchors, dtype=np.float64)
        if anchors.ndim != 2 or anchors.shape[0] < 1:
            raise ValueError("anchors must be a nonempty (m, dim) array")
        if not np.isfinite(anchors).all():
            raise ValueError("anchors must be finite")
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.shape != (anchors.shape[0],):
            raise ValueError("need exactly one weight per anchor")
        if not (weights > 0).all():
            raise ValueError("anchor weights must be strictly positive")
        anchors.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_csv(cls, path) -> "AnchorSet":
        """Load anchors from CSV: one anchor per row, weight in the last column.

        A non-numeric first row is treated as a header and skipped.
        """
        rows = []
        with open(Path(path), newline="") as fh:
            for raw in csv.reader(fh):
                cells = [c.strip() for c in raw if c.strip() != ""]
                if not cells:
                    continue
                try:
                    rows.append([float(c) for c in cells])
                except ValueError:
                    if rows:
                        raise
                    continue  # header line
        if not rows:
            raise ValueError(f"no anchor rows found in {path}")
        data = np.asarray(rows, dtype=np.float64)
        if data.shape[1] < 2:
            raise ValueError("anchor rows need at least one coordinate plus a weight")
        return cls(anchors=data[:, :-1], weights=data[:, -1])


@dataclass(frozen=True, eq=False)
class Operator:
    """A self-map of ``space`` with a display name, callable on points."""

    space: InnerProductSpace
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    name: str = "custom"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.func(x)


def _membership_slack(space, hs, u) -> float:
    # backward-error sized slack so borderline points count as feasible
    return 1e-12 * (1.0 + abs(hs.offset) + space.norm(hs.normal) * space.norm(u))


def project_halfspace(space: InnerProductSpace, hs: HalfSpace, x) -> np.ndarray:
    """Metric projection onto ``{u : <a, u> <= b}``.

    Returns ``x`` when feasible, otherwise ``x - ((<a,x> - b)/||a||^2) a``.
    Raises :class:`InfeasibleSetError` for the empty half-space (zero
    normal with negative offset).
    """
    x = space.check(x)
    a = space.check(hs.normal)
    ax = space.inner(a, x)
    if ax <= hs.offset:
        return x
    sq = space.inner(a, a)
    if sq == 0.0:
        raise InfeasibleSetError(
            "half-space with zero normal and negative offset is empty"
        )
    return x - ((ax - hs.offset) / sq) * a


def project_ball(space: InnerProductSpace, ball: Ball, x) -> np.ndarray:
    """Metric projection onto a closed ball.

    Points with ``||x - c|| <= r`` (boundary included) are returned
    unchanged; outside points are pulled radially onto the sphere.
    """
    x = space.check(x)
    c = space.check(ball.center)
    dist = space.norm(x - c)
    if dist <= ball.radius:
        return x
    return c + (ball.radius / dist) * (x - c)


def project_integral_halfspace(
    space: PeriodicGridSpace, x, mode: str = "damped"
) -> np.ndarray:
    """Projection onto ``{x : integral of x over [0, L] <= 1}`` on a grid space.

    With ``a`` the quadrature of ``x``: feasible points (``a <= 1``) are
    returned unchanged. Otherwise ``exact`` adds the constant
    ``(1 - a)/L`` (the metric projection, landing on the boundary), while
    ``damped`` adds ``(1 - a)/L^2``, an under-relaxed correction that only
    moves toward the set. Both variants are firmly nonexpansive.
    """
    if not isinstance(space, PeriodicGridSpace):
        raise TypeError("integral half-space projection needs a grid space")
    if mode not in PROJECTION_MODES:
        raise ValueError(f"mode must be one of {PROJECTION_MODES}, got {mode!r}")
    x = space.check(x)
    a = space.integrate(x)
    if a <= 1.0:
        return x
    length = space.interval_end
    divisor = length * length if mode == "damped" else length
    return x + (1.0 - a) / divisor


def project_l2_ball(space: PeriodicGridSpace, x) -> np.ndarray:
    """Projection onto ``{x : integral of |x(t) - sin(t)|^2 dt <= 16}``.

    The set is the radius-4 quadrature-norm ball centered at ``sin``;
    points inside (``b <= 16``) are returned unchanged, outside points are
    mapped to ``sin + 4 (x - sin)/sqrt(b)``.
    """
    if not isinstance(space, PeriodicGridSpace):
        raise TypeError("this projection is defined on a grid space")
    x = space.check(x)
    center = np.sin(space.nodes)
    r = x - center
    b = space.inner(r, r)
    if b <= 16.0:
        return x
    return center + (4.0 / np.sqrt(b)) * r


def project_halfspace_pair(
    space: InnerProductSpace, h1: HalfSpace, h2: HalfSpace, x
) -> np.ndarray:
    """Exact metric projection onto the intersection of two half-spaces.

    Case analysis on the active set: return ``x`` when feasible; a
    single-constraint projection when it satisfies the other constraint
    (then it is optimal for the intersection too); otherwise both
    constraints are active and the point is ``x - mu1 a1 - mu2 a2`` with
    multipliers from the 2x2 Gram system. If no case produces a feasible
    point with nonnegative multipliers the intersection is empty and
    :class:`InfeasibleSetError` is raised.
    """
    x = space.check(x)

    def satisfied(hs, u):
        return space.inner(hs.normal, u) <= hs.offset + _membership_slack(space, hs, u)

    if satisfied(h1, x) and satisfied(h2, x):
        return x
    p1 = project_halfspace(space, h1, x)
    if satisfied(h2, p1):
        return p1
    p2 = project_halfspace(space, h2, x)
    if satisfied(h1, p2):
        return p2

    a1, a2 = space.check(h1.normal), space.check(h2.normal)
    g11 = space.inner(a1, a1)
    g12 = space.inner(a1, a2)
    g22 = space.inner(a2, a2)
    det = g11 * g22 - g12 * g12
    if det <= 1e-14 * g11 * g22:
        # parallel (or degenerate) normals that the single projections could
        # not reconcile: opposing half-spaces with no overlap
        raise InfeasibleSetError("half-space intersection is empty")
    r1 = space.inner(a1, x) - h1.offset
    r2 = space.inner(a2, x) - h2.offset
    mu1 = (g22 * r1 - g12 * r2) / det
    mu2 = (g11 * r2 - g12 * r1) / det
    tol = 1e-12 * (1.0 + abs(mu1) + abs(mu2))
    if mu1 < -tol or mu2 < -tol:
        raise InfeasibleSetError("half-space intersection is empty")
    return x - max(mu1, 0.0) * a1 - max(mu2, 0.0) * a2


def halfspace_from_cq_sets(
    space: InnerProductSpace, x_n, y_n, x_0
) -> tuple[HalfSpace, HalfSpace]:
    """Half-space forms of the two sets cut by a CQ-type projection step.

    ``{u : ||y - u|| <= ||x - u||}`` expands to
    ``{u : <x - y, u> <= (||x||^2 - ||y||^2)/2}`` and
    ``{u : <x - u, x - x0> <= 0}`` rewrites as
    ``{u : <x0 - x, u> <= <x0 - x, x>}``. Degenerate inputs (``y = x`` or
    ``x0 = x``) give zero normals with offset 0, i.e. the whole space.
    """
    x_n = space.check(x_n)
    y_n = space.check(y_n)
    x_0 = space.check(x_0)
    c_normal = x_n - y_n
    c_offset = 0.5 * (space.inner(x_n, x_n) - space.inner(y_n, y_n))
    q_normal = x_0 - x_n
    q_offset = space.inner(q_normal, x_n)
    return HalfSpace(c_normal, c_offset), HalfSpace(q_normal, q_offset)


def sfp_operator(
    space: PeriodicGridSpace, x, lam: float = 0.25, mode: str = "damped"
) -> np.ndarray:
    """One forward-projection sweep ``x -> P_C(x - lam (x - P_Q x))``.

    ``P_Q`` is the sin-centered ball projection and ``P_C`` the integral
    half-space projection (see above); the linear map between the two
    constraint spaces is the identity, which has unit norm, so the sweep is
    nonexpansive exactly when ``0 < lam < 2``.
    """
    if not 0.0 < lam < 2.0:
        raise ValueError(f"lam must lie in (0, 2), got {lam}")
    x = space.check(x)
    pq = project_l2_ball(space, x)
    z = x - lam * (x - pq)
    return project_integral_halfspace(space, z, mode)


def cfp_operator(space: InnerProductSpace, balls: Sequence[Ball], x) -> np.ndarray:
    """Averaged-projection sweep ``x -> P_0((1/m) sum_{i=1..m} P_i x)``.

    ``balls[0]`` is the outer set applied last; the remaining balls are
    projected independently and averaged. Composition of nonexpansive maps,
    hence nonexpansive; fixes any common point of all the balls.
    """
    balls = list(balls)
    if len(balls) < 2:
        raise ValueError("need an outer ball plus at least one inner ball")
    x = space.check(x)
    total = np.zeros(space.size)
    for ball in balls[1:]:
        total = total + project_ball(space, ball, x)
    avg = total / (len(balls) - 1)
    return project_ball(space, balls[0], avg)


def weiszfeld_map(space: InnerProductSpace, anchors: AnchorSet, x) -> np.ndarray:
    """Weighted-harmonic-mean step toward the weighted-median of the anchors.

    ``T(x) = (sum_i w_i a_i / d_i) / (sum_i w_i / d_i)`` with
    ``d_i = ||x - a_i||``. Undefined at the anchors themselves: points
    within ``1e-12`` of an anchor raise :class:`SingularityError` and the
    caller decides the perturbation policy. The output is a convex
    combination of the anchors with coefficients proportional to
    ``w_i / d_i``.
    """
    x = space.check(x)
    points = anchors.anchors
    if points.shape[1] != space.size:
        raise ValueError(
            f"anchors have {points.shape[1]} coordinates, space has {space.size}"
        )
    dists = np.array([space.norm(x - a) for a in points])
    if (dists <= ANCHOR_SINGULARITY_TOL).any():
        raise SingularityError("evaluation point coincides with an anchor")
    coef = anchors.weights / dists
    return (coef @ points) / coef.sum()
