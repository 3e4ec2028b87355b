"""Preconfigured benchmark problems with their exact parameters.

Three problem families, each wrapped in an :class:`ExperimentSpec` that
bundles the space, the fixed-point operator, the error metric that the
stopping rule tests, default run settings, and initial points:

sfp
    Feasibility in discretized L2 on [0, 2*pi]: find x with
    ``integral x <= 1`` and ``||x - sin|| <= 4``. Operator: the
    forward-projection sweep with ``lam = 0.25``. Metric:
    ``0.5 ||P_C x - x||^2 + 0.5 ||P_Q x - x||^2``, tolerance 1e-3. Four
    fixed starting functions: t2 = t^2/10, exp = e^(t/2)/3,
    pow2 = 2^t/16, sin2 = 3 sin(2t).

cfp
    Intersection of ``m + 1`` unit balls in R^N (default N = m = 30):
    outer ball at the origin, two fixed balls at +-e_1 whose intersection
    pins the solution to 0, the rest centered uniformly in
    ``(-1/sqrt(N), 1/sqrt(N))^N``. Operator: project the average of the
    inner projections by the outer one. Metric: sup norm of the iterate;
    runs go the full iteration budget. The CQ and inertial Mann baselines
    use ``psi_n = 1/(n+1)`` (inertia fixed at 0.5 for the latter), the
    viscosity-style algorithms keep the default schedules with
    ``f(x) = 0.1 x``.

weber
    Weighted-distance minimization over the 8 corners of the cube
    [0, 10]^3 with unit weights; by symmetry the optimum is (5, 5, 5).
    Operator: the Weiszfeld map. Metric: Euclidean distance to the
    optimum. Initial points are sampled uniformly from (0, 10)^3.

Specs are immutable; independent cases may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from .algorithms import RunConfig
from .operators import (
    AnchorSet,
    Ball,
    Operator,
    SingularityError,
    cfp_operator,
    project_integral_halfspace,
    project_l2_ball,
    sfp_operator,
    weiszfeld_map,
)
from .schedules import Schedules, inverse_linear
from .space import EuclideanSpace, InnerProductSpace, PeriodicGridSpace

__all__ = [
    "EXPERIMENTS",
    "ExperimentSpec",
    "build_sfp",
    "build_cfp",
    "build_weber",
    "build_experiment",
    "sfp_residual_metric",
    "sup_norm",
    "distance_metric",
    "fermat_weber_point",
]

EXPERIMENTS = ("sfp", "cfp", "weber")


def sfp_residual_metric(space: PeriodicGridSpace, mode: str = "damped"):
    """Half the squared residuals of both feasibility constraints.

    ``E(x) = 0.5 ||P_C x - x||^2 + 0.5 ||P_Q x - x||^2``; zero exactly on
    the intersection. ``mode`` selects the integral-halfspace variant and
    should match the operator being iterated.
    """

    def metric(x):
        rc = project_integral_halfspace(space, x, mode) - x
        rq = project_l2_ball(space, x) - x
        return 0.5 * space.inner(rc, rc) + 0.5 * space.inner(rq, rq)

    return metric


def sup_norm(x) -> float:
    """Largest coordinate magnitude."""
    return float(np.max(np.abs(x)))


def distance_metric(space: InnerProductSpace, target):
    """Space-norm distance to a fixed target point."""
    target = space.check(target)

    def metric(x):
        return space.norm(space.check(x) - target)

    return metric


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    """A benchmark instance: space, operator, metric, defaults, initials.

    ``initial_cases`` holds the fixed named starting points (empty for the
    randomly initialized problems, which provide ``sample_initial``
    instead). ``algorithm_schedules`` carries per-algorithm schedule
    overrides; anything not listed uses ``defaults.schedules``.
    ``details`` records the constants the instance was built from.
    """

    id: str
    space: InnerProductSpace
    operator: Operator
    metric: Callable[[np.ndarray], float]
    defaults: RunConfig
    initial_cases: Tuple[Tuple[str, np.ndarray], ...] = ()
    sample_initial: Optional[Callable[[np.random.Generator], np.ndarray]] = None
    algorithm_schedules: Mapping[str, Schedules] = field(
        default_factory=lambda: MappingProxyType({})
    )
    details: Mapping[str, object] = field(default_factory=lambda: MappingProxyType({}))

    def schedules_for(self, algorithm: str) -> Schedules:
        return self.algorithm_schedules.get(algorithm, self.defaults.schedules)

    def make_initials(self, rng=None, count: int = 1):
        """Named starting points: the fixed cases, or ``count`` sampled ones."""
        if self.initial_cases:
            return list(self.initial_cases)
        if self.sample_initial is None:
            raise ValueError(f"experiment {self.id!r} has no initial points")
        if rng is None:
            raise ValueError("sampling initial points needs a Generator")
        return [(f"rand{i}", self.sample_initial(rng)) for i in range(count)]


def build_sfp(
    grid_points: int = 1024,
    tolerance: float = 1e-3,
    lam: float = 0.25,
    mode: str = "damped",
    max_iterations: int = 10000,
    eta: float = 4.0,
    seed: int = 0,
) -> ExperimentSpec:
    """Function-space feasibility benchmark on a uniform grid.

    The stopping rule is the residual metric dropping below ``tolerance``;
    ``max_iterations`` is only a safety cap, hence the generous default.
    """
    space = PeriodicGridSpace(grid_points)
    operator = Operator(
        space, lambda x: sfp_operator(space, x, lam=lam, mode=mode), name="sfp-sweep"
    )
    cases = (
        ("t2", space.from_function(lambda t: t**2 / 10.0)),
        ("exp", space.from_function(lambda t: np.exp(t / 2.0) / 3.0)),
        ("pow2", space.from_function(lambda t: 2.0**t / 16.0)),
        ("sin2", space.from_function(lambda t: 3.0 * np.sin(2.0 * t))),
    )
    defaults = RunConfig(
        error_metric=sfp_residual_metric(space, mode),
        max_iterations=max_iterations,
        tolerance=tolerance,
        schedules=Schedules(eta=eta),
        rng_seed=seed,
        anchor_scale=0.9,
        contraction_rho=0.9,
    )
    return ExperimentSpec(
        id="sfp",
        space=space,
        operator=operator,
        metric=defaults.error_metric,
        defaults=defaults,
        initial_cases=cases,
        details=MappingProxyType(
            {"lam": lam, "mode": mode, "grid_points": grid_points}
        ),
    )


def build_cfp(
    dim: int = 30,
    num_balls: int = 30,
    seed: int = 0,
    max_iterations: int = 1000,
    eta: float = 4.0,
) -> ExperimentSpec:
    """Random-balls feasibility benchmark in R^dim.

    ``num_balls`` counts the inner balls; the outer unit ball at the origin
    comes on top. Centers 1 and 2 sit at +-e_1 so the only common point is
    the origin, making ``sup_norm`` a true error measure. The remaining
    centers are drawn from ``(-1/sqrt(dim), 1/sqrt(dim))^dim`` with the
    given seed. There is no tolerance-based stopping in this benchmark;
    the default tolerance is an unreachable sentinel so runs go the full
    budget.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if num_balls < 2:
        raise ValueError(f"need at least two inner balls, got {num_balls}")
    space = EuclideanSpace(dim)
    rng = np.random.default_rng(seed)
    centers = np.zeros((num_balls + 1, dim))
    centers[1, 0] = 1.0
    centers[2, 0] = -1.0
    if num_balls > 2:
        bound = 1.0 / np.sqrt(dim)
        centers[3:] = rng.uniform(-bound, bound, size=(num_balls - 2, dim))
    balls = tuple(Ball(center=c, radius=1.0) for c in centers)
    operator = Operator(
        space, lambda x: cfp_operator(space, balls, x), name="cfp-averaged-projections"
    )
    defaults = RunConfig(
        error_metric=sup_norm,
        max_iterations=max_iterations,
        tolerance=1e-12,
        schedules=Schedules(eta=eta),
        rng_seed=seed,
        anchor_scale=0.9,
        contraction_rho=0.1,
    )
    baselines = MappingProxyType(
        {
            "cq": Schedules(psi=inverse_linear, eta=eta),
            "inertial-mann": Schedules(
                psi=inverse_linear, eta=eta, delta_mode="constant", delta_value=0.5
            ),
        }
    )
    return ExperimentSpec(
        id="cfp",
        space=space,
        operator=operator,
        metric=sup_norm,
        defaults=defaults,
        sample_initial=lambda gen: gen.uniform(0.0, 10.0, dim),
        algorithm_schedules=baselines,
        details=MappingProxyType(
            {"dim": dim, "num_balls": num_balls, "seed": seed, "centers": centers}
        ),
    )


_CUBE_CORNERS = np.array(
    [
        [0.0, 10.0, 0.0, 10.0, 0.0, 10.0, 0.0, 10.0],
        [0.0, 0.0, 10.0, 10.0, 0.0, 0.0, 10.0, 10.0],
        [0.0, 0.0, 0.0, 0.0, 10.0, 10.0, 10.0, 10.0],
    ]
).T


def fermat_weber_point(
    space: InnerProductSpace,
    anchors: AnchorSet,
    tol: float = 1e-12,
    max_iter: int = 20000,
) -> np.ndarray:
    """Weighted-median reference solution by plain fixed-point iteration.

    Starts from the weighted mean of the anchors and iterates the Weiszfeld
    map until the step is below ``tol``. If the iteration runs into an
    anchor the optimum is (numerically) that anchor and it is returned.
    """
    weights = anchors.weights / anchors.weights.sum()
    x = weights @ anchors.anchors
    for _ in range(max_iter):
        try:
            x_next = weiszfeld_map(space, anchors, x)
        except SingularityError:
            return x
        if space.norm(x_next - x) <= tol:
            return x_next
        x = x_next
    return x


def build_weber(
    anchors: Optional[AnchorSet] = None,
    target=None,
    max_iterations: int = 1000,
    tolerance: float = 1e-4,
    eta: float = 4.0,
    seed: int = 0,
) -> ExperimentSpec:
    """Facility-location benchmark driven by the Weiszfeld map.

    Defaults to the 8 unit-weight anchors at the corners of [0, 10]^3,
    whose symmetry puts the optimum at (5, 5, 5). For a custom anchor set
    the reference optimum is computed by :func:`fermat_weber_point` unless
    ``target`` is given explicitly.
    """
    if anchors is None:
        anchors = AnchorSet(anchors=_CUBE_CORNERS, weights=np.ones(8))
        if target is None:
            target = np.array([5.0, 5.0, 5.0])
    space = EuclideanSpace(anchors.anchors.shape[1])
    if target is None:
        target = fermat_weber_point(space, anchors)
    target = space.check(target)
    operator = Operator(
        space, lambda x: weiszfeld_map(space, anchors, x), name="weiszfeld"
    )
    metric = distance_metric(space, target)
    lo = float(anchors.anchors.min())
    hi = float(anchors.anchors.max())
    defaults = RunConfig(
        error_metric=metric,
        max_iterations=max_iterations,
        tolerance=tolerance,
        schedules=Schedules(eta=eta),
        rng_seed=seed,
        anchor_scale=0.9,
        contraction_rho=0.9,
    )
    return ExperimentSpec(
        id="weber",
        space=space,
        operator=operator,
        metric=metric,
        defaults=defaults,
        sample_initial=lambda gen: gen.uniform(lo, hi, space.size),
        details=MappingProxyType({"anchors": anchors, "target": target}),
    )


def build_experiment(experiment_id: str, **overrides) -> ExperimentSpec:
    """Dispatch to the builder for ``experiment_id`` with keyword overrides."""
    builders = {"sfp": build_sfp, "cfp": build_cfp, "weber": build_weber}
    if experiment_id not in builders:
        raise ValueError(
            f"unknown experiment {experiment_id!r}, expected one of {EXPERIMENTS}"
        )
    return builders[experiment_id](**overrides)
