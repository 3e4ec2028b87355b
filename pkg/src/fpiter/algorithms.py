"""Fixed-point iteration engines with stopping criteria and trace capture.

Seven algorithm names are understood by :func:`run`:

== =============== ==========================================================
id                 update from ``x = x_n`` (``w`` is the extrapolated point)
== =============== ==========================================================
1  mann            ``x+ = psi x + (1-psi) T x``
2  inertial-mann   ``w = x + delta (x - x_prev); x+ = psi w + (1-psi) T w``
3  cq              ``y = psi x + (1-psi) T x``; then project the starting
                   point onto the two half-spaces cut from ``(x, y, x0)``
4  mimha           ``w`` as above; ``y = psi w + (1-psi) T w``;
                   ``x+ = nu u + (1-nu) y`` with a fixed anchor ``u``
5  mimva           same ``w, y``; ``x+ = nu f(x) + (1-nu) y`` with a
                   contraction ``f``
6  mmha            mimha with inertia forced off
7  mmva            mimva with inertia forced off
== =============== ==========================================================

A single run is strictly sequential; the runner itself is reentrant, so
independent runs can execute concurrently on their own inputs. Traces are
plain frozen records. Given identical configuration and inputs the numeric
content of a trace is bit-for-bit reproducible; only the wall-clock column
varies between invocations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from .operators import (
    Operator,
    SingularityError,
    halfspace_from_cq_sets,
    project_halfspace_pair,
)
from .schedules import Schedules
from .space import InnerProductSpace

__all__ = [
    "ALGORITHMS",
    "TerminalReason",
    "TraceRecord",
    "IterationTrace",
    "RunConfig",
    "mann_step",
    "inertial_mann_step",
    "cq_step",
    "mimha_step",
    "mimva_step",
    "run",
]

ALGORITHMS = ("mann", "inertial-mann", "cq", "mmha", "mimha", "mmva", "mimva")

_ANCHORED = ("mmha", "mimha")
_VISCOUS = ("mmva", "mimva")
_INERTIAL = ("inertial-mann", "mimha", "mimva")


class TerminalReason(Enum):
    TOLERANCE_MET = "tolerance_met"
    MAX_ITERATIONS = "max_iterations"
    SINGULARITY = "singularity"


@dataclass(frozen=True)
class TraceRecord:
    """One iteration: index, error before the step, inertia used, elapsed wall time."""

    n: int
    error: float
    delta: float
    elapsed_s: float


@dataclass(frozen=True)
class IterationTrace:
    records: Tuple[TraceRecord, ...]
    terminal_reason: TerminalReason

    @property
    def iterations(self) -> int:
        return self.records[-1].n

    @property
    def final_error(self) -> float:
        return self.records[-1].error

    @property
    def errors(self) -> Tuple[float, ...]:
        return tuple(r.error for r in self.records)


@dataclass(frozen=True)
class RunConfig:
    """Stopping rule, schedules and anchor/contraction defaults for a run.

    ``error_metric`` maps a point to the scalar the stopping criterion
    tests; it is evaluated at ``x_n`` before the step, so a run that starts
    inside tolerance records exactly one entry. ``anchor_scale`` and
    ``contraction_rho`` supply the defaults ``u = anchor_scale * x_0`` and
    ``f(x) = contraction_rho * x`` when no explicit anchor or contraction
    is passed to :func:`run`. ``rng_seed`` is provenance only: nothing in a
    run draws random numbers.
    """

    error_metric: Callable[[np.ndarray], float]
    max_iterations: int = 1000
    tolerance: float = 1e-3
    schedules: Schedules = field(default_factory=Schedules)
    rng_seed: int = 0
    anchor_scale: float = 0.9
    contraction_rho: float = 0.9

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if not 0.0 <= self.contraction_rho < 1.0:
            raise ValueError(
                f"contraction_rho must lie in [0, 1), got {self.contraction_rho}"
            )


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _extrapolate(space, x, x_prev, delta_n):
    if delta_n < 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta_n}")
    x = space.check(x)
    if delta_n == 0.0:
        # short-circuit keeps the no-inertia reductions bitwise identical
        return x
    return x + delta_n * (x - space.check(x_prev))


def mann_step(space: InnerProductSpace, T, x, psi_n: float) -> np.ndarray:
    """Averaged operator step ``psi x + (1 - psi) T x``."""
    _check_unit("psi", psi_n)
    x = space.check(x)
    return space.combine(psi_n, x, space.check(T(x)))


def inertial_mann_step(
    space: InnerProductSpace, T, x, x_prev, delta_n: float, psi_n: float
) -> np.ndarray:
    """Mann step applied at the extrapolated point ``x + delta (x - x_prev)``."""
    w = _extrapolate(space, x, x_prev, delta_n)
    return mann_step(space, T, w, psi_n)


def cq_step(space: InnerProductSpace, T, x, x0, psi_n: float) -> np.ndarray:
    """Averaged step followed by projecting the starting point.

    Builds the two half-spaces from ``(x, y, x0)`` and returns the exact
    projection of ``x0`` onto their intersection. ``psi = 1`` is accepted
    because the baseline schedule ``1/(n+1)`` starts there; the step then
    degenerates gracefully (``y = x``, first cut is the whole space).
    An empty intersection is a fatal error: it cannot occur while the
    operator has fixed points.
    """
    x0 = space.check(x0)
    y = mann_step(space, T, x, psi_n)
    c_set, q_set = halfspace_from_cq_sets(space, x, y, x0)
    return project_halfspace_pair(space, c_set, q_set, x0)


def mimha_step(
    space: InnerProductSpace,
    T,
    x,
    x_prev,
    u,
    delta_n: float,
    psi_n: float,
    nu_n: float,
) -> np.ndarray:
    """Inertial averaged step blended with a fixed anchor.

    ``w = x + delta (x - x_prev)``, ``y = psi w + (1-psi) T w``,
    result ``nu u + (1-nu) y``. With ``delta = 0`` this is exactly the
    anchored (Halpern-style) modified Mann step.
    """
    _check_unit("nu", nu_n)
    w = _extrapolate(space, x, x_prev, delta_n)
    y = mann_step(space, T, w, psi_n)
    return space.combine(nu_n, space.check(u), y)


def mimva_step(
    space: InnerProductSpace,
    T,
    x,
    x_prev,
    f,
    delta_n: float,
    psi_n: float,
    nu_n: float,
) -> np.ndarray:
    """Inertial averaged step blended with a contraction of the current point.

    Same ``w, y`` as :func:`mimha_step`; result ``nu f(x) + (1-nu) y``.
    ``f`` must be a rho-contraction with rho in [0, 1).
    """
    _check_unit("nu", nu_n)
    x = space.check(x)
    w = _extrapolate(space, x, x_prev, delta_n)
    y = mann_step(space, T, w, psi_n)
    return space.combine(nu_n, space.check(f(x)), y)


def run(
    algorithm: str,
    T: Operator,
    config: RunConfig,
    x_init,
    x_init_prev=None,
    anchor=None,
    contraction: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> IterationTrace:
    """Iterate ``algorithm`` around ``T`` until tolerance or the iteration cap.

    The error metric is evaluated at ``x_n`` before each step and every
    iteration appends one record ``(n, E_n, delta_n, elapsed_s)``; the trace
    therefore holds ``iterations + 1`` records. ``x_init_prev`` defaults to
    ``x_init`` (no momentum on the first step either way, since the inertia
    cap is zero at n = 0). ``anchor`` and ``contraction`` default to
    ``config.anchor_scale * x_init`` and ``x -> config.contraction_rho * x``.
    A :class:`SingularityError` raised by the operator ends the run with
    the corresponding terminal reason instead of propagating.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")
    space = T.space
    x = space.check(x_init)
    x_prev = x if x_init_prev is None else space.check(x_init_prev)
    x0 = x
    u = space.check(anchor) if anchor is not None else config.anchor_scale * x
    if contraction is None:
        rho = config.contraction_rho
        contraction = lambda p: rho * p  # noqa: E731

    sched = config.schedules
    if algorithm in ("mmha", "mmva"):
        sched = sched.without_inertia()

    records = []
    reason = TerminalReason.MAX_ITERATIONS
    start = time.perf_counter()
    for n in range(config.max_iterations + 1):
        err = config.error_metric(x)
        diff = space.norm(x - x_prev)
        if algorithm in _INERTIAL or algorithm in ("mmha", "mmva"):
            delta = sched.delta(n, diff)
        else:
            delta = 0.0
        records.append(TraceRecord(n, float(err), delta, time.perf_counter() - start))
        if err < config.tolerance:
            reason = TerminalReason.TOLERANCE_MET
            break
        if n == config.max_iterations:
            reason = TerminalReason.MAX_ITERATIONS
            break
        psi_n = sched.psi_at(n)
        try:
            if algorithm == "mann":
                x_next = mann_step(space, T, x, psi_n)
            elif algorithm == "inertial-mann":
                x_next = inertial_mann_step(space, T, x, x_prev, delta, psi_n)
            elif algorithm == "cq":
                x_next = cq_step(space, T, x, x0, psi_n)
            elif algorithm in _ANCHORED:
                x_next = mimha_step(space, T, x, x_prev, u, delta, psi_n, sched.nu_at(n))
            else:  # mmva / mimva
                x_next = mimva_step(
                    space, T, x, x_prev, contraction, delta, psi_n, sched.nu_at(n)
                )
        except SingularityError:
            reason = TerminalReason.SINGULARITY
            break
        x_prev, x = x, x_next
    return IterationTrace(records=tuple(records), terminal_reason=reason)
