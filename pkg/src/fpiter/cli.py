"""Command-line front end: config parsing, suite orchestration, CSV output.

A suite is one experiment run for a list of algorithms over that
experiment's initial cases. Every (algorithm, case) pair yields one trace
CSV with columns ``n, E_n, delta_n, elapsed_s``; the suite writes one
summary CSV mirroring a results-table layout (algorithm, case, iterations,
time_s, terminal_reason, seed). All numeric CSV fields are written with
shortest round-trip float formatting, so they parse back bit-exact; the
elapsed-time columns are the only nondeterministic content.

Configuration is a flat YAML mapping (see ``KNOWN_KEYS``); command-line
flags override file values. The default output directory comes from the
``FPITER_OUT`` environment variable, falling back to ``./results``.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
import yaml

from .algorithms import ALGORITHMS, IterationTrace, TerminalReason, run
from .experiments import EXPERIMENTS, ExperimentSpec, build_cfp, build_sfp, build_weber
from .operators import PROJECTION_MODES, AnchorSet
from .schedules import DELTA_MODES, Schedules

__all__ = ["CliConfig", "ConfigError", "parse_config", "run_suite", "main"]

log = logging.getLogger("fpiter")

OUTPUT_DIR_ENV = "FPITER_OUT"

DEFAULT_ALGORITHMS = {
    "sfp": ("mmha", "mimha", "mmva", "mimva"),
    "cfp": ("cq", "inertial-mann", "mmva", "mimva"),
    "weber": ("mimha", "mimva"),
}

# key -> (parser, validator message); values arrive from YAML or CLI flags
KNOWN_KEYS = (
    "experiment",
    "algorithms",
    "seed",
    "out",
    "repeat",
    "max-iter",
    "tol",
    "grid",
    "eta",
    "lambda",
    "xi-coeff",
    "psi-coeff",
    "delta-mode",
    "delta-value",
    "sfp-projection",
    "anchors-csv",
    "dim",
    "balls",
)


class ConfigError(ValueError):
    """Invalid configuration document or flag value."""


@dataclass(frozen=True)
class CliConfig:
    """Fully validated suite configuration with experiment defaults filled."""

    experiment: str
    algorithms: Tuple[str, ...]
    seed: int = 0
    output_dir: Path = Path("results")
    repeat: int = 1
    max_iter: Optional[int] = None
    tol: Optional[float] = None
    grid: Optional[int] = None
    eta: Optional[float] = None
    lam: Optional[float] = None
    xi_coeff: Optional[float] = None
    psi_coeff: Optional[float] = None
    delta_mode: Optional[str] = None
    delta_value: Optional[float] = None
    sfp_projection: Optional[str] = None
    anchors_csv: Optional[Path] = None
    dim: Optional[int] = None
    balls: Optional[int] = None


def _fail(key: str, detail: str):
    raise ConfigError(f"config key {key!r}: {detail}")


def _as_int(key, value, minimum=None):
    try:
        out = int(value)
    except (TypeError, ValueError):
        _fail(key, f"expected an integer, got {value!r}")
    if isinstance(value, float) and value != out:
        _fail(key, f"expected an integer, got {value!r}")
    if minimum is not None and out < minimum:
        _fail(key, f"must be >= {minimum}, got {out}")
    return out


def _as_float(key, value):
    try:
        return float(value)
    except (TypeError, ValueError):
        _fail(key, f"expected a number, got {value!r}")


def _as_algorithms(value):
    if isinstance(value, str):
        names = [s.strip() for s in value.split(",") if s.strip()]
    elif isinstance(value, (list, tuple)):
        names = [str(s).strip() for s in value]
    else:
        _fail("algorithms", f"expected a name list, got {value!r}")
    if not names:
        _fail("algorithms", "list is empty")
    for name in names:
        if name not in ALGORITHMS:
            _fail("algorithms", f"unknown algorithm {name!r}, expected one of {ALGORITHMS}")
    return tuple(names)


def _build_cli_config(raw: dict) -> CliConfig:
    for key in raw:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    if "experiment" not in raw or raw["experiment"] is None:
        raise ConfigError("config key 'experiment' is required (sfp, cfp or weber)")
    experiment = str(raw["experiment"])
    if experiment not in EXPERIMENTS:
        _fail("experiment", f"expected one of {EXPERIMENTS}, got {experiment!r}")

    out = {"experiment": experiment}
    if raw.get("algorithms") is not None:
        out["algorithms"] = _as_algorithms(raw["algorithms"])
    else:
        out["algorithms"] = DEFAULT_ALGORITHMS[experiment]
    if raw.get("seed") is not None:
        out["seed"] = _as_int("seed", raw["seed"], minimum=0)
    if raw.get("out") is not None:
        out["output_dir"] = Path(str(raw["out"]))
    else:
        out["output_dir"] = Path(os.environ.get(OUTPUT_DIR_ENV, "results"))
    if raw.get("repeat") is not None:
        out["repeat"] = _as_int("repeat", raw["repeat"], minimum=1)
    if raw.get("max-iter") is not None:
        out["max_iter"] = _as_int("max-iter", raw["max-iter"], minimum=1)
    if raw.get("tol") is not None:
        tol = _as_float("tol", raw["tol"])
        if not tol > 0:
            _fail("tol", f"must be positive, got {tol}")
        out["tol"] = tol
    if raw.get("grid") is not None:
        out["grid"] = _as_int("grid", raw["grid"], minimum=2)
    if raw.get("eta") is not None:
        eta = _as_float("eta", raw["eta"])
        if not eta >= 3.0:
            _fail("eta", f"must be >= 3, got {eta}")
        out["eta"] = eta
    if raw.get("lambda") is not None:
        lam = _as_float("lambda", raw["lambda"])
        if not 0.0 < lam < 2.0:
            _fail("lambda", f"must lie in (0, 2), got {lam}")
        out["lam"] = lam
    if raw.get("xi-coeff") is not None:
        xi = _as_float("xi-coeff", raw["xi-coeff"])
        if not xi > 0:
            _fail("xi-coeff", f"must be positive, got {xi}")
        out["xi_coeff"] = xi
    if raw.get("psi-coeff") is not None:
        psi = _as_float("psi-coeff", raw["psi-coeff"])
        if not 0.0 < psi < 1.0:
            _fail("psi-coeff", f"must lie in (0, 1), got {psi}")
        out["psi_coeff"] = psi
    if raw.get("delta-mode") is not None:
        mode = str(raw["delta-mode"])
        if mode not in DELTA_MODES:
            _fail("delta-mode", f"expected one of {DELTA_MODES}, got {mode!r}")
        out["delta_mode"] = mode
    if raw.get("delta-value") is not None:
        value = _as_float("delta-value", raw["delta-value"])
        if value < 0:
            _fail("delta-value", f"must be nonnegative, got {value}")
        out["delta_value"] = value
    if raw.get("sfp-projection") is not None:
        mode = str(raw["sfp-projection"])
        if mode not in PROJECTION_MODES:
            _fail("sfp-projection", f"expected one of {PROJECTION_MODES}, got {mode!r}")
        out["sfp_projection"] = mode
    if raw.get("anchors-csv") is not None:
        out["anchors_csv"] = Path(str(raw["anchors-csv"]))
    if raw.get("dim") is not None:
        out["dim"] = _as_int("dim", raw["dim"], minimum=1)
    if raw.get("balls") is not None:
        out["balls"] = _as_int("balls", raw["balls"], minimum=2)
    return CliConfig(**out)


def parse_config(text: str) -> CliConfig:
    """Parse and validate a flat YAML configuration document."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a flat key-value mapping")
    return _build_cli_config(raw)


def _power_law(coeff: float):
    def sequence(n: int) -> float:
        return coeff / (n + 1) ** 2

    return sequence


def _apply_schedule_overrides(sched: Schedules, cfg: CliConfig) -> Schedules:
    updates = {}
    if cfg.eta is not None:
        updates["eta"] = cfg.eta
    if cfg.psi_coeff is not None:
        updates["psi"] = _power_law(cfg.psi_coeff)
    if cfg.xi_coeff is not None:
        updates["xi"] = _power_law(cfg.xi_coeff)
    if cfg.delta_mode is not None:
        updates["delta_mode"] = cfg.delta_mode
    if cfg.delta_value is not None:
        updates["delta_value"] = cfg.delta_value
    return replace(sched, **updates) if updates else sched


def _build_spec(cfg: CliConfig) -> ExperimentSpec:
    if cfg.experiment == "sfp":
        kwargs = {}
        if cfg.grid is not None:
            kwargs["grid_points"] = cfg.grid
        if cfg.tol is not None:
            kwargs["tolerance"] = cfg.tol
        if cfg.lam is not None:
            kwargs["lam"] = cfg.lam
        if cfg.sfp_projection is not None:
            kwargs["mode"] = cfg.sfp_projection
        if cfg.max_iter is not None:
            kwargs["max_iterations"] = cfg.max_iter
        if cfg.eta is not None:
            kwargs["eta"] = cfg.eta
        return build_sfp(seed=cfg.seed, **kwargs)
    if cfg.experiment == "cfp":
        kwargs = {}
        if cfg.dim is not None:
            kwargs["dim"] = cfg.dim
        if cfg.balls is not None:
            kwargs["num_balls"] = cfg.balls
        if cfg.max_iter is not None:
            kwargs["max_iterations"] = cfg.max_iter
        if cfg.eta is not None:
            kwargs["eta"] = cfg.eta
        return build_cfp(seed=cfg.seed, **kwargs)
    kwargs = {}
    if cfg.anchors_csv is not None:
        kwargs["anchors"] = AnchorSet.from_csv(cfg.anchors_csv)
    if cfg.max_iter is not None:
        kwargs["max_iterations"] = cfg.max_iter
    if cfg.tol is not None:
        kwargs["tolerance"] = cfg.tol
    if cfg.eta is not None:
        kwargs["eta"] = cfg.eta
    return build_weber(seed=cfg.seed, **kwargs)


def _run_with_retry(algorithm, operator, run_config, x0, perturb_rng, retries=3):
    """Run once; on a singularity termination retry from a perturbed start."""
    attempt = 0
    while True:
        trace = run(algorithm, operator, run_config, x0)
        if trace.terminal_reason is not TerminalReason.SINGULARITY or attempt >= retries:
            return trace
        attempt += 1
        x0 = x0 + perturb_rng.normal(0.0, 1e-8, size=operator.space.size)
        log.warning(
            "%s hit an operator singularity; retry %d from a perturbed start",
            algorithm,
            attempt,
        )


def _format(value) -> str:
    # repr gives the shortest string that parses back to the same double
    return repr(float(value))


def _write_trace(path: Path, trace: IterationTrace) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("# E_n is the stopping metric at x_n before step n; iterations = data rows - 1\n")
        writer = csv.writer(fh)
        writer.writerow(["n", "E_n", "delta_n", "elapsed_s"])
        for rec in trace.records:
            writer.writerow([rec.n, _format(rec.error), _format(rec.delta), _format(rec.elapsed_s)])


def run_suite(cfg: CliConfig) -> int:
    """Execute every (algorithm, case) run and write trace + summary CSVs.

    Returns 0 when every run ended by tolerance or the iteration cap;
    singularity terminations are recorded in the summary and flip the exit
    status to 1 without aborting the rest of the suite.
    """
    spec = _build_spec(cfg)
    run_config = spec.defaults
    if cfg.max_iter is not None:
        run_config = replace(run_config, max_iterations=cfg.max_iter)
    if cfg.tol is not None:
        run_config = replace(run_config, tolerance=cfg.tol)
    run_config = replace(run_config, rng_seed=cfg.seed)

    initials_rng = np.random.default_rng([cfg.seed, 1])
    initials = spec.make_initials(initials_rng, cfg.repeat)

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    ok = True
    for algo_index, algorithm in enumerate(cfg.algorithms):
        schedules = _apply_schedule_overrides(spec.schedules_for(algorithm), cfg)
        algo_config = replace(run_config, schedules=schedules)
        for case_index, (case, x0) in enumerate(initials):
            perturb_rng = np.random.default_rng([cfg.seed, 2, algo_index, case_index])
            trace = _run_with_retry(algorithm, spec.operator, algo_config, x0, perturb_rng)
            trace_path = cfg.output_dir / f"{cfg.experiment}_{algorithm}_{case}.csv"
            _write_trace(trace_path, trace)
            reason = trace.terminal_reason
            ok = ok and reason is not TerminalReason.SINGULARITY
            rows.append(
                {
                    "algorithm": algorithm,
                    "case": case,
                    "iterations": trace.iterations,
                    "time_s": trace.records[-1].elapsed_s,
                    "terminal_reason": reason.value,
                    "seed": cfg.seed,
                }
            )
            log.info(
                "%s %s %s: %d iterations, %s, E=%.3e",
                cfg.experiment,
                algorithm,
                case,
                trace.iterations,
                reason.value,
                trace.final_error,
            )
    summary_path = cfg.output_dir / f"{cfg.experiment}_summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["algorithm", "case", "iterations", "time_s", "terminal_reason", "seed"],
        )
        writer.writeheader()
        for row in rows:
            row = dict(row)
            row["time_s"] = _format(row["time_s"])
            writer.writerow(row)
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpiter",
        description="Fixed-point iteration benchmark suites (sfp, cfp, weber).",
    )
    parser.add_argument("--config", type=Path, help="flat YAML configuration file")
    parser.add_argument("--experiment", choices=EXPERIMENTS, help="experiment id")
    parser.add_argument("--algo", help="comma-separated algorithm names")
    parser.add_argument("--seed", type=int, help="random seed (centers and initial points)")
    parser.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_DIR_ENV} or ./results)")
    parser.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap")
    parser.add_argument("--tol", type=float, help="stopping tolerance")
    parser.add_argument("--grid", type=int, help="grid nodes for the sfp experiment")
    parser.add_argument("--eta", type=float, help="inertia cap shape parameter (>= 3)")
    parser.add_argument("--repeat", type=int, help="number of random initial points")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _build_parser().parse_args(argv)
    raw = {}
    try:
        if args.config is not None:
            parsed = yaml.safe_load(args.config.read_text())
            if parsed is None:
                parsed = {}
            if not isinstance(parsed, dict):
                raise ConfigError("config must be a flat key-value mapping")
            raw.update(parsed)
        for key, value in (
            ("experiment", args.experiment),
            ("algorithms", args.algo),
            ("seed", args.seed),
            ("out", args.out),
            ("max-iter", args.max_iter),
            ("tol", args.tol),
            ("grid", args.grid),
            ("eta", args.eta),
            ("repeat", args.repeat),
        ):
            if value is not None:
                raw[key] = value
        cfg = _build_cli_config(raw)
    except (ConfigError, yaml.YAMLError, OSError) as exc:
        print(f"fpiter: {exc}", file=sys.stderr)
        return 2
    try:
        return run_suite(cfg)
    except OSError as exc:
        print(f"fpiter: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
