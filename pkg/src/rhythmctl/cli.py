"""Command-line front end.

Every command reads one JSON document (``--config``) carrying
``"schema_version": 1`` and writes its outputs to ``--out`` (falling back
to ``$RHYTHMCTL_OUT``, then ``./rhythmctl_out``).

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import svg
from .analysis import ScenarioResult, extract_profile
from .design import (
    controller_gamma,
    design_complex_leading,
    design_real_leading,
    eigen_spectrum,
    hopf_critical_alpha,
    normalize_profile,
    random_tail,
    read_matrix_csv,
    write_matrix_csv,
)
from .dynamics import DEFAULT_DT, simulate
from .errors import ConfigError, NotRhythmicError, NumericalError, PreconditionError, RhythmError
from .model import NetworkConfig, TimeVaryingNetwork, Trajectory
from .scenarios import KINDS, OVERRIDE_KEYS, Scenario, build_scenario, run_scenario

log = logging.getLogger("rhythmctl")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
COMMANDS = ("design", "simulate", "run-scenario", "sweep")

_SCENARIO_KEYS = {"schema_version", "kind", "seed"} | set(OVERRIDE_KEYS)
_DESIGN_KEYS = {"schema_version", "rho", "theta", "mu1", "mu1_imag", "tail", "seed", "beta", "epsilon"}
_SIMULATE_KEYS = {"schema_version", "adjacency", "adjacency_csv", "alpha", "beta", "epsilon", "t_end", "dt",
                  "sample_stride", "seed", "initial", "time_varying"}
_SWEEP_KEYS = (_SCENARIO_KEYS - {"seed"}) | {"seeds", "grid"}


class IOFailure(RhythmError):
    pass


@dataclass
class DesignRequest:
    rho: list
    theta: list | None
    mu1: float
    mu1_imag: float | None
    tail: list | None
    seed: int
    beta: float
    epsilon: float


@dataclass
class SimulateRequest:
    network: NetworkConfig | TimeVaryingNetwork
    initial: np.ndarray
    t_end: float
    dt: float
    sample_stride: int
    seed: int


@dataclass
class SweepRequest:
    kind: str
    base: dict
    seeds: list
    grid: dict

    def scenarios(self):
        keys = sorted(self.grid)
        for seed in self.seeds:
            for values in itertools.product(*(self.grid[k] for k in keys)):
                overrides = dict(self.base)
                overrides.update(zip(keys, values))
                yield self.kind, overrides, seed


def _check_keys(doc: dict, allowed: set, prefix: str = "") -> None:
    if not isinstance(doc, dict):
        raise ConfigError("expected a JSON object", prefix or "<root>")
    for key in sorted(doc):
        if key not in allowed:
            raise ConfigError("unknown key", f"{prefix}{key}")
    version = doc.get("schema_version")
    if not prefix and version != SCHEMA_VERSION:
        raise ConfigError(f"expected schema_version {SCHEMA_VERSION}, got {version!r}", "schema_version")


def _number(doc: dict, key: str, default=None, positive: bool = False):
    value = doc.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key)
    if positive and not value > 0:
        raise ConfigError(f"must be positive, got {value}", key)
    return value


def _scenario_overrides(doc: dict) -> dict:
    overrides = {k: v for k, v in doc.items() if k not in ("schema_version", "kind", "seed", "seeds", "grid")}
    if overrides.get("mapping") is not None:
        mapping = overrides["mapping"]
        if not isinstance(mapping, list) or not all(isinstance(v, int) and v >= 1 for v in mapping):
            raise ConfigError("mapping must be a list of 1-based reference indices", "mapping")
        overrides["mapping"] = [v - 1 for v in mapping]
    if overrides.get("zeta") is not None:
        zeta = overrides["zeta"]
        if not isinstance(zeta, list) or len(zeta) != 2:
            raise ConfigError("zeta must be a [low, high] pair", "zeta")
    return overrides


def parse_config(document, command: str = "run-scenario", seed: int | None = None):
    """Validate a parsed JSON document and turn it into a request object.

    ``run-scenario`` yields a :class:`Scenario`; the other commands yield
    ``DesignRequest``, ``SimulateRequest`` or ``SweepRequest``.
    """
    if command == "run-scenario":
        _check_keys(document, _SCENARIO_KEYS)
        kind = document.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"must be one of {', '.join(KINDS)}", "kind")
        s = document.get("seed", 0) if seed is None else seed
        if not isinstance(s, int) or s < 0:
            raise ConfigError("seed must be a non-negative integer", "seed")
        return build_scenario(kind, _scenario_overrides(document), s)

    if command == "sweep":
        _check_keys(document, _SWEEP_KEYS)
        kind = document.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"must be one of {', '.join(KINDS)}", "kind")
        seeds = [seed] if seed is not None else document.get("seeds", [0])
        if not isinstance(seeds, list) or not all(isinstance(v, int) and v >= 0 for v in seeds):
            raise ConfigError("seeds must be a list of non-negative integers", "seeds")
        grid = document.get("grid", {})
        if not isinstance(grid, dict):
            raise ConfigError("grid must be an object", "grid")
        for key, values in grid.items():
            if key not in OVERRIDE_KEYS:
                raise ConfigError("unknown key", f"grid.{key}")
            if not isinstance(values, list) or not values:
                raise ConfigError("grid values must be a non-empty list", f"grid.{key}")
        request = SweepRequest(kind, _scenario_overrides(document), seeds, grid)
        for kind_, overrides, s in request.scenarios():
            build_scenario(kind_, overrides, s)  # validate every grid point up front
        return request

    if command == "design":
        _check_keys(document, _DESIGN_KEYS)
        rho = document.get("rho")
        if not isinstance(rho, list) or not rho:
            raise ConfigError("rho must be a non-empty list", "rho")
        theta = document.get("theta")
        if theta is not None and (not isinstance(theta, list) or len(theta) != len(rho)):
            raise ConfigError("theta must be a list as long as rho", "theta")
        tail = document.get("tail")
        return DesignRequest(
            rho=rho, theta=theta, mu1=_number(document, "mu1", 1.0, positive=True),
            mu1_imag=_number(document, "mu1_imag"), tail=tail,
            seed=seed if seed is not None else document.get("seed", 0),
            beta=_number(document, "beta", 0.5, positive=True), epsilon=_number(document, "epsilon", 0.01),
        )

    if command == "simulate":
        _check_keys(document, _SIMULATE_KEYS)
        if ("adjacency" in document) == ("adjacency_csv" in document):
            raise ConfigError("give exactly one of adjacency / adjacency_csv", "adjacency")
        if "adjacency_csv" in document:
            try:
                A = read_matrix_csv(document["adjacency_csv"])
            except OSError as exc:
                raise ConfigError(f"cannot read matrix: {exc}", "adjacency_csv") from exc
        else:
            A = document["adjacency"]
        net = NetworkConfig(A, _number(document, "alpha", 0.52), _number(document, "beta", 0.5),
                            _number(document, "epsilon", 0.01))
        law = document.get("time_varying")
        if law is not None:
            net = TimeVaryingNetwork(net, law)
        s = seed if seed is not None else document.get("seed", 0)
        initial = document.get("initial")
        if initial is None:
            initial = np.random.default_rng(s).uniform(-1.0, 1.0, 2 * net.n)
        initial = np.asarray(initial, dtype=np.float64)
        if initial.shape != (2 * net.n,):
            raise ConfigError(f"initial state needs {2 * net.n} entries", "initial")
        dt = _number(document, "dt", DEFAULT_DT, positive=True)
        t_end = _number(document, "t_end", 400.0, positive=True)
        stride = document.get("sample_stride") or max(1, int(np.ceil(round(t_end / dt) / 10_000)))
        return SimulateRequest(net, initial, t_end, dt, int(stride), s)

    raise ConfigError(f"unknown command {command!r}", "command")


# ---------------------------------------------------------------- export

def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n")


def _write_table(path: Path, columns: list[str], data: np.ndarray, fmt: str) -> Path:
    if fmt == "csv":
        path = path.with_suffix(".csv")
        np.savetxt(path, data, delimiter=",", fmt="%.17g", header=",".join(columns), comments="")
    else:
        path = path.with_suffix(".json")
        _dump_json(path, {"columns": columns, "rows": data.tolist()})
    return path


def trajectory_table(traj: Trajectory) -> tuple[list[str], np.ndarray]:
    cols = ["t"] + traj.layout.column_names()
    parts = [traj.times[:, None], traj.samples]
    if traj.ce2 is not None:
        cols.append("ce2")
        parts.append(traj.ce2[:, None])
    return cols, np.hstack(parts)


def _plot_scenario(out: Path, trajs: dict, mapping) -> list[Path]:
    closed = trajs.get("closed_loop")
    ref = trajs["reference"]
    t = ref.times
    response = [
        {"title": "open-loop plant x_i", "series": [(t, trajs["open_loop"].x[:, i], f"x_{i + 1}")
                                                   for i in range(trajs["open_loop"].x.shape[1])]},
        {"title": "reference X_j", "series": [(t, ref.x[:, j], f"X_{j + 1}") for j in range(ref.x.shape[1])]},
    ]
    if closed is not None:
        response.append({"title": "closed-loop plant x_i", "series": [
            (t, closed.x[:, i], f"x_{i + 1}") for i in range(closed.x.shape[1])]})
    paths = [svg.write_panels(out / "response.svg", response, "ensemble response")]
    if closed is None:
        return paths
    paths.append(svg.write_panels(out / "ce2.svg", [
        {"title": "CE^2", "series": [(t, closed.ce2, "ce2")]},
        {"title": "CE^2 (log10)", "series": [(t, closed.ce2, "ce2")], "logy": True},
    ], "cumulative square error"))
    a = closed.channel("a")
    panels = [{"title": "couplings a_i", "series": [(t, a[:, i], f"a_{i + 1}") for i in range(a.shape[1])]}]
    if closed.layout.filtered:
        ah = closed.channel("a_hat")
        panels.append({"title": "filtered couplings", "series": [
            (t, ah[:, i], f"ahat_{i + 1}") for i in range(ah.shape[1])]})
    paths.append(svg.write_panels(out / "couplings.svg", panels, "coevolutionary couplings"))
    return paths


def export(traj: Trajectory, result: ScenarioResult | None, fmt: str, output_dir, *, scenario: Scenario | None = None,
           trajectories: dict | None = None, plot: bool = False, name: str = "closed_loop",
           extra: dict | None = None) -> list[Path]:
    """Write the trajectory table, the summary document and optional plots."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}", "format")
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        cols, data = trajectory_table(traj)
        written = [_write_table(out / name, cols, data, fmt)]
        summary = {"schema_version": SCHEMA_VERSION, "result": result.to_dict() if result else None}
        if scenario is not None:
            summary["scenario"] = scenario.to_dict()
            summary["seed"] = scenario.seed
        if extra:
            summary.update(extra)
        _dump_json(out / "summary.json", summary)
        written.append(out / "summary.json")
        if plot and trajectories is not None:
            written.extend(_plot_scenario(out, trajectories, scenario.mapping if scenario else None))
        elif plot:
            written.append(svg.write_panels(out / "response.svg", [{
                "title": "x_i", "series": [(traj.times, traj.x[:, i], f"x_{i + 1}") for i in range(traj.x.shape[1])]}],
                "ensemble response"))
    except OSError as exc:
        raise IOFailure(f"cannot write to {out}: {exc}") from exc
    return written


# ---------------------------------------------------------------- commands

def _cmd_design(req: DesignRequest, out: Path, fmt: str, plot: bool) -> None:
    profile = normalize_profile(req.rho, req.theta)
    rng = np.random.default_rng(req.seed)
    if req.mu1_imag:
        tail = req.tail if req.tail is not None else random_tail(req.mu1, profile.n - 2, rng)
        A = design_complex_leading(profile, complex(req.mu1, req.mu1_imag), tail)
    else:
        tail = req.tail if req.tail is not None else random_tail(req.mu1, profile.n - 1, rng)
        A = design_real_leading(profile, np.concatenate([[req.mu1], tail]))
    report = eigen_spectrum(A)
    hopf = hopf_critical_alpha(A, req.beta, req.epsilon)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_matrix_csv(out / "adjacency.csv", A)
        _dump_json(out / "summary.json", {
            "schema_version": SCHEMA_VERSION,
            "profile": profile.to_dict(),
            "eigenvalues": [[float(v.real), float(v.imag)] for v in report.eigenvalues],
            "leading_kind": report.leading_kind,
            "dominance_gap": report.dominance_gap,
            "hopf_alpha": hopf.alpha,
            "hopf_determinant": hopf.determinant,
            "controller_gamma_at_hopf_alpha": controller_gamma(hopf.alpha, req.beta, req.epsilon),
            "seed": req.seed,
        })
    except OSError as exc:
        raise IOFailure(f"cannot write to {out}: {exc}") from exc


def _cmd_simulate(req: SimulateRequest, out: Path, fmt: str, plot: bool) -> None:
    traj = simulate(req.network, req.initial, req.dt, req.t_end, req.sample_stride)
    try:
        profile = extract_profile(traj, 0.5, min_periods=2).to_dict()
    except (NotRhythmicError, PreconditionError):
        profile = None
    extra = {"seed": req.seed, "network": {
        "adjacency": req.network.adjacency.tolist(), "alpha": req.network.alpha, "beta": req.network.beta,
        "epsilon": req.network.epsilon, "time_varying": req.network.law},
        "dt": req.dt, "t_end": req.t_end, "sample_stride": req.sample_stride, "extracted_profile": profile}
    export(traj, None, fmt, out, plot=plot, name="trajectory", extra=extra)


def _cmd_run(scenario: Scenario, out: Path, fmt: str, plot: bool) -> None:
    trajs, result = run_scenario(scenario)
    export(trajs["closed_loop"] if "closed_loop" in trajs else trajs["open_loop"], result, fmt, out,
           scenario=scenario, trajectories=trajs, plot=plot)


def _sweep_job(job):
    kind, overrides, seed = job
    scenario = build_scenario(kind, overrides, seed)
    _, result = run_scenario(scenario)
    return scenario.identity, {"kind": kind, "seed": seed, "overrides": overrides, "result": result.to_dict()}


def _cmd_sweep(req: SweepRequest, out: Path, fmt: str, plot: bool, jobs: int) -> None:
    work = list(req.scenarios())
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_sweep_job, work))
    else:
        results = dict(map(_sweep_job, work))
    try:
        out.mkdir(parents=True, exist_ok=True)
        _dump_json(out / "sweep.json", {"schema_version": SCHEMA_VERSION, "runs": results})
    except OSError as exc:
        raise IOFailure(f"cannot write to {out}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rhythmctl", description="Design, simulate and control rhythmic oscillator networks.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON document describing the request")
    ap.add_argument("--out", help="output directory (default: $RHYTHMCTL_OUT or ./rhythmctl_out)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv", help="trajectory table format")
    ap.add_argument("--plot", action="store_true", help="emit SVG figures")
    ap.add_argument("--seed", type=int, help="override the document seed")
    ap.add_argument("--jobs", type=int, default=1, help="parallel scenarios for sweep")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = Path(args.out or os.environ.get("RHYTHMCTL_OUT") or "rhythmctl_out")
    try:
        if not args.config:
            raise ConfigError("a config document is required", "--config")
        try:
            document = json.loads(Path(args.config).read_text())
        except FileNotFoundError as exc:
            raise ConfigError("file not found", args.config) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON ({exc})", args.config) from exc
        if args.seed is not None and args.seed < 0:
            raise ConfigError("seed must be non-negative", "--seed")
        if args.jobs < 1:
            raise ConfigError("jobs must be at least 1", "--jobs")
        request = parse_config(document, args.command, args.seed)
        if args.command == "design":
            _cmd_design(request, out, args.format, args.plot)
        elif args.command == "simulate":
            _cmd_simulate(request, out, args.format, args.plot)
        elif args.command == "run-scenario":
            _cmd_run(request, out, args.format, args.plot)
        else:
            _cmd_sweep(request, out, args.format, args.plot, args.jobs)
    except (ConfigError, PreconditionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IOFailure as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RhythmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
