"""Batch front end: JSON config in, deterministic CSV/JSON out.

Commands: fh-sweep, vc-sweep, chicap-solve, seq-example, coupling, orbit,
approx-sweep.  Exit codes: 0 ok, 2 bad configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .approx import truncated_capacity_sweep
from .chicap import chi_capacity_V, orbit_capacity, solve_capacity
from .constructions import SeqExampleModel, coupling_set_capacity, seq_example_capacity
from .errors import ConfigInvalid, EntrocapError, IoError
from .maxent import sup_entropy_K, sup_entropy_V
from .qcore import DensityMatrix
from .spectra import ProbabilitySpectrum, SpectralSequence

COMMANDS = ("fh-sweep", "vc-sweep", "chicap-solve", "seq-example", "coupling",
            "orbit", "approx-sweep")
_GRID_COMMANDS = ("fh-sweep", "vc-sweep", "seq-example", "coupling")
_INPUT_KEYS = {
    "fh-sweep": {"sequence"},
    "vc-sweep": {"spectrum"},
    "chicap-solve": {"states_path", "max_iter"},
    "seq-example": {"q_model", "n_window"},
    "coupling": set(),
    "orbit": {"sigma", "unitaries"},
    "approx-sweep": {"states", "projectors"},
}


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    step: float

    def points(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-12)) + 1
        return [self.start + k * self.step for k in range(n)]


@dataclass(frozen=True)
class SweepSpec:
    command: str
    inputs: dict
    grid: Grid | None
    output_path: str
    tol: float


def _fmt(x) -> str:
    """Floats to 12 significant digits; bools lowercase; None -> nan."""
    if x is None:
        return "nan"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def parse_config(text: str) -> SweepSpec:
    """Validate a JSON configuration document; unknown keys are rejected."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as ex:
        raise ConfigInvalid(f"config is not valid JSON: {ex}") from ex
    if not isinstance(doc, dict):
        raise ConfigInvalid("config root must be an object")
    allowed = {"command", "inputs", "grid", "output_path", "tol"}
    for key in doc:
        if key not in allowed:
            raise ConfigInvalid(f"unknown key: {key}")
    command = doc.get("command")
    if command not in COMMANDS:
        raise ConfigInvalid(f"command: expected one of {COMMANDS}, got {command!r}")
    inputs = doc.get("inputs", {})
    if not isinstance(inputs, dict):
        raise ConfigInvalid("inputs: must be an object")
    for key in inputs:
        if key not in _INPUT_KEYS[command]:
            raise ConfigInvalid(f"inputs.{key}: unknown key for {command}")
    grid = None
    if "grid" in doc:
        g = doc["grid"]
        if not isinstance(g, dict) or set(g) != {"start", "stop", "step"}:
            raise ConfigInvalid("grid: must have exactly start, stop, step")
        try:
            start, stop, step = float(g["start"]), float(g["stop"]), float(g["step"])
        except (TypeError, ValueError) as ex:
            raise ConfigInvalid(f"grid: non-numeric entry ({ex})") from ex
        if step <= 0:
            raise ConfigInvalid("grid.step: must be positive")
        if stop < start:
            raise ConfigInvalid("grid.stop: must not precede grid.start")
        grid = Grid(start, stop, step)
    if command in _GRID_COMMANDS and grid is None:
        raise ConfigInvalid(f"grid: required for {command}")
    output_path = doc.get("output_path")
    if not isinstance(output_path, str) or not output_path:
        raise ConfigInvalid("output_path: required string")
    tol = doc.get("tol", 1e-8)
    if not isinstance(tol, (int, float)) or not 0.0 < tol <= 1e-2:
        raise ConfigInvalid(f"tol: must be in (0, 1e-2], got {tol!r}")
    return SweepSpec(command, inputs, grid, output_path, float(tol))


def _header(spec: SweepSpec, columns: list[str]) -> list[str]:
    echo = {
        "command": spec.command,
        "inputs": spec.inputs,
        "grid": None if spec.grid is None else
        {"start": spec.grid.start, "stop": spec.grid.stop, "step": spec.grid.step},
        "output_path": spec.output_path,
        "tol": spec.tol,
    }
    return [
        f"# entrocap {__version__}",
        f"# spec: {json.dumps(echo, sort_keys=True)}",
        "# " + ",".join(columns),
    ]


def _map_grid(fn, points, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


def _run_fh_sweep(spec: SweepSpec, workers: int) -> list[str]:
    seq = SpectralSequence.from_dict(spec.inputs["sequence"])

    def row(h):
        prof = sup_entropy_K(seq, h)
        return ",".join([_fmt(h), _fmt(prof.lam_star), _fmt(prof.sup_entropy),
                         prof.branch, _fmt(prof.gibbs_exists)])

    cols = ["constraint", "lam_star", "sup_entropy", "branch", "gibbs_exists"]
    return _header(spec, cols) + _map_grid(row, spec.grid.points(), workers)


def _run_vc_sweep(spec: SweepSpec, workers: int) -> list[str]:
    spectrum = ProbabilitySpectrum.from_dict(spec.inputs["spectrum"])

    def row(c):
        prof = sup_entropy_V(spectrum, c)
        chi = chi_capacity_V(spectrum, c)
        return ",".join([_fmt(c), _fmt(prof.lam_star), _fmt(prof.sup_entropy),
                         prof.branch, _fmt(prof.branch != "linear"),
                         _fmt(chi.chi_capacity)])

    cols = ["constraint", "lam_star", "sup_entropy", "branch", "gibbs_exists",
            "chi_capacity"]
    return _header(spec, cols) + _map_grid(row, spec.grid.points(), workers)


def _run_seq_example(spec: SweepSpec, workers: int) -> list[str]:
    q_model = spec.inputs.get("q_model", "inverse-log")
    n_window = int(spec.inputs.get("n_window", 12))

    def row(eps):
        res = seq_example_capacity(SeqExampleModel(q_model, eps, n_window))
        return ",".join([_fmt(eps), _fmt(res.lam_eps), _fmt(res.pi_eps),
                         _fmt(res.capacity), _fmt(res.cond46_lhs),
                         _fmt(res.has_optimal_ensemble)])

    cols = ["eps", "lam_eps", "pi_eps", "capacity", "cond46_lhs",
            "has_optimal_ensemble"]
    return _header(spec, cols) + _map_grid(row, spec.grid.points(), workers)


def _run_coupling(spec: SweepSpec, workers: int) -> list[str]:
    def row(d_float):
        d = int(round(d_float))
        res = coupling_set_capacity(d)
        return ",".join([_fmt(float(d)), _fmt(res.quantum), _fmt(res.classical)])

    cols = ["d", "quantum", "classical"]
    return _header(spec, cols) + _map_grid(row, spec.grid.points(), workers)


def _run_approx_sweep(spec: SweepSpec, workers: int) -> list[str]:
    states = [DensityMatrix.from_dict(rec) for rec in spec.inputs["states"]]
    projectors = [np.array([complex(re, im) for re, im in rec["entries"]],
                           dtype=complex).reshape(rec["dim"], rec["dim"])
                  for rec in spec.inputs["projectors"]]
    reports = truncated_capacity_sweep(states, projectors, tol=spec.tol)
    cols = ["rank", "eta", "capacity", "gap"]
    rows = [",".join([_fmt(float(r.projector_rank)), _fmt(r.eta),
                      _fmt(r.projected_capacity.capacity),
                      _fmt(r.projected_capacity.gap)]) for r in reports]
    return _header(spec, cols) + rows


def run(spec: SweepSpec, workers: int = 1) -> None:
    """Execute a validated spec and write its output file."""
    if spec.command == "chicap-solve":
        path = spec.inputs.get("states_path")
        if not path:
            raise ConfigInvalid("inputs.states_path: required for chicap-solve")
        try:
            with open(path, encoding="utf-8") as fh:
                recs = json.load(fh)
        except OSError as ex:
            raise IoError(f"cannot read {path}: {ex}") from ex
        states = [DensityMatrix.from_dict(rec) for rec in recs]
        result = solve_capacity(states, tol=spec.tol,
                                max_iter=int(spec.inputs.get("max_iter", 200_000)))
        payload = result.to_json()
    elif spec.command == "orbit":
        sigma = DensityMatrix.from_dict(spec.inputs["sigma"])
        unitaries = [np.array([complex(re, im) for re, im in rec["entries"]],
                              dtype=complex).reshape(rec["dim"], rec["dim"])
                     for rec in spec.inputs["unitaries"]]
        payload = orbit_capacity(sigma, unitaries).to_json()
    else:
        runner = {
            "fh-sweep": _run_fh_sweep,
            "vc-sweep": _run_vc_sweep,
            "seq-example": _run_seq_example,
            "coupling": _run_coupling,
            "approx-sweep": _run_approx_sweep,
        }[spec.command]
        payload = "\n".join(runner(spec, workers)) + "\n"
    try:
        with open(spec.output_path, "w", encoding="utf-8") as fh:
            fh.write(payload if payload.endswith("\n") else payload + "\n")
    except OSError as ex:
        raise IoError(f"cannot write {spec.output_path}: {ex}") from ex


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="entrocap",
        description="entropic characteristics of sets of quantum states")
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", help="override the configured output path")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--tol", type=float, help="override the configured tolerance")
    args = parser.parse_args(argv)
    try:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as ex:
            raise ConfigInvalid(f"cannot read config {args.config}: {ex}") from ex
        spec = parse_config(text)
        if args.out:
            spec = SweepSpec(spec.command, spec.inputs, spec.grid, args.out, spec.tol)
        if args.tol is not None:
            if not 0.0 < args.tol <= 1e-2:
                raise ConfigInvalid(f"tol: must be in (0, 1e-2], got {args.tol}")
            spec = SweepSpec(spec.command, spec.inputs, spec.grid,
                             spec.output_path, args.tol)
    except ConfigInvalid as ex:
        print(f"ConfigInvalid: {ex}", file=sys.stderr)
        return 2
    try:
        run(spec, workers=max(1, args.workers))
    except ConfigInvalid as ex:
        print(f"ConfigInvalid: {ex}", file=sys.stderr)
        return 2
    except EntrocapError as ex:
        print(f"{type(ex).__name__}: {ex}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
