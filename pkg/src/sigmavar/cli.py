"""Command-line driver: solve, sweep, verify, decompose.

A run is described by one INI-style configuration file with sections
``[run] [model] [grid] [solver] [solve] [sweep] [output] [verify]
[decompose]``; unknown sections or keys are rejected.  Individual keys can
be overridden with ``--set section.key=value``.  The configuration is
echoed into every output artifact, and identical configurations produce
byte-identical artifacts (set ``SOURCE_DATE_EPOCH`` to also pin the JSON
timestamp).  The exit status is 0 only if every requested computation
converged and every verification passed.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__, fock, gap
from .errors import ConfigurationError, ConstraintViolationError
from .kernel import HermitianKernel, check_quantum_constraint
from .lattice import build_grid
from .solver import (SolverOptions, VariationalProblem,
                     check_diagonal_optimality, check_offdiagonal_constraint,
                     minimize_constrained)

__all__ = ["RunConfig", "load_config", "cmd_solve", "cmd_sweep",
           "cmd_verify", "cmd_decompose", "main"]

CONFIG_DIR_ENV = "SIGMAVAR_CONFIG_DIR"

_COMMANDS = ("solve", "sweep", "verify", "decompose")
_FORMATS = ("csv", "json")
_FAULTS = ("none", "flip_sign")

# section -> key -> (parser, default); None default means "unset"
_SCHEMA = {
    "run": {"command": ("str", None), "seed": ("int", 0)},
    "model": {"mu": ("float", 1.0), "N": ("int", 1), "R2": ("float", None),
              "R2_list": ("str", None), "d": ("int", 3)},
    "grid": {"k_max": ("float", 20.0), "n_per_dim": ("int", 65),
             "include_zero": ("bool", True)},
    "solver": {"max_outer_iters": ("int", 40),
               "max_inner_iters": ("int", 3000),
               "feasibility_tol": ("float", 1e-8),
               "grad_tol": ("float", 1e-10),
               "penalty_growth": ("float", 10.0),
               "multistart_count": ("int", 1),
               "seed": ("int", 0),
               "cutoff_tail_correction": ("bool", True)},
    "solve": {"lambda_tol": ("float", 5e-3)},
    "output": {"path": ("str", None), "format": ("str", "csv"),
               "precision": ("int", 12)},
    "verify": {"eq16_states": ("int", 500), "eq16_modes": ("int", 3),
               "eq16_nmax": ("int", 3), "decompose_cases": ("int", 25),
               "perturbation_cases": ("int", 50),
               "quadrature_cases": ("int", 100),
               "oracle_nmax": ("int", 8), "oracle_restarts": ("int", 8),
               "inject_fault": ("str", "none")},
    "decompose": {"kernel_file": ("str", None), "n_max": ("int", 6),
                  "dump_state": ("str", None)},
}


def _parse_bool(raw: str, where: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigurationError(f"{where}: expected a boolean, got {raw!r}")


def _parse_value(kind: str, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError("non-finite")
            return val
        if kind == "bool":
            return _parse_bool(raw, where)
        return raw
    except ValueError as exc:
        raise ConfigurationError(
            f"{where}: cannot parse {raw!r} as {kind} ({exc})") from exc


@dataclass
class RunConfig:
    """Validated run configuration; ``values[section][key]`` holds settings."""

    command: str
    values: dict
    echo: dict = field(default_factory=dict)

    def get(self, section: str, key: str):
        return self.values[section][key]

    def solver_options(self) -> SolverOptions:
        s = self.values["solver"]
        return SolverOptions(
            max_outer_iters=s["max_outer_iters"],
            max_inner_iters=s["max_inner_iters"],
            feasibility_tol=s["feasibility_tol"],
            grad_tol=s["grad_tol"],
            penalty_growth=s["penalty_growth"],
            multistart_count=s["multistart_count"],
            seed=s["seed"],
            cutoff_tail_correction=s["cutoff_tail_correction"])

    def build_grid(self):
        g = self.values["grid"]
        return build_grid(2 if self.values["model"]["d"] == 3
                          else self.values["model"]["d"] - 1,
                          g["k_max"], g["n_per_dim"], g["include_zero"])

    def r2_list(self) -> list[float]:
        raw = self.values["model"]["R2_list"]
        if raw is None:
            raise ConfigurationError("model.R2_list is required for sweeps")
        return parse_r2_list(raw)


def parse_r2_list(raw: str) -> list[float]:
    """Comma-separated floats, or ``linspace:start:stop:count``."""
    raw = raw.strip()
    if raw.startswith("linspace:"):
        parts = raw.split(":")
        if len(parts) != 4:
            raise ConfigurationError(
                f"model.R2_list: expected linspace:start:stop:count, got {raw!r}")
        start = _parse_value("float", parts[1], "model.R2_list")
        stop = _parse_value("float", parts[2], "model.R2_list")
        count = _parse_value("int", parts[3], "model.R2_list")
        if count < 1:
            raise ConfigurationError("model.R2_list: count must be >= 1")
        return [float(x) for x in np.linspace(start, stop, count)]
    if not raw:
        return []
    return [_parse_value("float", tok, "model.R2_list")
            for tok in raw.split(",")]


def load_config(path: str | None, overrides: list[str] | None = None
                ) -> RunConfig:
    """Parse and strictly validate a configuration file plus overrides."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (model.N)
    if path is not None:
        resolved = path
        if not os.path.exists(resolved):
            base = os.environ.get(CONFIG_DIR_ENV)
            if base and not os.path.isabs(path):
                candidate = os.path.join(base, path)
                if os.path.exists(candidate):
                    resolved = candidate
        if not os.path.exists(resolved):
            raise ConfigurationError(f"config file not found: {path}")
        try:
            with open(resolved, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigurationError(f"config parse error: {exc}") from exc

    raw: dict[str, dict[str, str]] = {
        sec: dict(parser.items(sec)) for sec in parser.sections()}
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigurationError(
                f"--set expects section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        section, key = target.strip().split(".", 1)
        raw.setdefault(section.strip(), {})[key.strip()] = value

    values: dict[str, dict] = {}
    for section, keys in raw.items():
        if section not in _SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key in keys:
            if key not in _SCHEMA[section]:
                raise ConfigurationError(
                    f"unknown config key {section}.{key}")
    for section, schema in _SCHEMA.items():
        values[section] = {}
        for key, (kind, default) in schema.items():
            if section in raw and key in raw[section]:
                values[section][key] = _parse_value(
                    kind, raw[section][key], f"{section}.{key}")
            else:
                values[section][key] = default

    command = values["run"]["command"]
    if command not in _COMMANDS:
        raise ConfigurationError(
            f"run.command must be one of {_COMMANDS}, got {command!r}")
    if values["output"]["format"] not in _FORMATS:
        raise ConfigurationError(
            f"output.format must be one of {_FORMATS}")
    if values["verify"]["inject_fault"] not in _FAULTS:
        raise ConfigurationError(
            f"verify.inject_fault must be one of {_FAULTS}")
    if values["model"]["d"] not in (2, 3, 4):
        raise ConfigurationError("model.d must be 2, 3 or 4")
    if values["output"]["precision"] < 1:
        raise ConfigurationError("output.precision must be >= 1")

    echo = {f"{sec}.{key}": values[sec][key]
            for sec in sorted(values) for key in sorted(values[sec])
            if values[sec][key] is not None}
    return RunConfig(command=command, values=values, echo=echo)


# -- formatting and artifact writers -----------------------------------------

def _fmt(value, precision: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{precision}g}"
    if isinstance(value, gap.Phase):
        return value.value
    return str(value)


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.isoformat()


def _round_floats(obj, precision: int):
    if isinstance(obj, float):
        return float(f"{obj:.{precision}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, precision) for v in obj]
    if isinstance(obj, gap.Phase):
        return obj.value
    return obj


def write_csv(path: str, header, rows, config: RunConfig) -> None:
    precision = config.get("output", "precision")
    lines = [f"# {key} = {_fmt(val, precision)}"
             for key, val in config.echo.items()]
    lines.append(f"# version = {__version__}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v, precision) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path: str, payload: dict, config: RunConfig) -> None:
    precision = config.get("output", "precision")
    envelope = {
        "metadata": {
            "config_echo": {k: _round_floats(v, precision)
                            for k, v in config.echo.items()},
            "version": __version__,
            "timestamp": _timestamp(),
        },
    }
    envelope.update(_round_floats(payload, precision))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(envelope, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _emit(config: RunConfig, header, rows, payload: dict) -> None:
    path = config.get("output", "path")
    if path is None:
        return
    if config.get("output", "format") == "csv":
        write_csv(path, header, rows, config)
    else:
        write_json(path, payload, config)


# -- commands -----------------------------------------------------------------

@dataclass
class SolveReport:
    R2: float
    lambda_grid: float
    lambda_reference: float
    lambda_difference: float
    lambda_within_tol: bool
    energy_grid: float
    energy_reference: float
    condensate_grid: float
    condensate_reference: float
    phase_reference: str
    converged: bool
    iterations: int
    feasibility: float

    def ok(self) -> bool:
        return self.converged


def cmd_solve(config: RunConfig) -> SolveReport:
    """Solve one problem with the grid optimizer and the gap equation."""
    model = config.values["model"]
    if model["R2"] is None:
        raise ConfigurationError("model.R2 is required for solve")
    mu, n_comp, r2, d = model["mu"], model["N"], model["R2"], model["d"]

    grid = config.build_grid()
    problem = VariationalProblem(grid=grid, mu=mu, N=n_comp, R2=r2)
    sol = minimize_constrained(problem, config.solver_options())

    if d == 3:
        ref = gap.closed_form_2p1(mu, n_comp, r2)
    else:
        ref = gap.solve_gap(mu, n_comp, r2, d, grid.k_max if d == 4 else None)
    e_ref = gap.ground_state_energy(
        ref.lam, mu, n_comp, d, grid.k_max if d == 4 else None,
        condensate=ref.condensate_density)

    diff = abs(sol.lam - ref.lam)
    report = SolveReport(
        R2=r2, lambda_grid=sol.lam, lambda_reference=ref.lam,
        lambda_difference=diff,
        lambda_within_tol=diff <= config.get("solve", "lambda_tol"),
        energy_grid=sol.energy, energy_reference=e_ref,
        condensate_grid=sol.condensate_density,
        condensate_reference=ref.condensate_density,
        phase_reference=ref.phase.value, converged=sol.converged,
        iterations=sol.iterations, feasibility=sol.feasibility)

    row = dataclasses.asdict(report)
    _emit(config, list(row), [list(row.values())], {"report": row})
    return report


def cmd_sweep(config: RunConfig):
    """Phase sweep over model.R2_list, written as a CSV or JSON artifact."""
    model = config.values["model"]
    r2s = config.r2_list()
    if not r2s:
        raise ConfigurationError("sweep needs a non-empty model.R2_list")
    if config.get("output", "path") is None:
        raise ConfigurationError("sweep needs output.path")
    result = gap.phase_sweep(model["mu"], model["N"], model["d"], r2s,
                             k_max=(config.get("grid", "k_max")
                                    if model["d"] == 4 else None))
    rows = [[r.R2, r.lam, r.phase, r.condensate, r.energy, r.dE_dR2,
             r.residual] for r in result.rows]
    payload = {
        "rows": [dict(zip(gap.SWEEP_CSV_HEADER, row)) for row in rows],
        "diagnostics": result.diagnostics,
    }
    _emit(config, gap.SWEEP_CSV_HEADER, rows, payload)
    return result


@dataclass
class VerifySuite:
    name: str
    passed: bool
    worst_margin: float
    detail: str
    replay: dict = field(default_factory=dict)


@dataclass
class VerifyReport:
    suites: list

    def ok(self) -> bool:
        return all(s.passed for s in self.suites)


def _verify_quantum_constraint(config: RunConfig) -> VerifySuite:
    v = config.values["verify"]
    seed = config.get("run", "seed")
    basis = fock.enumerate_basis(v["eq16_modes"], v["eq16_nmax"], species=2)
    states = fock.sample_random_states(basis, v["eq16_states"], seed)
    worst = math.inf
    failing = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for idx, state in enumerate(states):
            a_kern, b_kern = fock.expectation_kernels(state)
            if v["inject_fault"] == "flip_sign" and idx == 0:
                a_kern = HermitianKernel.from_matrix(
                    a_kern.grid, -a_kern.entries)
            check = check_quantum_constraint(a_kern, b_kern, 1e-9)
            if check.min_eigenvalue < worst:
                worst = check.min_eigenvalue
                if not check.is_psd:
                    failing = {"seed": seed, "state_index": idx,
                               "modes": v["eq16_modes"],
                               "n_max": v["eq16_nmax"]}
    passed = failing is None
    return VerifySuite(
        name="quantum_constraint", passed=passed, worst_margin=worst,
        detail=(f"{len(states)} sampled states, min eigenvalue of "
                f"(1+A)-sqrt(1+B^2) = {worst:.3e}"
                + ("" if passed else
                   f"; FAILED at state seed={seed} index={failing['state_index']}")),
        replay=failing or {})


def _verify_decomposition(config: RunConfig) -> VerifySuite:
    v = config.values["verify"]
    rng = np.random.default_rng(config.get("run", "seed") + 1)
    worst = 0.0
    failing = None
    for case in range(v["decompose_cases"]):
        k = 1 + case % 3
        raw = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        kern = raw.conj().T @ raw
        kern *= rng.uniform(0.2, 1.5) / np.trace(kern).real
        _, residual = fock.decompose_kernel_to_state(kern, n_max=6)
        if residual > worst:
            worst = residual
            if residual > 1e-8:
                failing = {"seed": config.get("run", "seed") + 1,
                           "case": case, "modes": k}
    passed = failing is None
    return VerifySuite(
        name="kernel_decomposition", passed=passed, worst_margin=worst,
        detail=(f"{v['decompose_cases']} random PSD kernels, worst "
                f"round-trip residual = {worst:.3e}"),
        replay=failing or {})


def _verify_diagonality(config: RunConfig) -> VerifySuite:
    v = config.values["verify"]
    grid = build_grid(2, 6.0, 9, True)
    problem = VariationalProblem(grid=grid, mu=1.0, N=1, R2=0.02)
    sol = minimize_constrained(problem, config.solver_options())
    rng = np.random.default_rng(config.get("run", "seed") + 2)
    worst = math.inf
    for _ in range(v["perturbation_cases"]):
        i, j = rng.choice(grid.n_modes, size=2, replace=False)
        change = check_diagonal_optimality(sol, problem, (int(i), int(j)),
                                           1e-3)
        worst = min(worst, change)
    off = check_offdiagonal_constraint(sol, problem)
    passed = worst >= -1e-10 and off == 0.0 and sol.converged
    return VerifySuite(
        name="diagonal_optimality", passed=passed, worst_margin=worst,
        detail=(f"{v['perturbation_cases']} off-diagonal perturbations, "
                f"min objective change = {worst:.3e}; translation-invariance "
                f"violation = {off}"),
        replay={} if passed else {"seed": config.get("run", "seed") + 2})


def _verify_gap_quadrature(config: RunConfig) -> VerifySuite:
    v = config.values["verify"]
    rng = np.random.default_rng(config.get("run", "seed") + 3)
    worst = 0.0
    failing = None
    for case in range(v["quadrature_cases"]):
        mu = rng.uniform(0.1, 10.0)
        n_comp = int(rng.integers(1, 11))
        lam = rng.uniform(0.0, 0.999) * mu * mu
        closed = (n_comp * mu / (4 * math.pi)) * (
            1.0 - math.sqrt(1.0 - lam / mu ** 2))
        quadr = gap.gap_lhs_quadrature(lam, mu, n_comp, 3, 1e3 * mu)
        rel = abs(quadr - closed) / closed if closed else abs(quadr)
        if rel > worst:
            worst = rel
            if rel > 1e-6:
                failing = {"seed": config.get("run", "seed") + 3,
                           "case": case, "mu": mu, "N": n_comp, "lam": lam}
    passed = failing is None
    return VerifySuite(
        name="gap_quadrature", passed=passed, worst_margin=worst,
        detail=(f"{v['quadrature_cases']} random multipliers, worst relative "
                f"quadrature-vs-closed-form error = {worst:.3e}"),
        replay=failing or {})


def _verify_solver_vs_oracle(config: RunConfig) -> VerifySuite:
    v = config.values["verify"]
    seed = config.get("run", "seed") + 4
    opts = config.solver_options()
    opts.cutoff_tail_correction = False   # the toy grid is the exact problem
    worst = 0.0
    detail_parts = []
    passed = True
    cases = [(build_grid(2, 1.0, 1, True), 0.05),
             (build_grid(1, 1.0, 2, False), 0.05)]
    for grid, r2 in cases:
        problem = VariationalProblem(grid=grid, mu=1.0, N=1, R2=r2)
        sol = minimize_constrained(problem, opts)
        oracle = fock.brute_force_ground_state(
            grid, 1.0, 1, r2, n_max=v["oracle_nmax"],
            restarts=v["oracle_restarts"], seed=seed)
        bound = oracle.truncation_leak * (1.0 + abs(oracle.energy))
        rel = abs(oracle.energy - sol.energy) / max(abs(sol.energy), 1e-300)
        ok = rel <= 1e-4 + bound and sol.converged and oracle.converged
        passed = passed and ok
        worst = max(worst, rel)
        detail_parts.append(
            f"{grid.n_modes}-mode: rel gap {rel:.2e} (leak {oracle.truncation_leak:.1e})")
    return VerifySuite(
        name="solver_vs_oracle", passed=passed, worst_margin=worst,
        detail="; ".join(detail_parts),
        replay={} if passed else {"seed": seed})


def cmd_verify(config: RunConfig) -> VerifyReport:
    """Run the property suites and report pass/fail with worst-case margins."""
    suites = [
        _verify_quantum_constraint(config),
        _verify_decomposition(config),
        _verify_diagonality(config),
        _verify_gap_quadrature(config),
        _verify_solver_vs_oracle(config),
    ]
    report = VerifyReport(suites=suites)
    rows = [[s.name, "pass" if s.passed else "FAIL", s.worst_margin, s.detail]
            for s in suites]
    payload = {"suites": [dataclasses.asdict(s) for s in suites]}
    _emit(config, ("suite", "status", "worst_margin", "detail"), rows, payload)
    return report


@dataclass
class DecomposeReport:
    residual: float
    sector_weights: list
    eigenvalues: list
    trace: float
    feasible: bool

    def ok(self) -> bool:
        return self.feasible


def read_kernel_file(path: str) -> np.ndarray:
    """JSON kernel files hold {"size": n, "entries": [[re, im], ...]} row-major."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "size" not in data or "entries" not in data:
        raise ConfigurationError(
            f"{path}: kernel file needs 'size' and 'entries' fields")
    size = int(data["size"])
    entries = data["entries"]
    if len(entries) != size * size:
        raise ConfigurationError(
            f"{path}: expected {size * size} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries])
    return flat.reshape(size, size)


def cmd_decompose(config: RunConfig, kernel_file: str | None = None
                  ) -> DecomposeReport:
    """Decompose a PSD kernel file into a Fock state and report the residual."""
    path = kernel_file or config.get("decompose", "kernel_file")
    if path is None:
        raise ConfigurationError("decompose needs decompose.kernel_file")
    matrix = read_kernel_file(path)
    n_max = config.get("decompose", "n_max")

    evals = np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
    state, residual = fock.decompose_kernel_to_state(matrix, n_max=n_max)

    trace = float(np.trace(matrix).real)
    feasible = residual <= 1e-8 * max(1.0, float(np.linalg.norm(matrix)))
    report = DecomposeReport(
        residual=residual,
        sector_weights=[float(w) for w in state.sector_weights()],
        eigenvalues=[float(e) for e in evals],
        trace=trace, feasible=feasible)

    dump = config.get("decompose", "dump_state")
    if dump is not None:
        with open(dump, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(state.to_json_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    row = {"residual": residual, "trace": trace, "feasible": feasible,
           "sector_weights": report.sector_weights,
           "eigenvalues": report.eigenvalues}
    _emit(config, ("residual", "trace", "feasible"),
          [[residual, trace, feasible]], {"report": row})
    return report


# -- entry point ---------------------------------------------------------------

def _print_report(report, precision: int) -> None:
    if isinstance(report, VerifyReport):
        for s in report.suites:
            status = "PASS" if s.passed else "FAIL"
            print(f"{status} {s.name}: {s.detail}")
            if not s.passed and s.replay:
                print(f"  replay: {json.dumps(s.replay, sort_keys=True)}")
        return
    if isinstance(report, gap.SweepResult):
        print(f"sweep: {len(report.rows)} rows", end="")
        diag = report.diagnostics
        if diag.get("transition_index") is not None:
            print(f"; transition at R2 = {_fmt(diag['R2_critical'], precision)}"
                  f" slope_left = {_fmt(diag['slope_left'], precision)}"
                  f" slope_right = {_fmt(diag['slope_right'], precision)}")
        else:
            print()
        return
    for key, value in dataclasses.asdict(report).items():
        print(f"{key} = {_fmt(value, precision) if not isinstance(value, list) else value}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sigmavar",
        description="Variational ground states of the soft-constraint "
                    "O(N) sigma model")
    parser.add_argument("command", choices=_COMMANDS)
    parser.add_argument("--config", help="path to the INI configuration file")
    parser.add_argument("--out", help="override output.path")
    parser.add_argument("--format", choices=_FORMATS,
                        help="override output.format")
    parser.add_argument("--seed", type=int, help="override run.seed")
    parser.add_argument("--set", action="append", default=[], dest="sets",
                        metavar="SECTION.KEY=VALUE",
                        help="override one configuration key")
    parser.add_argument("--kernel", help="kernel file for decompose")
    args = parser.parse_args(argv)

    overrides = [f"run.command={args.command}"] + list(args.sets)
    if args.out is not None:
        overrides.append(f"output.path={args.out}")
    if args.format is not None:
        overrides.append(f"output.format={args.format}")
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")

    try:
        config = load_config(args.config, overrides)
        precision = config.get("output", "precision")
        if config.command == "solve":
            report = cmd_solve(config)
        elif config.command == "sweep":
            report = cmd_sweep(config)
        elif config.command == "verify":
            report = cmd_verify(config)
        else:
            report = cmd_decompose(config, args.kernel)
    except (ConfigurationError, ConstraintViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    _print_report(report, precision)
    if isinstance(report, gap.SweepResult):
        return 0
    return 0 if report.ok() else 1


if __name__ == "__main__":
    sys.exit(main())
