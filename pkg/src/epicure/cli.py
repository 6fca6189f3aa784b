"""``epicure`` command line: run one analysis on a scenario file.

Every command writes ``result.json`` into the output directory, plus CSV side
files where the result is tabular. Failures print a JSON error object on
stderr and exit nonzero (2 for bad input, 1 for numerical failures).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Callable

from . import __version__
from .dynamics import ControlEffort, effective_spreading_rate, integrate, trajectory_csv, _fmt
from .equilibrium import TOL_MARGINAL, classify, steady_state
from .errors import EpicureError, InfeasibleRegime, ParseError, ValidationError
from .optimizer import objective, solve_disease_free, solve_exclusive, solve_global
from .scenarios import (
    SCHEMA_VERSION,
    Scenario,
    build_network,
    bundled_names,
    bundled_scenario,
    cross_apply,
    geometric_values,
    grid_values,
    load_scenario,
    scenario_from_dict,
)
from .switching import symmetric_sweep

__all__ = ["COMMANDS", "dispatch", "main", "load_result", "parse_grid"]


def write_atomic(path: Path, text: str) -> None:
    """Write ``text`` with LF line endings via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_grid(text: str) -> dict:
    """``"a:b:n"`` to ``{"start": a, "stop": b, "num": n}``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ParseError(f"--grid: expected a:b:n, got {text!r}")
    try:
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(f"--grid: expected a:b:n with numeric a, b and integer n, got {text!r}") from None
    if num < 1:
        raise ValidationError("--grid: n >= 1")
    return {"start": start, "stop": stop, "num": num}


def _control(sc: Scenario) -> ControlEffort:
    ctl = sc.options.get("control", {})
    return ControlEffort(float(ctl.get("u1", 0.0)), float(ctl.get("u2", 0.0)))


def _need_pmf(sc: Scenario, command: str) -> None:
    if sc.moments_only:
        raise ValidationError(
            f"{command} needs a full degree distribution; this scenario only gives moments"
        )


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _zeta_grid(sc: Scenario, grid: dict | None) -> list[float] | None:
    spec = grid or sc.options.get("grid")
    return grid_values(spec) if spec else None


def _cmd_simulate(sc, grid, tol):
    run = integrate(
        sc.network,
        sc.params,
        _control(sc),
        dt=float(sc.options.get("dt", 0.01)),
        t_end=float(sc.options.get("t_end", 5000.0)),
        sample_every=float(sc.options.get("sample_every", 1.0)),
    )
    obs = run.observables
    result = {
        "settled": run.settled,
        "t": run.t,
        "steps": run.steps,
        "max_clamp": run.max_clamp,
        "theta1": obs.theta1,
        "theta2": obs.theta2,
        "ibar1": obs.ibar1,
        "ibar2": obs.ibar2,
    }
    return result, {"trajectory.csv": trajectory_csv(run.trajectory)}


def _cmd_classify(sc, grid, tol):
    control = _control(sc)
    cls = classify(sc.network, sc.params, control, tol_marginal=tol)
    psi1, psi2 = effective_spreading_rate(sc.params, control)
    result = {
        "class": str(cls.tag),
        "label": cls.tag.label,
        "t1": cls.t1,
        "t2": cls.t2,
        "psi1": psi1,
        "psi2": psi2,
        "margin_flag": cls.margin_flag,
    }
    return result, {}


def _cmd_steady_state(sc, grid, tol):
    eq = steady_state(sc.network, sc.params, _control(sc), tol_marginal=tol)
    return eq.to_dict(densities=True), {}


def _cmd_solve_free(sc, grid, tol):
    zetas = _zeta_grid(sc, grid)
    if zetas is None:
        u = solve_disease_free(sc.network, sc.params)
        value, eq = objective(sc.network, sc.params, sc.cost, u)
        return {"control": u.to_dict(), "objective": value, "equilibrium": eq.to_dict()}, {}
    rows = []
    for z in zetas:
        params = sc.with_params(zeta1=z, zeta2=z).params
        u = solve_disease_free(sc.network, params)
        value, _ = objective(sc.network, params, sc.cost, u)
        rows.append([z, u.u1, u.u2, value])
    csv_text = _csv(["zeta", "u1", "u2", "objective"], rows)
    return {"grid": "zeta1 = zeta2 = zeta", "rows": len(rows)}, {"solve_free.csv": csv_text}


def _strains(sc: Scenario) -> list[int]:
    return [int(sc.options["strain"])] if "strain" in sc.options else [1, 2]


def _cmd_solve_exclusive(sc, grid, tol):
    _need_pmf(sc, "solve-exclusive")
    zetas = _zeta_grid(sc, grid)
    result: dict = {}
    files: dict = {}
    for strain in _strains(sc):
        key = f"strain{strain}"
        if zetas is None:
            try:
                res = solve_exclusive(sc.network, sc.params, sc.cost, strain)
            except InfeasibleRegime as exc:
                result[key] = {"skipped": str(exc)}
                continue
            result[key] = {
                "control": res.control.to_dict(),
                "objective": res.objective,
                "iterations": res.iterations,
                "region": res.region.to_dict(),
            }
            files[f"trace_{key}.csv"] = res.trace_csv()
            continue
        rows, skipped = [], []
        for z in zetas:
            params = sc.with_params(zeta1=z, zeta2=z).params
            try:
                res = solve_exclusive(sc.network, params, sc.cost, strain)
            except InfeasibleRegime:
                skipped.append(z)
                continue
            rows.append([z, res.control.u1, res.control.u2, res.objective])
        result[key] = {"rows": len(rows), "infeasible_zeta": skipped}
        files[f"exclusive_{key}.csv"] = _csv(["zeta", "u1", "u2", "objective"], rows)
    return result, files


def _cmd_solve_global(sc, grid, tol):
    _need_pmf(sc, "solve-global")
    zetas = _zeta_grid(sc, grid)
    if zetas is None:
        return solve_global(sc.network, sc.params, sc.cost).to_dict(), {}
    rows = []
    for z in zetas:
        params = sc.with_params(zeta1=z, zeta2=z).params
        sol = solve_global(sc.network, params, sc.cost)
        rows.append([z, sol.control.u1, sol.control.u2, sol.objective, str(sol.regime)])
    csv_text = _csv(["zeta", "u1", "u2", "objective", "regime"], rows)
    return {"grid": "zeta1 = zeta2 = zeta", "rows": len(rows)}, {"global.csv": csv_text}


def _cmd_sweep(sc, grid, tol):
    _need_pmf(sc, "sweep")
    spec = grid or sc.options.get("scale_grid") or {"start": 10.0, "stop": 1e-3, "num": 61}
    scales = geometric_values(spec)
    profile = symmetric_sweep(sc.network, sc.params, sc.cost, scales)
    result = {
        "pattern": profile.pattern.to_dict() if profile.pattern else None,
        "regimes": [str(r) for r in profile.regimes],
        **profile.transitions_dict(),
    }
    files = {"profile.csv": profile.to_csv(), "transitions.json": profile.transitions_json() + "\n"}
    return result, files


def _cmd_cross_apply(sc, grid, tol):
    if "compare_network" not in sc.options:
        raise ValidationError("cross-apply needs options.compare_network")
    other = build_network(sc.options["compare_network"], "options.compare_network")
    return cross_apply(sc.network, other, sc.params).to_dict(), {}


COMMANDS: dict[str, Callable] = {
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "steady-state": _cmd_steady_state,
    "solve-free": _cmd_solve_free,
    "solve-exclusive": _cmd_solve_exclusive,
    "solve-global": _cmd_solve_global,
    "sweep": _cmd_sweep,
    "cross-apply": _cmd_cross_apply,
}


def _error_doc(exc: BaseException) -> dict:
    return {"error": type(exc).__name__, "message": str(exc)}


def _exit_code(exc: BaseException) -> int:
    return 2 if isinstance(exc, (ParseError, ValidationError)) else 1


def dispatch(
    command: str,
    scenario: Scenario,
    output_path: str | Path,
    *,
    grid: dict | None = None,
    tol: float | None = None,
    stderr=None,
) -> int:
    """Run ``command`` on ``scenario`` and write results under ``output_path``.

    Returns the process exit status.
    """
    stderr = stderr or sys.stderr
    out = Path(output_path)
    try:
        if command not in COMMANDS:
            raise ValidationError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        out.mkdir(parents=True, exist_ok=True)
        result, files = COMMANDS[command](scenario, grid, TOL_MARGINAL if tol is None else tol)
    except (EpicureError, ValueError, ZeroDivisionError, ArithmeticError) as exc:
        print(json.dumps(_error_doc(exc)), file=stderr)
        return _exit_code(exc)
    doc = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "scenario": scenario.to_dict(),
        "result": result,
        "files": sorted(files),
    }
    for name, text in sorted(files.items()):
        write_atomic(out / name, text)
    write_atomic(out / "result.json", json.dumps(doc, indent=2) + "\n")
    return 0


def load_result(path: str | Path) -> dict:
    """Read a ``result.json`` back and re-validate its embedded scenario."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("result: expected a JSON object")
    for key in ("schema", "command", "scenario", "result", "files"):
        if key not in doc:
            raise ParseError(f"result.{key}: missing")
    if doc["schema"] != SCHEMA_VERSION:
        raise ParseError(f"result.schema: unsupported version {doc['schema']!r}")
    if doc["command"] not in COMMANDS:
        raise ValidationError(f"result.command: unknown command {doc['command']!r}")
    scenario_from_dict(doc["scenario"])
    return doc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epicure",
        description="Optimal curing of two competing SIS strains on a degree-based mean-field network.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=list(COMMANDS), help="analysis to run")
    parser.add_argument(
        "--scenario",
        required=True,
        help=f"scenario JSON file, or a bundled name ({', '.join(bundled_names())})",
    )
    parser.add_argument("--out", default=".", help="output directory (default: current directory)")
    parser.add_argument(
        "--grid",
        help="a:b:n; zeta grid (zeta1 = zeta2) for solve-*, geometric cost-scale grid for sweep",
    )
    parser.add_argument("--seed", type=int, help="regenerate a 'ba' network with this seed")
    parser.add_argument("--tol", type=float, help="marginal band for classify and steady-state")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if not os.path.exists(args.scenario) and args.scenario in bundled_names():
            scenario = bundled_scenario(args.scenario)
        else:
            scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario = scenario.with_seed(args.seed)
        grid = parse_grid(args.grid) if args.grid else None
        if args.tol is not None and not args.tol > 0:
            raise ValidationError("--tol > 0")
    except (EpicureError, ValueError) as exc:
        print(json.dumps(_error_doc(exc)), file=sys.stderr)
        return _exit_code(exc)
    return dispatch(args.command, scenario, args.out, grid=grid, tol=args.tol)


if __name__ == "__main__":
    sys.exit(main())
