"""Command-line driver: ``spectra-inv <command> --config <path>``.

Commands
--------
eig         forward spectrum of a potential: spectrum CSV + eigenfunction CSVs
solve-np    one solution of the cubic boundary value problem: CSV + JSON
invert      eigenvalue placement by both routes, with optimality residuals
nodal-scan  multiplicity table over a grid of spectral levels
check       the full acceptance battery, pass/fail JSON

Configs are JSON documents; unknown keys are rejected, ``grid_n`` defaults
to 2000 and ``alpha`` to 0.  Outputs are deterministic given the seed (CSV
in full double precision, JSON with sorted keys), so runs can serve as
byte-comparable regression baselines.

Exit codes: 0 all requested assertions passed, 1 an assertion or solver
check failed, 2 malformed configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import acceptance
from .core import (
    Potential,
    as_angle,
    make_grid,
    preset_potential,
    potential_from_csv,
    save_csv,
)
from .eigen import eigenvalue, spectrum
from .inverse import solve_direct, solve_explicit, optimality_residual, save_result
from .nonlinear import (
    MissingBranchError,
    NonlinearSolution,
    find_solution,
    multiplicity_scan,
)

COMMANDS = ("eig", "solve-np", "invert", "nodal-scan", "check")

_COMMON_KEYS = {"command", "potential", "alpha", "grid_n", "seed", "out_dir"}
_SCHEMAS: dict[str, dict] = {
    "eig": {"required": {"potential"}, "allowed": _COMMON_KEYS | {"k_max"}},
    "solve-np": {
        "required": {"potential", "k", "lambda", "delta"},
        "allowed": _COMMON_KEYS | {"k", "lambda", "delta"},
    },
    "invert": {
        "required": {"potential", "k", "lambda"},
        "allowed": _COMMON_KEYS | {"k", "lambda"},
    },
    "nodal-scan": {
        "required": {"potential"},
        "allowed": _COMMON_KEYS | {"lambda", "lambda_grid", "l_max"},
    },
    "check": {"required": set(), "allowed": {"command", "grid_n", "out_dir"}},
}


class ConfigError(ValueError):
    """Malformed run configuration (exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    potential: dict | None
    alpha: float
    grid_n: int
    seed: int | None
    out_dir: str
    k: int | None = None
    lam: float | None = None
    delta: int | None = None
    k_max: int = 5
    l_max: int = 5
    lambda_grid: tuple | None = None


def parse_config(path, command: str | None = None) -> RunConfig:
    """Load and validate a JSON run configuration.

    ``command`` (from the command line) takes precedence; a ``command`` key
    in the file must agree with it.  Unknown keys are rejected with the
    offending name.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top-level JSON object expected")

    cmd = command or raw.get("command")
    if cmd is None:
        raise ConfigError("no command given (CLI argument or 'command' key)")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}; valid: {COMMANDS}")
    if "command" in raw and command is not None and raw["command"] != command:
        raise ConfigError(
            f"config says command={raw['command']!r} but {command!r} was requested"
        )

    schema = _SCHEMAS[cmd]
    for key in raw:
        if key not in schema["allowed"]:
            raise ConfigError(f"unknown key {key!r} for command {cmd!r}")
    missing = schema["required"] - raw.keys()
    if missing:
        raise ConfigError(f"missing required keys for {cmd!r}: {sorted(missing)}")

    grid_n = raw.get("grid_n", 2000)
    if not isinstance(grid_n, int) or grid_n < 16:
        raise ConfigError(f"grid_n must be an integer >= 16, got {grid_n!r}")
    alpha = float(raw.get("alpha", 0.0))
    seed = raw.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")

    pot = raw.get("potential")
    if pot is not None:
        if not isinstance(pot, dict) or ("preset" not in pot) == ("csv" not in pot):
            raise ConfigError(
                "potential must be an object with either 'preset' (+'params') or 'csv'"
            )
        if "csv" in pot and not Path(pot["csv"]).exists():
            raise ConfigError(f"potential CSV not found: {pot['csv']}")

    lam_grid = raw.get("lambda_grid")
    if lam_grid is not None:
        if not isinstance(lam_grid, list) or not lam_grid:
            raise ConfigError("lambda_grid must be a non-empty list of reals")
        lam_grid = tuple(float(v) for v in lam_grid)
    if cmd == "nodal-scan" and lam_grid is None and "lambda" not in raw:
        raise ConfigError("nodal-scan needs 'lambda' or 'lambda_grid'")

    delta = raw.get("delta")
    if delta is not None and delta not in (-1, 1):
        raise ConfigError(f"delta must be -1 or +1, got {delta!r}")

    return RunConfig(
        command=cmd,
        potential=pot,
        alpha=alpha,
        grid_n=grid_n,
        seed=seed,
        out_dir=str(raw.get("out_dir", "out")),
        k=raw.get("k"),
        lam=float(raw["lambda"]) if "lambda" in raw else None,
        delta=delta,
        k_max=int(raw.get("k_max", 5)),
        l_max=int(raw.get("l_max", 5)),
        lambda_grid=lam_grid,
    )


def _build_potential(cfg: RunConfig) -> Potential:
    grid = make_grid(cfg.grid_n)
    spec = cfg.potential
    if "csv" in spec:
        return potential_from_csv(spec["csv"], grid)
    name = spec["preset"]
    params = spec.get("params", [])
    try:
        return preset_potential(name, params, grid, seed=cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n",
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------


def _run_eig(cfg: RunConfig, out: Path) -> int:
    q = _build_potential(cfg)
    pairs = spectrum(q, cfg.alpha, cfg.k_max)
    lines = ["k,lambda"]
    for ep in pairs:
        lines.append(f"{ep.k},{ep.lam:.17g}")
        save_csv(ep.phi, out / f"phi_{ep.k}.csv")
    (out / "spectrum.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_json(
        out / "eig.json",
        {
            "potential": q.label,
            "alpha": cfg.alpha,
            "grid_n": cfg.grid_n,
            "eigenvalues": [ep.lam for ep in pairs],
            "node_counts": [ep.node_count for ep in pairs],
            "residuals": [ep.residual for ep in pairs],
        },
    )
    return 0


def _run_solve_np(cfg: RunConfig, out: Path) -> int:
    q0 = _build_potential(cfg)
    sol = find_solution(q0, cfg.lam, cfg.delta, cfg.k, cfg.alpha)
    if isinstance(sol, NonlinearSolution):
        save_csv(sol.u, out / "u_hat.csv")
        _write_json(out / "solution.json", sol.summary())
        return 0
    _write_json(out / "solution.json", sol.summary())
    print(
        f"no solution with {cfg.k - 1} interior zeros found "
        f"(scanned s in [{sol.s_min:g}, {sol.s_max:g}])",
        file=sys.stderr,
    )
    return 1


def _run_invert(cfg: RunConfig, out: Path) -> int:
    q0 = _build_potential(cfg)
    res_e = solve_explicit(q0, cfg.k, cfg.lam, cfg.alpha)
    res_d = solve_direct(q0, cfg.k, cfg.lam, cfg.alpha)
    save_result(res_e, out, q0=q0, alpha=cfg.alpha, prefix="explicit_")
    save_result(res_d, out, q0=q0, alpha=cfg.alpha, prefix="direct_")
    payload = {
        "explicit": res_e.summary(),
        "direct": res_d.summary(),
    }
    if res_e.delta != 0:
        payload["optimality_residual_explicit"] = optimality_residual(q0, res_e, cfg.alpha)
        payload["optimality_residual_direct"] = optimality_residual(q0, res_d, cfg.alpha)
    _write_json(out / "invert.json", payload)
    ok = (
        res_e.diagnostics["feasibility"] <= 1e-6
        and res_d.diagnostics["feasibility"] <= 1e-6
    )
    if not ok:
        print("placement feasibility check failed", file=sys.stderr)
    return 0 if ok else 1


def _run_nodal_scan(cfg: RunConfig, out: Path) -> int:
    q0 = _build_potential(cfg)
    lams = cfg.lambda_grid if cfg.lambda_grid is not None else (cfg.lam,)
    rows = ["lambda,delta,node_count,shoot_param,sup_norm,l2_norm,residual"]
    summary = []
    failed = False
    for lam in lams:
        try:
            sols = multiplicity_scan(q0, lam, cfg.alpha, cfg.l_max)
            gaps = []
        except MissingBranchError as exc:
            sols, gaps, failed = exc.found, exc.gaps, True
        except ValueError as exc:
            print(f"lambda={lam}: {exc}", file=sys.stderr)
            failed = True
            summary.append({"lambda": lam, "error": str(exc)})
            continue
        for s in sols:
            rows.append(
                f"{lam:.17g},{s.delta},{s.node_count},{s.shoot_param:.17g},"
                f"{np.max(np.abs(s.u.values)):.17g},"
                f"{np.sqrt(max(0.0, np.trapezoid(s.u.values**2, s.u.grid.nodes))):.17g},"
                f"{s.residual:.17g}"
            )
        summary.append(
            {
                "lambda": lam,
                "found_node_counts": sorted(
                    {(s.delta, s.node_count) for s in sols},
                ),
                "missing_branches": gaps,
            }
        )
    (out / "multiplicity.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    _write_json(out / "nodal_scan.json", {"levels": summary, "l_max": cfg.l_max})
    if failed:
        print("one or more solution branches missing", file=sys.stderr)
    return 1 if failed else 0


def _run_check(cfg: RunConfig, out: Path) -> int:
    results = acceptance.run_all(grid_n=cfg.grid_n)
    payload = {
        "grid_n": cfg.grid_n,
        "all_passed": all(r.passed for r in results),
        "criteria": [
            {"name": r.name, "passed": r.passed, "details": r.details} for r in results
        ],
    }
    _write_json(out / "check_report.json", payload)
    return 0 if payload["all_passed"] else 1


_RUNNERS = {
    "eig": _run_eig,
    "solve-np": _run_solve_np,
    "invert": _run_invert,
    "nodal-scan": _run_nodal_scan,
    "check": _run_check,
}


def run(cfg: RunConfig) -> int:
    """Execute a validated configuration; returns the process exit code."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[cfg.command](cfg, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spectra-inv",
        description="Sturm-Liouville spectra on (0, pi): forward solves, cubic "
        "nonlinear boundary value problems, and inverse eigenvalue placement.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="seed (overrides config)")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config, command=args.command)
        if args.out is not None:
            cfg = RunConfig(**{**cfg.__dict__, "out_dir": args.out})
        if args.seed is not None:
            cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver-level failure: report, exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
