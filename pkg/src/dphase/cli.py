"""Configuration parsing, command orchestration, and result serialization.

Config files are JSON trees; exponent fields are given as one of three
analytic kinds (constant, affine, sinusoidal), weights as gaussian or
constant formulas.  All randomness in a run flows from the single seed in
the solver block (overridable with --seed), so identical invocations produce
bit-identical report files.

Commands:
    dphase validate     --config cfg.json [--out dir]
    dphase check-spaces --config cfg.json [--trials N] [--seed S] [--out dir]
    dphase solve        --config cfg.json --mode {min,mp,signed,sweep} ...
    dphase energy       --config cfg.json --input field.csv [--out dir]

Exit codes: 0 success, 1 validation/battery failure, 2 iteration cap,
3 geometry error, 4 sign violation, 64 config parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from dphase import _kernels
from dphase.exponents import ExponentField
from dphase.functional import ProblemSpec, energy, residual, residual_norm
from dphase.grid import Grid, GridFunction, cone_function
from dphase.operator import (NonlinearitySpec, PotentialSpec, WeightField,
                             check_ar_condition, check_flux_consistency,
                             check_growth_sandwich, check_structural_s,
                             check_uniform_convexity)
from dphase.solvers import (SolverOptions, SolverReport, minimize,
                            mountain_pass, multi_solution_sweep,
                            solve_sign_definite)
from dphase import spaces

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 64


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config parsing


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return cfg


def _build_exponent(grid: Grid, spec: dict, name: str) -> ExponentField:
    kind = spec.get("kind", "constant")
    if kind == "constant":
        return ExponentField.constant(grid, float(spec["value"]))
    if kind == "affine":
        slopes = spec.get("slopes", [0.0] * grid.dim)
        return ExponentField.affine(grid, float(spec["value"]), slopes)
    if kind == "sinusoidal":
        return ExponentField.sinusoidal(
            grid, float(spec["value"]), float(spec.get("amplitude", 0.0)),
            float(spec.get("frequency", 1.0)), int(spec.get("axis", 0)))
    raise ConfigError(f"exponent {name}: unknown kind {kind!r}")


def _build_weight(grid: Grid, spec: dict, name: str) -> WeightField:
    kind = spec.get("kind", "gaussian")
    if kind == "gaussian":
        return WeightField.gaussian(grid, float(spec.get("scale", 1.0)))
    if kind == "constant":
        return WeightField.constant(grid, float(spec.get("value", 1.0)))
    raise ConfigError(f"weight {name}: unknown kind {kind!r}")


def build_problem(cfg: dict, radius_override: float = None,
                  nodes_override: int = None) -> ProblemSpec:
    try:
        dom = cfg["domain"]
        grid = Grid(
            dim=int(dom.get("dim", 1)),
            radius=float(radius_override or dom["radius"]),
            nodes_per_axis=int(nodes_override or dom["nodes_per_axis"]),
        )
        exps = cfg["exponents"]
        fields = {name: _build_exponent(grid, exps[name], name)
                  for name in ("p", "q", "alpha", "delta", "gamma",
                               "s", "r", "r_star")}
        pot_cfg = cfg.get("potential", {"kind": "typical"})
        kind = pot_cfg.get("kind", "typical")
        a_coef = b_coef = None
        if "a_coef" in pot_cfg:
            a_coef = _build_weight(grid, pot_cfg["a_coef"], "a_coef")
        if "b_coef" in pot_cfg:
            b_coef = _build_weight(grid, pot_cfg["b_coef"], "b_coef")
        potential = PotentialSpec(kind=kind, p=fields["p"], q=fields["q"],
                                  a_coef=a_coef, b_coef=b_coef)
        weights = cfg.get("weights", {})
        a_w = _build_weight(grid, weights.get("a", {}), "a")
        w_w = _build_weight(grid, weights.get("w", {}), "w")
        scalars = cfg.get("scalars", {})
        nl = NonlinearitySpec(
            lam=float(scalars.get("lambda", 0.0)),
            mu=float(scalars.get("mu", 0.0)),
            a_weight=a_w, w_weight=w_w,
            delta=fields["delta"], gamma=fields["gamma"],
            theta=float(scalars.get("theta", 3.0)),
        )
        problem = ProblemSpec(
            grid=grid, potential=potential, alpha=fields["alpha"],
            nonlinearity=nl, s_field=fields["s"], r_field=fields["r"],
            r_star_field=fields["r_star"],
            ambient_dim=int(dom.get("ambient_dim", 3)),
            disabled_checks=tuple(cfg.get("validation", {})
                                  .get("disabled_checks", ())),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"config error: {e}") from e
    problem.validate()
    return problem


def solver_options(cfg: dict, seed_override=None) -> SolverOptions:
    s = cfg.get("solver", {})
    seed = int(seed_override if seed_override is not None
               else s.get("seed", 0))
    return SolverOptions(
        tol=float(s.get("tol", 1e-6)),
        max_iter=int(s.get("max_iter", 200000)),
        path_nodes=int(s.get("path_nodes", 25)),
        max_outer=int(s.get("max_outer", 3000)),
        polish_max=int(s.get("polish_max", 100000)),
        dedup_tol=float(s.get("dedup_tol", 1e-3)),
        seed=seed,
        trace_every=int(s.get("trace_every", 100)),
    )


# ---------------------------------------------------------------------------
# output helpers


def _write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_trace(path: Path, trace):
    lines = ["iteration,energy,residual_norm,ps_quantity"]
    for it, e, rn, ps in trace:
        lines.append(f"{it},{float(e)!r},{float(rn)!r},{float(ps)!r}")
    path.write_text("\n".join(lines) + "\n")


def _write_solver_outputs(outdir: Path, reports: list[SolverReport]):
    outdir.mkdir(parents=True, exist_ok=True)
    summary = []
    for k, rep in enumerate(reports):
        (outdir / f"solution_{k}.csv").write_text(rep.solution.to_csv())
        _write_trace(outdir / f"trace_{k}.csv", rep.trace)
        obj = rep.to_json_obj()
        obj["solution_file"] = f"solution_{k}.csv"
        obj["trace_file"] = f"trace_{k}.csv"
        summary.append(obj)
    return summary


# ---------------------------------------------------------------------------
# commands


def cmd_validate(cfg: dict, outdir: Path) -> int:
    problem = build_problem(cfg)
    report = problem.validation
    obj = report.to_json_obj()
    obj["backend"] = _kernels.BACKEND
    _write_json(outdir / "report.json", obj)
    return EXIT_OK if report.overall_pass else EXIT_FAIL


def cmd_check_spaces(cfg: dict, outdir: Path, trials: int, seed: int) -> int:
    problem = build_problem(cfg)
    grid = problem.grid
    rng = np.random.default_rng(seed)
    p = problem.potential.p
    q = problem.potential.q
    alpha = problem.alpha

    def scaled(k):
        return max(trials // k, 1) if trials else 0

    batteries = [
        spaces.battery_norm_modular(grid, p, trials, rng),
        spaces.battery_holder(grid, p, trials, rng),
        spaces.battery_sum_sandwich(grid, p, q, scaled(10), rng),
    ]
    if np.min(q.values - p.values) > 0:
        batteries.append(spaces.battery_interpolation(
            grid, _midpoint_field(p, q), p, q, scaled(5), rng))
    else:
        batteries.append(spaces.BatteryResult(
            "interpolation_inequality", 0, 0, 0.0,
            note="skipped: needs p strictly below q on the grid"))
    brute_grid = Grid(1, 1.0, 7)
    pb = ExponentField.constant(brute_grid, p.inf_val)
    qb = ExponentField.constant(brute_grid, q.sup_val)
    batteries.append(spaces.battery_sum_brute(
        brute_grid, pb, qb, min(scaled(50), 20), rng))

    structural = [
        check_growth_sandwich(problem.potential, 10000,
                              np.random.default_rng(seed + 1)),
        check_flux_consistency(problem.potential, 400,
                               np.random.default_rng(seed + 2)),
        check_structural_s(problem.potential, problem.s_field, 10000,
                           np.random.default_rng(seed + 3)),
        check_uniform_convexity(problem.potential, (0.1, 0.3, 0.5), 10000,
                                np.random.default_rng(seed + 4)),
        check_ar_condition(problem.nonlinearity, 10000,
                           np.random.default_rng(seed + 5)),
    ]

    if trials == 0:
        note = "zero trials requested: vacuous pass"
    else:
        note = ""
    obj = {
        "backend": _kernels.BACKEND,
        "seed": seed,
        "trials": trials,
        "note": note,
        "batteries": [b.to_json_obj() for b in batteries],
        "structural_checks": [c.to_json_obj() for c in structural],
    }
    _write_json(outdir / "report.json", obj)
    ok = all(b.failures == 0 for b in batteries) and all(
        c.passed for c in structural)
    return EXIT_OK if ok else EXIT_FAIL


def _midpoint_field(p: ExponentField, q: ExponentField) -> ExponentField:
    return ExponentField(p.grid, 0.5 * (p.values + q.values))


def cmd_solve(cfg: dict, outdir: Path, mode: str, seed: int) -> int:
    problem = build_problem(cfg)
    if not problem.validation.overall_pass:
        obj = problem.validation.to_json_obj()
        _write_json(outdir / "report.json", obj)
        return EXIT_FAIL
    opts = solver_options(cfg, seed_override=seed)
    grid = problem.grid
    rng = np.random.default_rng(opts.seed)
    reports: list[SolverReport] = []

    if mode == "min":
        seed_field = cone_function(np.zeros(grid.dim), 0.45 * grid.radius, grid)
        u0 = _negative_energy_start(problem, seed_field)
        reports = [minimize(problem, u0, opts)]
    elif mode == "mp":
        seed_field = cone_function(np.zeros(grid.dim), 0.45 * grid.radius, grid)
        reports = [mountain_pass(problem, seed_field, opts.path_nodes, opts)]
    elif mode == "signed":
        for sign in ("+", "-"):
            res = solve_sign_definite(problem, sign, opts, rng)
            reports.extend([res.high, res.low])
    elif mode == "sweep":
        n_starts = int(cfg.get("solver", {}).get("n_starts", 8))
        reports = multi_solution_sweep(problem, n_starts, opts)
    else:
        raise ConfigError(f"unknown solve mode {mode!r}")

    summary = _write_solver_outputs(outdir, reports)
    obj = {
        "backend": _kernels.BACKEND,
        "mode": mode,
        "seed": opts.seed,
        "results": summary,
    }
    _write_json(outdir / "report.json", obj)
    if not reports:
        return EXIT_OK
    return max(rep.exit_code for rep in reports)


def _negative_energy_start(problem, seed_field: GridFunction) -> GridFunction:
    """Scale the seed down until the energy goes negative, when it does;
    start there so the non-increasing descent certifies a negative minimum."""
    u = seed_field
    best = u
    for _ in range(40):
        if energy(u, problem).total < 0:
            return u
        u = u * 0.5
        best = u
    return best


def cmd_energy(cfg: dict, outdir: Path, input_path: str) -> int:
    problem = build_problem(cfg)
    u = GridFunction.from_csv(Path(input_path).read_text())
    if u.grid != problem.grid:
        raise ConfigError("input field grid does not match the config domain")
    rep = energy(u, problem)
    r = residual(u, problem)
    obj = {
        "backend": _kernels.BACKEND,
        "energy": rep.to_json_obj(),
        "residual_norm": residual_norm(r),
        "input": str(input_path),
    }
    _write_json(outdir / "report.json", obj)
    return EXIT_OK


def truncation_sensitivity(cfg: dict, factor: float = 1.5,
                           seed: int = 0) -> dict:
    """Diagnostic for the box-truncation radius: re-solve the coercive
    minimization with the radius scaled by ``factor`` (spacing kept
    comparable) and report the relative energy change."""
    base = build_problem(cfg)
    opts = solver_options(cfg, seed_override=seed)
    n = base.grid.nodes_per_axis
    n_big = int(round((n - 1) * factor)) + 1
    big = build_problem(cfg, radius_override=base.grid.radius * factor,
                        nodes_override=n_big)

    def _solve(problem):
        grid = problem.grid
        seed_field = cone_function(np.zeros(grid.dim), 0.45 * base.grid.radius,
                                   grid)
        u0 = _negative_energy_start(problem, seed_field)
        return minimize(problem, u0, opts)

    rep_base = _solve(base)
    rep_big = _solve(big)
    e0, e1 = rep_base.energy.total, rep_big.energy.total
    return {
        "radius": base.grid.radius,
        "expanded_radius": big.grid.radius,
        "energy": e0,
        "expanded_energy": e1,
        "relative_change": abs(e1 - e0) / max(abs(e0), 1e-300),
    }


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dphase")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True)
        p.add_argument("--out", default="out")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("validate", help="run the hypothesis validator")
    common(p)
    p = sub.add_parser("check-spaces", help="run the norm inequality batteries")
    common(p)
    p.add_argument("--trials", type=int, default=200)
    p = sub.add_parser("solve", help="find critical points")
    common(p)
    p.add_argument("--mode", choices=("min", "mp", "signed", "sweep"),
                   required=True)
    p = sub.add_parser("energy", help="evaluate the energy of a stored field")
    common(p)
    p.add_argument("--input", required=True)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    outdir = Path(args.out)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else int(
            cfg.get("solver", {}).get("seed", 0))
        if args.command == "validate":
            return cmd_validate(cfg, outdir)
        if args.command == "check-spaces":
            return cmd_check_spaces(cfg, outdir, args.trials, seed)
        if args.command == "solve":
            return cmd_solve(cfg, outdir, args.mode, seed)
        if args.command == "energy":
            return cmd_energy(cfg, outdir, args.input)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
