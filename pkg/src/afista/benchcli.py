"""Benchmark runner: config parsing, CSV traces and plot-data files.

Config files are flat ``key = value`` lines; ``#`` starts a comment. Keys of
the form ``<solver>.<key>`` override a solver option for one solver only.
An empty file selects the sparse network experiment with its default
constants; a non-empty file must name the ``problem``.

Example::

    problem = simple_net
    solvers = fbs, ipiano, mfista, afista, zerosr1
    seeds = 0, 1, 2
    max_iters = 2000
    alpha = 5e-5
    ipiano.inertia = 0.95
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SolverConfig
from .problems import (CompositeProblem, NetworkSpec, generate_data,
                       make_network_problem, make_random_lasso,
                       sparsity_level)
from .solvers import SOLVERS, SolverRun, get_solver

__all__ = [
    "ConfigError",
    "BenchConfig",
    "parse_config",
    "load_config",
    "build_problem",
    "solver_config",
    "run_benchmark",
    "write_trace_csv",
    "emit_plot_data",
    "main",
    "CSV_HEADER",
    "FIGURE_NAMES",
]

CSV_HEADER = ("iter", "time_seconds", "objective", "normalized_objective",
              "stationarity_residual", "l_value", "n_backtracks")
FIGURE_NAMES = {"fbs": "FBS", "ipiano": "iPiano", "mfista": "mFISTA",
               "afista": "aFISTA", "zerosr1": "zeroSR1_PG"}
PROBLEMS = ("simple_net", "lasso")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _positive(conv):
    def parse(s):
        v = conv(s)
        if not v > 0:
            raise ValueError("must be positive")
        return v
    return parse


def _nonneg(conv):
    def parse(s):
        v = conv(s)
        if not v >= 0:
            raise ValueError("must be non-negative")
        return v
    return parse


def _bool(s):
    low = s.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true or false")


def _int(s):
    v = float(s)
    if not v.is_integer():
        raise ValueError("expected an integer")
    return int(v)


def _floats(s):
    vals = tuple(float(p) for p in s.split(",") if p.strip())
    if not vals:
        raise ValueError("expected a comma-separated list of numbers")
    return vals


def _ints(s):
    return tuple(_int(p) for p in s.split(",") if p.strip())


def _ids(s):
    ids = tuple(p.strip() for p in s.split(",") if p.strip())
    if not ids:
        raise ValueError("expected at least one solver id")
    for i in ids:
        get_solver(i)
    return ids


def _rho(s):
    v = float(s)
    if not 0.0 <= v < 1.0:
        raise ValueError("must lie in [0, 1)")
    return v


def _inertia(s):
    v = float(s)
    if not 0.0 <= v < 1.0:
        raise ValueError("must lie in [0, 1)")
    return v


def _problem(s):
    if s not in PROBLEMS:
        raise ValueError(f"expected one of {', '.join(PROBLEMS)}")
    return s


def _mode(s):
    if s not in ("auto", "closed_form", "backtracked", "alternating"):
        raise ValueError("unknown afista mode")
    return s


def _theta0(s):
    v = float(s)
    if not 0.0 < v <= 1.0:
        raise ValueError("must lie in (0, 1]")
    return v


# options passed through to SolverConfig (config key -> (field, parser))
SOLVER_KEYS = {
    "alpha": ("step_alpha", _positive(float)),
    "max_iters": ("max_iters", _nonneg(_int)),
    "time_budget": ("time_budget", _positive(float)),
    "tol_residual": ("tol_residual", _nonneg(float)),
    "a_margin": ("a_margin", _positive(float)),
    "rho": ("rho", _rho),
    "beta_samples": ("beta_samples", _floats),
    "backtrack_lipschitz": ("backtrack_lipschitz", _bool),
    "lipschitz_growth": ("lipschitz_growth", _positive(float)),
    "lipschitz_decrease": ("lipschitz_decrease", _bool),
    "inertia": ("inertia", _inertia),
    "rank": ("rank", _positive(_int)),
    "afista_mode": ("afista_mode", _mode),
    "alternating_rounds": ("alternating_rounds", _positive(_int)),
    "theta0": ("theta0", _theta0),
}

# problem and run-level options (config key -> parser)
RUN_KEYS = {
    "problem": _problem,
    "solvers": _ids,
    "solver": _ids,
    "seeds": _ints,
    "seed": lambda s: (_int(s),),
    "output_dir": str,
    "emit_plot_data": _bool,
    "figure_names": _bool,
    "lambda": _nonneg(float),
    "eps": _positive(float),
    "n_samples": _positive(_int),
    "noise_sigma": _nonneg(float),
    "n_outliers": _nonneg(_int),
    "init_std": _nonneg(float),
    "hidden": _positive(_int),
    "lasso_n": _positive(_int),
    "lasso_m": _positive(_int),
    "lasso_density": _positive(float),
    "lasso_condition": _positive(float),
}

# solver defaults of the sparse network experiment; its problem constants
# (lambda = 1, eps = 0.1) live in build_problem
SIMPLE_NET_DEFAULTS = {
    "alpha": 5e-5, "inertia": 0.95, "beta_samples": (2.0, 1.0, 0.0),
    "max_iters": 2000,
}


@dataclass
class BenchConfig:
    problem: str = "simple_net"
    solvers: tuple[str, ...] = ("fbs", "ipiano", "mfista", "afista",
                                "zerosr1")
    seeds: tuple[int, ...] = (0,)
    output_dir: str = "bench_out"
    emit_plot_data: bool = True
    figure_names: bool = False
    problem_options: dict = field(default_factory=dict)
    solver_options: dict = field(default_factory=dict)
    per_solver: dict = field(default_factory=dict)

    def options_for(self, solver: str) -> dict:
        opts = dict(SIMPLE_NET_DEFAULTS) if self.problem == "simple_net" \
            else {"max_iters": 2000}
        opts.update(self.solver_options)
        opts.update(self.per_solver.get(solver, {}))
        return opts


def parse_config(text: str) -> BenchConfig:
    """Parse a flat ``key = value`` configuration.

    Raises
    ------
    ConfigError
        On unknown keys, malformed lines, invalid values, duplicate keys,
        or a non-empty config without ``problem``. The message carries the
        offending line number.
    """
    cfg = BenchConfig()
    seen: dict[str, int] = {}
    n_lines = 0
    any_entry = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        n_lines = lineno
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        any_entry = True
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}",
                              lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError("missing key", lineno)
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line "
                              f"{seen[key]})", lineno)
        seen[key] = lineno
        solver, _, sub = key.rpartition(".")
        try:
            if solver:
                if solver not in SOLVERS:
                    raise ConfigError(f"unknown solver {solver!r}", lineno)
                if sub not in SOLVER_KEYS:
                    raise ConfigError(f"unknown solver option {sub!r}",
                                      lineno)
                cfg.per_solver.setdefault(solver, {})[sub] = \
                    SOLVER_KEYS[sub][1](value)
            elif key in SOLVER_KEYS:
                cfg.solver_options[key] = SOLVER_KEYS[key][1](value)
            elif key in RUN_KEYS:
                v = RUN_KEYS[key](value)
                if key in ("solver", "solvers"):
                    cfg.solvers = v
                elif key in ("seed", "seeds"):
                    cfg.seeds = v
                elif key in ("problem", "output_dir", "emit_plot_data",
                             "figure_names"):
                    setattr(cfg, key, v)
                else:
                    cfg.problem_options[key] = v
            else:
                raise ConfigError(f"unknown key {key!r}", lineno)
        except ConfigError:
            raise
        except (ValueError, KeyError) as exc:
            msg = exc.args[0] if exc.args else str(exc)
            raise ConfigError(f"invalid value {value!r} for {key!r}: {msg}",
                              lineno) from None
    if any_entry and "problem" not in seen:
        raise ConfigError("missing required key 'problem'", n_lines)
    if ("solver" in seen and "solvers" in seen) or \
            ("seed" in seen and "seeds" in seen):
        raise ConfigError("give either the singular or the plural key",
                          max(seen.get("solver", 0), seen.get("seed", 0)))
    if not cfg.seeds:
        raise ConfigError("seed list is empty", seen.get("seeds"))
    return cfg


def load_config(path) -> BenchConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)


def build_problem(cfg: BenchConfig, seed: int) -> CompositeProblem:
    po = cfg.problem_options
    if cfg.problem == "simple_net":
        h = po.get("hidden", 10)
        spec = NetworkSpec(dims=(1, h, h, 1), eps=po.get("eps", 0.1),
                           lam=po.get("lambda", 1.0))
        data = generate_data(seed, po.get("n_samples", 80),
                             po.get("noise_sigma", 1.5),
                             po.get("n_outliers", 20))
        return make_network_problem(seed, spec, po.get("init_std", 0.5),
                                    data)
    f, g = make_random_lasso(seed, po.get("lasso_n", 100),
                             po.get("lasso_m", 200),
                             po.get("lasso_density", 0.1),
                             po.get("lambda", 0.1),
                             po.get("lasso_condition"))
    return CompositeProblem(f, g, name="lasso")


def solver_config(cfg: BenchConfig, solver: str, seed: int) -> SolverConfig:
    opts = cfg.options_for(solver)
    kwargs = {SOLVER_KEYS[k][0]: v for k, v in opts.items()}
    return SolverConfig(seed=seed, **kwargs)


def _fmt(x) -> str:
    return repr(float(x))


def write_trace_csv(run: SolverRun, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in run.trace:
            w.writerow([r.iter, _fmt(r.wall_time), _fmt(r.objective),
                        _fmt(r.normalized_objective),
                        _fmt(r.stationarity_residual), _fmt(r.l_value),
                        r.n_backtracks])


def _sparsity(problem, x) -> float:
    if problem.layout is not None:
        return sparsity_level(x, problem.layout, 1e-10)
    return float(np.mean(np.abs(x) <= 1e-10))


def run_benchmark(cfg: BenchConfig, output_dir=None) -> list[SolverRun]:
    """Run every (solver, seed) pair and write traces plus a summary.

    Writes ``<solver>_<seed>.csv`` per run, ``summary.csv`` once at the
    end and, if enabled, plot data through :func:`emit_plot_data`.
    """
    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"{out}: {exc.strerror}") from exc
    runs, rows = [], []
    for seed in cfg.seeds:
        problem = build_problem(cfg, seed)
        for sid in cfg.solvers:
            run = get_solver(sid)(problem, solver_config(cfg, sid, seed))
            run.info["seed"] = seed
            path = out / f"{sid}_{seed}.csv"
            try:
                write_trace_csv(run, path)
            except OSError as exc:
                raise OSError(f"{path}: {exc.strerror}") from exc
            runs.append(run)
            last = run.trace[-1]
            rows.append([sid, seed, run.status, last.iter,
                         _fmt(last.objective),
                         _fmt(last.normalized_objective),
                         _fmt(_sparsity(problem, run.final_x))])
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["solver", "seed", "status", "iterations",
                    "final_objective", "final_normalized_objective",
                    "sparsity"])
        w.writerows(rows)
    if cfg.emit_plot_data:
        emit_plot_data(runs, out, cfg.figure_names)
    return runs


def _plot_stem(run: SolverRun, figure_names: bool, multi_seed: bool) -> str:
    seed = run.info.get("seed", 0)
    if figure_names:
        name = FIGURE_NAMES.get(run.solver_id, run.solver_id)
        stem = f"SimpleSparseNet_conv_{name}"
        return f"{stem}_seed{seed}" if multi_seed else stem
    return f"{run.solver_id}_{seed}"


def emit_plot_data(runs, output_dir, figure_names: bool = False) -> list:
    """Write ``*_iter.dat`` and ``*_time.dat`` two-column files per run.

    Columns are the iteration index (or seconds) and the normalized
    objective, whitespace separated.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("no runs to emit")
    out = Path(output_dir)
    seeds = {r.info.get("seed", 0) for r in runs}
    written = []
    for run in runs:
        stem = _plot_stem(run, figure_names, len(seeds) > 1)
        for suffix, col in (("iter", "iter"), ("time", "wall_time")):
            path = out / f"{stem}_{suffix}.dat"
            with open(path, "w") as fh:
                for r in run.trace:
                    x = getattr(r, col)
                    xs = str(x) if suffix == "iter" else _fmt(x)
                    fh.write(f"{xs} {_fmt(r.normalized_objective)}\n")
            written.append(path)
    return written


# ------------------------------------------------------------------- CLI


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.solvers:
            cfg.solvers = _ids(args.solvers)
        if args.seed is not None:
            cfg.seeds = (args.seed,)
        if args.max_iters is not None:
            if args.max_iters < 0:
                raise ConfigError("--max-iters must be non-negative")
            cfg.solver_options["max_iters"] = args.max_iters
            for opts in cfg.per_solver.values():
                opts.pop("max_iters", None)
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    runs = run_benchmark(cfg, args.out)
    for r in runs:
        last = r.trace[-1]
        print(f"{r.solver_id:8s} seed={r.info['seed']:<4d} {r.status:12s} "
              f"iters={last.iter:<6d} objective={last.objective:.10g}")
    return 0


def _cmd_gradcheck(args) -> int:
    from .oracles import gradient_suite

    res = gradient_suite(seeds=(args.seed,), n_coords=args.coords)[0]
    print(res.line())
    return 0 if res.passed else 1


def _cmd_oracle(args) -> int:
    from .oracles import SUITES

    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        for res in SUITES[name]():
            print(res.line())
            ok &= res.passed
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    from .oracles import SUITES

    p = argparse.ArgumentParser(
        prog="bench", description="Adaptive FISTA benchmark runner.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run solvers and write CSV traces")
    r.add_argument("--config", required=True, help="key = value config file")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, help="run a single seed")
    r.add_argument("--solvers", help="comma-separated solver ids")
    r.add_argument("--max-iters", type=int, dest="max_iters")
    r.set_defaults(func=_cmd_run)

    g = sub.add_parser("gradcheck",
                       help="compare backprop with finite differences")
    g.add_argument("--problem", choices=["simple_net"], default="simple_net")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--coords", type=int, default=20)
    g.set_defaults(func=_cmd_gradcheck)

    o = sub.add_parser("oracle", help="run reference-value checks")
    o.add_argument("--suite", required=True,
                   choices=sorted(SUITES) + ["all"])
    o.set_defaults(func=_cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
