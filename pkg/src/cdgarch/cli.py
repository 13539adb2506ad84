"""Command-line front end.

Subcommands: ``simulate``, ``mean``, ``analyze`` and ``validate``. Exit code
0 on success, 2 on configuration or model-condition errors, 3 when a
validation criterion fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ResolvedConfig, load_config, reference_config_path
from .errors import ConditionError, ConfigError
from .euler import euler_simulate, lag_count
from .events import event_simulate
from .mean import solve_mean_fde, solve_mean_renewal, write_mean_csv
from .noise import sample_increments, sample_jump_events
from .paths import write_path_csv
from .stability import analyze
from .stats import ValidationRow, write_validation_csv
from .validation import Battery

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="configuration file (default: shipped reference)")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides [run] seed)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--horizon", type=float, help="time horizon T")
    common.add_argument("--delta", type=float, help="grid step (Euler step or mean-solver step)")

    p = argparse.ArgumentParser(prog="cdgarch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate sample paths")
    s.add_argument("--scheme", choices=["euler", "events"])
    s.add_argument("--paths", type=int, help="number of paths")

    m = sub.add_parser("mean", parents=[common], help="solve the mean equation")
    m.add_argument("--solver", choices=["dde", "renewal", "both"])

    sub.add_parser("analyze", parents=[common], help="stability report")

    v = sub.add_parser("validate", parents=[common], help="run the acceptance battery")
    v.add_argument("--suite", choices=["quick", "full"])
    v.add_argument("--paths", type=int, help=argparse.SUPPRESS)
    return p


def _apply_overrides(cfg: ResolvedConfig, args) -> list[str]:
    overridden = []
    mapping = {"seed": "seed", "horizon": "horizon", "paths": "paths", "scheme": "scheme",
               "solver": "solver", "suite": "suite"}
    for arg, key in mapping.items():
        val = getattr(args, arg, None)
        if val is not None:
            setattr(cfg.run, key, val)
            overridden.append(key)
    if args.delta is not None:
        key = "step" if args.command == "mean" else "delta"
        setattr(cfg.run, key, args.delta)
        overridden.append(key)
    if "seed" in overridden:
        from dataclasses import replace

        if not 0 <= cfg.run.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg.model = replace(cfg.model, noise=replace(cfg.model.noise, seed=cfg.run.seed))
    for key in overridden:
        if f"run.{key}" in cfg.defaulted:
            cfg.defaulted.remove(f"run.{key}")
    return overridden


def _header(cfg: ResolvedConfig, command: str, overridden) -> list[str]:
    lines = [
        f"command = {command}",
        f"config_source = {cfg.source}",
        f"config_digest = {cfg.digest()}",
        f"model_digest = {cfg.model.digest()}",
        f"kappa2 = {cfg.model.kappa2!r}",
        f"kappa4 = {cfg.model.kappa4!r}",
    ]
    for k, v in vars(cfg.run).items():
        tag = ""
        if f"run.{k}" in cfg.defaulted:
            tag = "  # default"
        elif k in overridden:
            tag = "  # command line"
        lines.append(f"run.{k} = {v}{tag}")
    for k in cfg.defaulted:
        if not k.startswith("run."):
            lines.append(f"{k}  # default")
    return lines


def _simulate(cfg: ResolvedConfig, out: Path) -> list[str]:
    m, run = cfg.model, cfg.run
    phi = cfg.phi_segment()
    T = run.horizon
    lines = []
    if run.paths < 1:
        raise ConfigError("paths must be at least 1")
    for i in range(run.paths):
        if run.scheme == "euler":
            nh = lag_count(m.r, run.delta, "history")
            nf = lag_count(T, run.delta, "horizon")
            inc = sample_increments(m.noise, run.delta, nh, nf, path=i)
            path = euler_simulate(m, inc, phi, run.y0)
        elif run.scheme == "events":
            log = sample_jump_events(m.noise, (-m.r, T), path=i)
            path = event_simulate(m, log, phi, run.y0, run.h, run.report_step, T)
        else:
            raise ConfigError(f"scheme must be euler or events, got {run.scheme!r}")
        path.meta["path_index"] = i
        path.meta["config_digest"] = cfg.digest()
        name = out / f"path_{i:04d}.csv"
        write_path_csv(path, name)
        x = path.x_future
        lines.append(
            f"path {i}: file = {name.name}, min X = {float(x.min())!r}, max X = {float(x.max())!r}, "
            f"final Y = {float(path.y[-1])!r}"
            + (f", negative steps = {path.meta['negative_steps']}" if run.scheme == "euler" else "")
        )
    return lines


def _mean(cfg: ResolvedConfig, out: Path) -> list[str]:
    m, run = cfg.model, cfg.run
    phi = cfg.phi_segment()
    solvers = {"dde": [solve_mean_fde], "renewal": [solve_mean_renewal],
               "both": [solve_mean_fde, solve_mean_renewal]}
    if run.solver not in solvers:
        raise ConfigError(f"solver must be dde, renewal or both, got {run.solver!r}")
    paths = [fn(m, phi, run.horizon, run.step) for fn in solvers[run.solver]]
    write_mean_csv(paths, out / "mean.csv")
    lines = [f"{p.solver}: m(T) = {float(p.m[-1])!r}" for p in paths]
    if len(paths) == 2:
        gap = float(np.max(np.abs(paths[0].m - paths[1].m)))
        lines.append(f"sup |m_dde - m_renewal| = {gap!r}")
    return lines


def _analyze(cfg: ResolvedConfig, out: Path) -> list[str]:
    run = cfg.run
    try:
        x0 = cfg.phi_segment().phi0
    except ConditionError:
        x0 = None
    rep = analyze(cfg.model, ex0=x0, grid_density=run.grid_density, panels=run.panels)
    rep.write_csv(out / "stability.csv")
    return rep.to_text().rstrip("\n").splitlines()


def _validate(cfg: ResolvedConfig, out: Path):
    bat = Battery(cfg.model, seed=cfg.run.seed, suite=cfg.run.suite)
    results = bat.run_all(progress=lambda r: print(r.line(), flush=True))
    rows = []
    for res in results:
        for r in res.rows:
            rows.append(ValidationRow(f"AC{res.number}:{r.quantity}", r.lag, r.theory,
                                      r.estimate, r.std_error, r.passed))
        rows.append(ValidationRow(f"AC{res.number}", None, None, None, None, res.passed))
    write_validation_csv(rows, out / "validation.csv")
    return [r.line() for r in results], all(r.passed for r in results)


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config if args.config is not None else reference_config_path())
        overridden = _apply_overrides(cfg, args)
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        ok = True
        if args.command == "simulate":
            body = _simulate(cfg, out)
        elif args.command == "mean":
            body = _mean(cfg, out)
        elif args.command == "analyze":
            body = _analyze(cfg, out)
        else:
            body, ok = _validate(cfg, out)
    except (ConfigError, ConditionError, ValueError) as exc:
        print(f"cdgarch: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    lines = _header(cfg, args.command, overridden) + [""] + body
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    (out / "config.resolved.ini").write_text(cfg.to_ini())
    if args.command != "validate":
        print("\n".join(body))
    if not ok:
        print("cdgarch: validation failed", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
