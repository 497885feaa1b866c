"""Command-line entry points.

Commands: train, evaluate, scenario, print-config, make-seed-grid.
Exit codes: 0 success, 1 configuration error, 2 runtime error (including
checkpoint integrity failures), 3 infeasible scenario. Set LULC_PPO_LOG to
debug/info/warning/error to control verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, apply_overrides, load_config
from .errors import CheckpointError, ConfigError, InfeasibleScenario, LulcPpoError
from .grid import CLASS_NAMES, class_histogram, write_grid_csv, write_mask_csv
from .persistence import atomic_write_text, utc_now_iso, write_manifest
from .runoff import runoff_from_histogram
from .scenarios import apply_scenario, builtin_scenario, builtin_scenarios, read_scenario_csv
from .seed_grid import make_seed_grid

log = logging.getLogger("lulc_ppo.cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_INFEASIBLE = 3


def _setup_logging() -> None:
    level_name = os.environ.get("LULC_PPO_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _add_common(parser: argparse.ArgumentParser, *, updates=False, steps=False, workers=False) -> None:
    parser.add_argument("--config", type=str, default=None, help="run configuration file (INI)")
    parser.add_argument("--seed", type=int, default=None, help="override [run] seed")
    parser.add_argument("--out", type=str, default=None, help="override [run] out_dir")
    if workers:
        parser.add_argument("--workers", type=int, default=None, help="rollout workers (1 = deterministic)")
    if updates:
        parser.add_argument("--updates", type=int, default=None, help="override [ppo] total_updates")
    if steps:
        parser.add_argument("--steps", type=int, default=None, help="greedy sweep length (default: pixel count)")


def _load(args, **overrides) -> RunConfig:
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, seed=args.seed, out=args.out, **overrides)
    return cfg.validate()


def _input_digest_paths(cfg: RunConfig) -> dict:
    paths = {}
    if cfg.source_path:
        paths["config"] = cfg.source_path
    if cfg.grid_csv:
        paths["grid_csv"] = cfg.grid_csv
    if cfg.frozen_csv:
        paths["frozen_csv"] = cfg.frozen_csv
    if cfg.coefficients_csv:
        paths["coefficients_csv"] = cfg.coefficients_csv
    return paths


def cmd_train(args) -> int:
    from .ppo import train

    cfg = _load(args, workers=args.workers, updates=args.updates)
    started = utc_now_iso()
    grid = cfg.load_grid()
    table = cfg.load_table()
    out_dir = Path(cfg.out_dir)
    result = train(
        grid,
        table,
        cfg.env_config(),
        cfg.ppo_config(),
        workers=cfg.workers,
        out_dir=out_dir,
        checkpoint_every=cfg.checkpoint_every,
    )
    outputs = {p.name: p for p in result.written}
    write_manifest(
        out_dir / "manifest.json",
        command="train",
        config_text=cfg.render(),
        seed=cfg.seed,
        started_at=started,
        inputs=_input_digest_paths(cfg),
        outputs=outputs,
        version=__version__,
    )
    last = result.stats[-1] if result.stats else None
    if last is not None:
        print(f"trained {cfg.total_updates} updates; final-episode runoff {last.final_episode_runoff:.6g} m^3/s")
    else:
        print("trained 0 updates; wrote initialization checkpoint")
    print(f"outputs in {out_dir}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .checkpoint import load_checkpoint
    from .evaluate import compare_all, run_greedy
    from .report import emit_reports

    cfg = _load(args)
    started = utc_now_iso()
    grid = cfg.load_grid()
    table = cfg.load_table()
    env_cfg = cfg.env_config()
    policy = load_checkpoint(args.checkpoint)["policy"]

    steps = grid.n_pixels if args.steps is None else args.steps
    report = compare_all(grid, builtin_scenarios(), policy, table, env_cfg)
    final_grid, matrix, _ = run_greedy(grid, policy, steps, table, env_cfg)

    out_dir = Path(cfg.out_dir)
    written = emit_reports(report, matrix, out_dir)
    final_grid_path = out_dir / "final_grid.csv"
    write_grid_csv(final_grid, final_grid_path)
    written.append(final_grid_path)

    inputs = _input_digest_paths(cfg)
    inputs["checkpoint"] = args.checkpoint
    write_manifest(
        out_dir / "manifest.json",
        command="evaluate",
        config_text=cfg.render(),
        seed=cfg.seed,
        started_at=started,
        inputs=inputs,
        outputs={p.name: p for p in written},
        version=__version__,
    )
    for label, value in zip(report.labels, report.runoff_m3_per_s):
        print(f"{label:>10}: {value:.6g} m^3/s")
    print(f"optimized is strict minimum: {report.optimized_is_strict_minimum}")
    print(f"outputs in {out_dir}")
    return EXIT_OK


def cmd_scenario(args) -> int:
    cfg = _load(args)
    grid = cfg.load_grid()
    table = cfg.load_table()
    if args.scenario in {s.name for s in builtin_scenarios()}:
        scenario = builtin_scenario(args.scenario)
    else:
        scenario = read_scenario_csv(args.scenario)

    hist = class_histogram(grid)
    report = apply_scenario(hist, scenario)
    before_q = runoff_from_histogram(report.before, grid.cell_area_m2, table).total_m3_per_s
    after_q = runoff_from_histogram(report.after, grid.cell_area_m2, table).total_m3_per_s

    assigned = "none" if report.residual_assigned_to is None else CLASS_NAMES[report.residual_assigned_to]
    print(f"scenario: {scenario.name}")
    print(f"{'class':>12} {'delta':>8} {'before':>7} {'target':>7} {'after':>7}")
    for k, name in enumerate(CLASS_NAMES):
        delta = scenario.deltas[k]
        delta_text = "nc" if delta is None else f"{delta:+.4g}"
        print(f"{name:>12} {delta_text:>8} {report.before[k]:>7d} {report.targets[k]:>7d} {report.after[k]:>7d}")
    print(f"residual: {report.residual} (assigned to: {assigned})")
    print(f"runoff before: {before_q:.6g} m^3/s")
    print(f"runoff after:  {after_q:.6g} m^3/s")

    lines = ["field,before,after"]
    for k, name in enumerate(CLASS_NAMES):
        lines.append(f"{name},{int(report.before[k])},{int(report.after[k])}")
    lines.append(f"runoff_m3_per_s,{before_q!r},{after_q!r}")
    lines.append(f"residual_assigned_to,,{assigned}")
    out_path = Path(cfg.out_dir) / f"scenario_{scenario.name}.csv"
    atomic_write_text(out_path, "\n".join(lines) + "\n")
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_print_config(args) -> int:
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, seed=args.seed, out=args.out)
    sys.stdout.write(cfg.render())
    return EXIT_OK


def cmd_make_seed_grid(args) -> int:
    out_dir = Path(args.out) if args.out else Path(load_config(None).out_dir)
    grid = make_seed_grid()
    grid_path = out_dir / "seed_grid.csv"
    mask_path = out_dir / "seed_grid_frozen.csv"
    out_dir.mkdir(parents=True, exist_ok=True)
    write_grid_csv(grid, grid_path)
    write_mask_csv(grid, mask_path)
    hist = class_histogram(grid)
    print(
        "seed grid histogram: "
        + ", ".join(f"{name}={int(hist[k])}" for k, name in enumerate(CLASS_NAMES))
    )
    print(f"wrote {grid_path} and {mask_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lulc-ppo",
        description="Learn and evaluate land-cover change policies that minimize surface runoff.",
    )
    parser.add_argument("--version", action="version", version=f"lulc-ppo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a policy and write checkpoint, stats and manifest")
    _add_common(p_train, updates=True, workers=True)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("evaluate", help="compare existing/scenario/optimized runoff for a checkpoint")
    _add_common(p_eval, steps=True)
    p_eval.add_argument("--checkpoint", type=str, required=True, help="trained checkpoint path")
    p_eval.set_defaults(func=cmd_evaluate)

    p_scen = sub.add_parser("scenario", help="apply a management scenario to the grid histogram")
    p_scen.add_argument("scenario", type=str, help="builtin id (s1..s5) or scenario CSV path")
    _add_common(p_scen)
    p_scen.set_defaults(func=cmd_scenario)

    p_print = sub.add_parser("print-config", help="print the effective configuration")
    _add_common(p_print)
    p_print.set_defaults(func=cmd_print_config)

    p_seed = sub.add_parser("make-seed-grid", help="write the bundled grid and frozen mask as CSV")
    p_seed.add_argument("--out", type=str, default=None, help="output directory")
    p_seed.set_defaults(func=cmd_make_seed_grid)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleScenario as exc:
        name = CLASS_NAMES[exc.violating_class] if exc.violating_class is not None else "unknown"
        print(f"error: infeasible scenario (class {name}): {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (CheckpointError, LulcPpoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        log.debug("unhandled error", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
