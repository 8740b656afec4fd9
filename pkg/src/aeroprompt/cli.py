"""Command line entry point.

Subcommands:
  baseline    evaluate the reference population and print its statistics
  optimize    run the full prompt-space optimization from a config file
  similarity  word similarity vs. shape distance sweep, written as CSV
  report      summarize a run directory and export plot-ready CSV series
  example-config  print a starter TOML config listing every default

Exit codes: 0 success, 1 configuration error (bad usage, bad config file),
2 runtime failure (backend or data errors during a valid run).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import config as config_mod
from . import orchestrator
from .errors import AeropromptError, BadConfig, ConfigError


def _load(args) -> config_mod.RunConfig:
    cfg = config_mod.load_config(args.config) if args.config else config_mod.RunConfig()
    overrides = {}
    for name in ("seed", "out_dir", "run_name", "workers"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _add_common(parser):
    parser.add_argument("--config", default=None, help="TOML or JSON run config")
    parser.add_argument("--seed", type=int, default=None, help="override master seed")
    parser.add_argument("--workers", type=int, default=None, help="override worker count")


def cmd_baseline(args) -> int:
    cfg = _load(args)
    prompt = args.prompt if args.prompt is not None else cfg.reference_prompt
    count = args.count if args.count is not None else cfg.reference_size
    generator = orchestrator._generator_factory(cfg)
    evaluator = orchestrator._evaluator_factory(cfg)
    try:
        _, stats = orchestrator.compute_reference_set(
            generator, evaluator, prompt, count, cfg.seed,
            workers=cfg.workers, records_path=args.records,
        )
    finally:
        close = getattr(generator, "close", None)
        if close:
            close()
    print(json.dumps(stats.to_dict(), indent=1))
    if args.records:
        print(f"wrote {args.records}")
    return 0


def cmd_optimize(args) -> int:
    cfg = _load(args)
    result = orchestrator.run_optimization(cfg)
    print(f"run dir: {result.run_dir}")
    print(f"baseline: n={result.baseline.n} cd_mean={result.baseline.cd_mean:.4f} "
          f"R^2={result.baseline.r_squared:.3f}")
    print(f"stopped: {result.converged_reason} after {len(result.generations)} generations")
    if result.best is None:
        print("best: none (no candidate evaluated successfully)")
    else:
        best = result.best
        print(f"best: cd_N={best.cd_normalized:.4f} cd={best.cd:.4f} "
              f"gen={best.generation} prompt={best.prompt!r}")
    return 0


def cmd_similarity(args) -> int:
    cfg = _load(args)
    rows = orchestrator.similarity_sweep(
        args.count, args.reference, cfg, n_points=args.points
    )
    out = Path(args.out)
    orchestrator.write_sweep_csv(out, rows)
    for row in rows:
        chamfer = f"{row['chamfer']:.6f}" if row["chamfer"] is not None else "-"
        print(f"{row['word']:>14s} {row['pos']:>9s}  wup={row['wup']:.4f}  "
              f"chamfer={chamfer}  [{row['status']}]")
    print(f"wrote {out}")
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.run)
    runlog_path = run_dir / "runlog.json"
    if not runlog_path.exists():
        raise AeropromptError(f"no runlog.json in {run_dir}")
    runlog = json.loads(runlog_path.read_text(encoding="utf-8"))
    base = runlog["baseline"]
    print(f"baseline: n={base['n']} cd in [{base['cd_min']:.4f}, {base['cd_max']:.4f}] "
          f"mean {base['cd_mean']:.4f} +/- {base['cd_ci95']:.4f} (95%), R^2={base['r_squared']:.3f}")
    initial = runlog.get("initial_reference")
    if initial:
        print(f"initial reference: {initial['prompt']!r} n={initial['n']} "
              f"cd {initial['cd_mean']:.4f} +/- {initial['cd_ci95']:.4f}, "
              f"cd_N mean {initial['cd_n_mean']:.4f}")
    print(f"stopped: {runlog['converged_reason']}")
    print(f"{'gen':>4s} {'cd_N mean':>10s} {'cd_N min':>10s} {'pool best':>10s} {'sigma':>9s} {'fail':>4s}")
    for g in runlog["generations"]:
        mean = f"{g['cd_n_mean']:.4f}" if g["cd_n_mean"] is not None else "-"
        gmin = f"{g['cd_n_min']:.4f}" if g["cd_n_min"] is not None else "-"
        print(f"{g['generation']:>4d} {mean:>10s} {gmin:>10s} "
              f"{g['best_pool_cdn']:>10.4f} {g['sigma']:>9.4f} {g['n_failed']:>4d}")
    best = runlog["best"]
    if best is None:
        print("best: none (no candidate evaluated successfully)")
    else:
        print(f"best: gen {best['generation']} cd_N={best['cd_normalized']:.4f} "
              f"prompt={best['prompt']!r}")

    series_path = run_dir / "report_generations.csv"
    _write_series_csv(series_path, runlog["generations"])
    genome_path = run_dir / "report_genome.csv"
    _write_genome_csv(genome_path, runlog["generations"])
    print(f"wrote {series_path}")
    print(f"wrote {genome_path}")
    return 0


def _write_series_csv(path: Path, generations: list):
    import csv

    fields = ["generation", "cd_n_mean", "cd_n_min", "cd_n_ci95",
              "best_pool_cdn", "sigma", "n_ok", "n_failed"]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for g in generations:
            writer.writerow({k: g.get(k) for k in fields})


def _write_genome_csv(path: Path, generations: list):
    import csv

    if not generations:
        dim = 0
    else:
        dim = len(generations[0]["mean_genome"])
    fields = ["generation"]
    fields += [f"mean_{i}" for i in range(dim)]
    fields += [f"var_{i}" for i in range(dim)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for g in generations:
            row = [g["generation"]]
            row += list(g["mean_genome"])
            row += list(g["genome_variance"])
            writer.writerow(row)


def cmd_example_config(args) -> int:
    print(config_mod.example_config(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aeroprompt",
        description="Evolutionary drag optimization over text prompt space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("baseline", help="evaluate the reference population")
    _add_common(p)
    p.add_argument("--prompt", default=None, help="override the reference prompt")
    p.add_argument("--count", type=int, default=None, help="override the population size")
    p.add_argument("--records", default=None, help="write per-design rows to this NDJSON path")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("optimize", help="run the optimization loop")
    _add_common(p)
    p.add_argument("--out-dir", dest="out_dir", default=None, help="override output directory")
    p.add_argument("--run-name", dest="run_name", default=None, help="override run directory name")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("similarity", help="similarity vs. shape distance sweep")
    _add_common(p)
    p.add_argument("--count", type=int, default=300,
                   help="number of rows including the reference word")
    p.add_argument("--reference", default="car", help="reference word")
    p.add_argument("--out", default="sweep.csv", help="output CSV path")
    p.add_argument("--points", type=int, default=orchestrator.SWEEP_POINTS,
                   help="surface sample count per mesh")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("report", help="summarize a run directory")
    p.add_argument("--run", required=True, help="directory written by 'optimize'")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("example-config", help="print a starter config")
    p.set_defaults(func=cmd_example_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1  # usage problems are configuration errors
    try:
        return args.func(args)
    except (ConfigError, BadConfig) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except AeropromptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
