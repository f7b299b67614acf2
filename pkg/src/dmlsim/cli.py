"""Command-line driver for the simulation lab.

Verbs:
    run      execute one scenario and write tables, figures, and records
    compare  execute two scenarios and write side-by-side tables
    presets  list the built-in scenario presets
    replay   re-emit artifacts from a stored per-replication CSV

Exit codes: 0 success, 2 configuration error, 3 numerical failure during
the study, 4 I/O failure. The DMLSIM_OUT environment variable supplies the
default output directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import config as config_mod
from . import report as report_mod
from .dgp import ScenarioConfig, with_overrides
from .errors import DmlSimError, MissingSeries, ParseError, ValidationError
from .montecarlo import aggregate_from_vectors, run_study

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmlsim",
        description="Monte Carlo lab: ML forecasting vs causal inference for planning",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_common(p, config_sources=True):
        if config_sources:
            p.add_argument("--config", action="append", default=[], metavar="PATH",
                           help="scenario config file (key = value lines)")
            p.add_argument("--preset", action="append", default=[], metavar="NAME",
                           help="built-in scenario preset name")
            p.add_argument("--seed", type=int, default=None,
                           help="override the master seed")
            p.add_argument("--jobs", type=int, default=1,
                           help="worker threads for replications")
        p.add_argument("--out", default=None, metavar="DIR",
                       help="output directory (default: $DMLSIM_OUT or ./dmlsim-out)")
        p.add_argument("--format", choices=report_mod.FORMATS, default="csv",
                       help="table output format")

    run_p = sub.add_parser("run", help="run one scenario")
    add_common(run_p)

    cmp_p = sub.add_parser("compare", help="run two scenarios side by side")
    add_common(cmp_p)

    sub.add_parser("presets", help="list built-in presets")

    replay_p = sub.add_parser("replay", help="re-emit artifacts from a stored run")
    replay_p.add_argument("--config", action="append", default=[], metavar="PATH",
                          help="config.txt of a previous run (per_replication.csv "
                               "must sit next to it)")
    add_common(replay_p, config_sources=False)
    return parser


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("DMLSIM_OUT", "dmlsim-out"))


def _resolve_configs(args, expected: int) -> list[ScenarioConfig]:
    sources: list[ScenarioConfig] = []
    for name in args.preset:
        sources.append(config_mod.load_preset(name))
    for path in args.config:
        sources.append(config_mod.parse_config(Path(path).read_text()))
    if len(sources) != expected:
        raise ValidationError(
            f"expected {expected} scenario(s) via --preset/--config, got {len(sources)}"
        )
    if args.seed is not None:
        sources = [with_overrides(cfg, master_seed=args.seed) for cfg in sources]
    return sources


def _emit_run_artifacts(reports: dict, out_dir: Path, format: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = report_mod.RunManifest(
        config_path=str(out_dir / "config.txt"),
        output_directory=str(out_dir),
    )
    for label, rep in reports.items():
        suffix = f"_{label}" if len(reports) > 1 else ""
        cfg_path = out_dir / f"config{suffix}.txt"
        cfg_path.write_text(config_mod.serialize_config(rep.scenario))
        manifest.record(cfg_path, "ManifestJSONLike")
    report_mod.emit_tables(reports, out_dir, format=format, manifest=manifest)
    for label, rep in reports.items():
        sub_dir = out_dir / label if len(reports) > 1 else out_dir
        report_mod.emit_per_replication(rep, sub_dir, manifest=manifest)
        for which in report_mod.HISTOGRAM_SERIES:
            try:
                report_mod.emit_histogram(rep, which, sub_dir, manifest=manifest)
            except MissingSeries:
                continue  # pipeline not part of this run
    manifest.write(out_dir / "manifest.json")


def _label(cfg: ScenarioConfig, taken: set) -> str:
    base = f"n{cfg.n_train}"
    label = base
    counter = 2
    while label in taken:
        label = f"{base}-{counter}"
        counter += 1
    taken.add(label)
    return label


def _cmd_run(args) -> int:
    configs = _resolve_configs(args, expected=1)
    report = run_study(configs[0], parallelism=max(args.jobs, 1))
    _emit_run_artifacts({"run": report}, _out_dir(args), args.format)
    return EXIT_OK


def _cmd_compare(args) -> int:
    configs = _resolve_configs(args, expected=2)
    taken: set = set()
    reports = {}
    for cfg in configs:
        reports[_label(cfg, taken)] = run_study(cfg, parallelism=max(args.jobs, 1))
    _emit_run_artifacts(reports, _out_dir(args), args.format)
    return EXIT_OK


def _cmd_presets(_args) -> int:
    for name in config_mod.PRESETS:
        cfg = config_mod.load_preset(name)
        print(
            f"{name}: n_train={cfg.n_train} n_holdout={cfg.n_holdout} "
            f"p={cfg.p} replications={cfg.replications}"
        )
    return EXIT_OK


def _cmd_replay(args) -> int:
    if len(args.config) != 1:
        raise ValidationError("replay needs exactly one --config pointing at a run")
    cfg_path = Path(args.config[0])
    cfg = config_mod.parse_config(cfg_path.read_text())
    per_rep = report_mod.read_per_replication(cfg_path.parent / "per_replication.csv")
    report = aggregate_from_vectors(cfg, per_rep)
    _emit_run_artifacts({"run": report}, _out_dir(args), args.format)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "compare": _cmd_compare,
        "presets": _cmd_presets,
        "replay": _cmd_replay,
    }[args.verb]
    try:
        return handler(args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DmlSimError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
