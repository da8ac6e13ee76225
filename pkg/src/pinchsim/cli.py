"""Command-line front end.

Subcommands:
  run              one seeded trial, TrialResult printed as JSON
  sweep            config-driven Monte Carlo sweep; writes CSVs, SVG, sidecar
  oracle           brute-force gap study on small instances
  stability-audit  regenerate a results file's matchings from their seeds and
                   re-verify rates and stability certificates

Exit codes: 0 success, 1 config error, 2 runtime/instability error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .experiments import (
    POLICIES,
    ConfigError,
    ExperimentConfig,
    TrialError,
    _execute,
    aggregate,
    apply_sweep_value,
    emit_csv,
    emit_plot,
    load_experiment,
    parse_trials_csv,
    run_oracle_compare,
    run_sweep,
    run_trial,
)
from .scenario import ScenarioConfig

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


class AuditError(RuntimeError):
    """A results row failed re-verification."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinchsim",
        description="Pinching-antenna downlink simulator and matching optimizer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--trials", type=int, default=None, help="trial count override")
        p.add_argument(
            "--policy", type=str, default=None,
            help=f"comma-separated policies from {', '.join(POLICIES)}",
        )
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--sweep", type=str, default=None, help="sweep axis override")

    for name, help_text in (
        ("run", "run a single trial and print its record"),
        ("sweep", "run a config-driven sweep and emit CSV + plot"),
        ("oracle", "compare the swap search against exhaustive enumeration"),
        ("stability-audit", "re-certify a results CSV from its seeds"),
    ):
        p = sub.add_parser(name, help=help_text)
        add_common(p)
        if name == "stability-audit":
            p.add_argument("--results", type=Path, required=True, help="trial CSV to audit")
    return parser


def _load_config(args) -> tuple[ExperimentConfig, Path]:
    if args.config is not None:
        config, out_dir = load_experiment(args.config)
    else:
        config, out_dir = ExperimentConfig(), None
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.policy is not None:
        updates["policies"] = tuple(p.strip() for p in args.policy.split(",") if p.strip())
    if args.sweep is not None:
        updates["sweep"] = args.sweep
    if updates:
        config = dataclasses.replace(config, **updates)
    out = args.out if args.out is not None else Path(out_dir) if out_dir else Path("out")
    return config, out


def _cmd_run(args) -> int:
    config, _ = _load_config(args)
    policy = config.policies[0]
    result = run_trial(config.scenario, policy, trial=0, master_seed=config.master_seed)
    print(json.dumps(dataclasses.asdict(result), indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config, out = _load_config(args)
    results = run_sweep(config)
    summary = aggregate(results)
    trials_path = emit_csv(results, out / f"{config.sweep}_trials.csv")
    summary_path = emit_csv(summary, out / f"{config.sweep}_summary.csv")
    plot_path, sidecar_path = emit_plot(summary, out / f"{config.sweep}_sweep.svg")
    for path in (trials_path, summary_path, plot_path, sidecar_path):
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.config is not None:
        config, _ = load_experiment(args.config)
        scenario = config.scenario
        master_seed = config.master_seed
        trials = config.trials
    else:
        scenario = ScenarioConfig(num_users=2, num_antennas=3)
        master_seed = 0
        trials = 200
    if args.seed is not None:
        master_seed = args.seed
    if args.trials is not None:
        trials = args.trials
    report = run_oracle_compare(scenario, trials=trials, master_seed=master_seed)
    payload = {
        "trials": trials,
        "mean_gap": report.mean_gap,
        "max_gap": report.max_gap,
        "optimal_fraction": report.optimal_fraction,
        "all_stable": {
            policy: all(t.policy_stable[policy] for t in report.trials)
            for policy in report.mean_gap
        },
    }
    print(json.dumps(payload, indent=2))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        rows = [
            {
                "trial": t.trial,
                "seed": t.seed,
                "oracle_sum_rate": t.oracle_sum_rate,
                **{f"{p}_sum_rate": v for p, v in t.policy_sum_rate.items()},
                **{f"{p}_gap": v for p, v in t.policy_gap.items()},
                **{f"{p}_stable": v for p, v in t.policy_stable.items()},
            }
            for t in report.trials
        ]
        path = args.out / "oracle_trials.json"
        path.write_text(json.dumps(rows, indent=2) + "\n")
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_stability_audit(args) -> int:
    config, _ = _load_config(args)
    rows = parse_trials_csv(args.results)
    failures = []
    for row in rows:
        scenario_config = config.scenario
        if row.sweep_name != "none":
            scenario_config = apply_sweep_value(scenario_config, row.sweep_name, row.sweep_value)
        report, _, stable = _execute(scenario_config, row.policy, row.seed)
        if abs(report.total - row.sum_rate) > 1e-9 * max(1.0, abs(row.sum_rate)):
            failures.append(
                f"trial {row.trial} ({row.policy}): sum rate {row.sum_rate} "
                f"does not reproduce ({report.total})"
            )
        if stable != row.stable:
            failures.append(
                f"trial {row.trial} ({row.policy}): stability flag {row.stable} "
                f"does not reproduce ({stable})"
            )
        if row.policy in ("sum_rate", "los_distance") and not stable:
            failures.append(f"trial {row.trial} ({row.policy}): optimized matching unstable")
    if failures:
        for line in failures:
            print(f"AUDIT FAIL: {line}", file=sys.stderr)
        raise AuditError(f"{len(failures)} audit failure(s) in {args.results}")
    print(f"audit ok: {len(rows)} rows re-verified from seeds")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "oracle": _cmd_oracle,
        "stability-audit": _cmd_stability_audit,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AuditError, TrialError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
