"""Batch experiment machinery: seeded Monte Carlo trials over one sweep axis,
aggregation, CSV/plot emission, and the brute-force comparison study.

Outputs are deterministic given (config, master seed): trial seeds derive from
the master seed and trial index only, so every sweep value and policy sees the
same per-trial world (paired comparisons). Per-trial wall time is measured and
kept on the in-memory records but zeroed in emitted CSVs to keep files
byte-reproducible.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import rate
from .channel import build_channel_tensor
from .matching import (
    LOS_DISTANCE,
    SUM_RATE,
    AlgorithmStats,
    Matching,
    certify_stable,
    exhaustive_search,
    run_swap_matching,
)
from .scenario import (
    Scenario,
    ScenarioConfig,
    build_scenario,
    derive_trial_seed,
    fixed_center_variant,
    random_baseline,
)

POLICIES = ("sum_rate", "los_distance", "random_baseline", "fixed_center")
SWEEP_AXES = ("transmit_power_dbm", "blockage_radius", "scatterer_count")
_AXIS_FIELD = {
    "transmit_power_dbm": "transmit_power_dbm",
    "blockage_radius": "blockage_radius",
    "scatterer_count": "num_scatterers",
}


class ConfigError(ValueError):
    """Invalid experiment configuration (unknown key, bad axis, bad policy)."""


class TrialError(RuntimeError):
    """A trial failed; the message identifies (seed, sweep value, policy)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a base scenario, a single axis with its values, policies,
    and a Monte Carlo trial count."""

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    sweep: str = "transmit_power_dbm"
    sweep_values: tuple[float, ...] = (0.0, 10.0, 20.0, 30.0, 40.0)
    policies: tuple[str, ...] = POLICIES
    trials: int = 500
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.sweep not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.sweep!r}; pick one of {SWEEP_AXES}")
        if not self.sweep_values:
            raise ConfigError("sweep_values must be non-empty")
        for policy in self.policies:
            if policy not in POLICIES:
                raise ConfigError(f"unknown policy {policy!r}; pick from {POLICIES}")
        if not self.policies:
            raise ConfigError("at least one policy required")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        if self.sweep == "scatterer_count":
            for value in self.sweep_values:
                if float(value) != int(value):
                    raise ConfigError("scatterer_count sweep values must be integers")


@dataclass(frozen=True)
class TrialResult:
    """Per-trial record; ``wall_time_ms`` is measured, not reproducible."""

    trial: int
    seed: int
    policy: str
    sweep_name: str
    sweep_value: float
    per_user_rates: tuple[float, ...]
    sum_rate: float
    cycles: int
    accepted_swaps: int
    preference_evaluations: int
    stable: bool
    wall_time_ms: float


@dataclass(frozen=True)
class SummaryRow:
    """Aggregate over trials for one (policy, sweep value) cell."""

    policy: str
    sweep_name: str
    sweep_value: float
    count: int
    mean_sum_rate: float
    std_sum_rate: float
    mean_min_user_rate: float


OPTIMIZED_POLICIES = ("sum_rate", "los_distance")


def _execute(config: ScenarioConfig, policy: str, seed: int):
    """Run one trial body from an explicit scenario seed.

    Returns (report, stats, stable). ``sum_rate`` and ``los_distance`` run the
    swap search; ``random_baseline`` reports the seeded initial matching, and
    ``fixed_center`` is the conventional benchmark: antennas forced to the
    center column and the same unoptimized seeded assignment. The stability
    certificate uses the policy's own preference where one exists and the
    sum-rate preference for the unoptimized policies (informational there).
    """
    scenario = build_scenario(config, seed)
    if policy == "fixed_center":
        scenario = fixed_center_variant(scenario)
    tensor = build_channel_tensor(scenario)
    initial = random_baseline(scenario)
    if policy in OPTIMIZED_POLICIES:
        preference = LOS_DISTANCE if policy == "los_distance" else SUM_RATE
        final, stats = run_swap_matching(initial, tensor, scenario.power, preference)
    else:
        final = initial
        stats = AlgorithmStats()
        preference = SUM_RATE
    report = rate.sum_rate(tensor, final, scenario.power)
    stable = certify_stable(final, tensor, scenario.power, preference)
    return report, stats, stable


def run_trial(
    config: ScenarioConfig,
    policy: str,
    trial: int,
    master_seed: int,
    sweep_name: str = "none",
    sweep_value: float = 0.0,
) -> TrialResult:
    """Derive the trial seed, run the policy pipeline, and package the record."""
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}")
    start = time.perf_counter()
    seed = derive_trial_seed(master_seed, trial)
    report, stats, stable = _execute(config, policy, seed)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    return TrialResult(
        trial=trial,
        seed=seed,
        policy=policy,
        sweep_name=sweep_name,
        sweep_value=float(sweep_value),
        per_user_rates=tuple(float(r) for r in report.per_user),
        sum_rate=report.total,
        cycles=stats.cycles,
        accepted_swaps=stats.accepted_swaps,
        preference_evaluations=stats.preference_evaluations,
        stable=stable,
        wall_time_ms=elapsed_ms,
    )


def apply_sweep_value(config: ScenarioConfig, sweep: str, value: float) -> ScenarioConfig:
    """Scenario config with one axis overridden; scatterer counts become ints."""
    field_name = _AXIS_FIELD[sweep]
    cast_value = int(value) if field_name == "num_scatterers" else float(value)
    return replace(config, **{field_name: cast_value})


def run_sweep(config: ExperimentConfig) -> list[TrialResult]:
    """Every (sweep value, policy, trial) combination, in that loop order."""
    results: list[TrialResult] = []
    for value in config.sweep_values:
        scenario_config = apply_sweep_value(config.scenario, config.sweep, value)
        for policy in config.policies:
            for trial in range(config.trials):
                try:
                    results.append(
                        run_trial(
                            scenario_config,
                            policy,
                            trial,
                            config.master_seed,
                            sweep_name=config.sweep,
                            sweep_value=float(value),
                        )
                    )
                except Exception as exc:
                    seed = derive_trial_seed(config.master_seed, trial)
                    raise TrialError(
                        f"trial failed: seed={seed} sweep={config.sweep}={value} policy={policy}"
                    ) from exc
    return results


def aggregate(results: Sequence[TrialResult]) -> list[SummaryRow]:
    """Mean/std/count of the sum rate plus the mean worst-user rate per cell.

    Cells appear in order of first appearance; std is the sample standard
    deviation (0 for a single trial).
    """
    if not results:
        raise ValueError("no results to aggregate")
    order: list[tuple[str, str, float]] = []
    buckets: dict[tuple[str, str, float], list[TrialResult]] = {}
    for result in results:
        key = (result.policy, result.sweep_name, result.sweep_value)
        if key not in buckets:
            buckets[key] = []
            order.append(key)
        buckets[key].append(result)
    rows = []
    for policy, sweep_name, sweep_value in order:
        group = buckets[(policy, sweep_name, sweep_value)]
        values = np.array([r.sum_rate for r in group])
        minima = np.array([min(r.per_user_rates) for r in group])
        rows.append(
            SummaryRow(
                policy=policy,
                sweep_name=sweep_name,
                sweep_value=sweep_value,
                count=len(group),
                mean_sum_rate=float(values.mean()),
                std_sum_rate=float(values.std(ddof=1)) if len(group) > 1 else 0.0,
                mean_min_user_rate=float(minima.mean()),
            )
        )
    return rows


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def emit_csv(records: Sequence[TrialResult] | Sequence[SummaryRow], path: str | Path) -> Path:
    """Write trial or summary records; floats carry 17 significant digits.

    Trial CSVs zero the wall_time_ms column so reruns are byte-identical; the
    measured timing stays on the in-memory records.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        if records and isinstance(records[0], SummaryRow):
            writer.writerow(
                ["policy", "sweep_name", "sweep_value", "count",
                 "mean_sum_rate", "std_sum_rate", "mean_min_user_rate"]
            )
            for row in records:
                writer.writerow(
                    [row.policy, row.sweep_name, _fmt(row.sweep_value), row.count,
                     _fmt(row.mean_sum_rate), _fmt(row.std_sum_rate),
                     _fmt(row.mean_min_user_rate)]
                )
        else:
            num_users = len(records[0].per_user_rates) if records else 0
            header = ["trial", "seed", "policy", "sweep_name", "sweep_value", "sum_rate"]
            header += [f"rate_user_{i + 1}" for i in range(num_users)]
            header += ["cycles", "accepted_swaps", "preference_evaluations", "stable",
                       "wall_time_ms"]
            writer.writerow(header)
            for result in records:
                row = [result.trial, result.seed, result.policy, result.sweep_name,
                       _fmt(result.sweep_value), _fmt(result.sum_rate)]
                row += [_fmt(r) for r in result.per_user_rates]
                row += [result.cycles, result.accepted_swaps, result.preference_evaluations,
                        "true" if result.stable else "false", _fmt(0.0)]
                writer.writerow(row)
    return path


def parse_trials_csv(path: str | Path) -> list[TrialResult]:
    """Read back a trial CSV written by :func:`emit_csv`."""
    results = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rate_cols = [i for i, name in enumerate(header) if name.startswith("rate_user_")]
        col = {name: i for i, name in enumerate(header)}
        for row in reader:
            results.append(
                TrialResult(
                    trial=int(row[col["trial"]]),
                    seed=int(row[col["seed"]]),
                    policy=row[col["policy"]],
                    sweep_name=row[col["sweep_name"]],
                    sweep_value=float(row[col["sweep_value"]]),
                    per_user_rates=tuple(float(row[i]) for i in rate_cols),
                    sum_rate=float(row[col["sum_rate"]]),
                    cycles=int(row[col["cycles"]]),
                    accepted_swaps=int(row[col["accepted_swaps"]]),
                    preference_evaluations=int(row[col["preference_evaluations"]]),
                    stable=row[col["stable"]] == "true",
                    wall_time_ms=float(row[col["wall_time_ms"]]),
                )
            )
    return results


def emit_plot(summary: Sequence[SummaryRow], path: str | Path) -> tuple[Path, Path]:
    """Render mean sum rate vs sweep value (one line per policy) as SVG.

    Also writes a machine-readable sidecar ``<stem>_points.json`` holding the
    exact plotted points; tests and downstream tooling assert on the sidecar,
    not on pixels. Both files are byte-reproducible.
    """
    if not summary:
        raise ValueError("nothing to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sweep_name = summary[0].sweep_name
    series: dict[str, list[tuple[float, float]]] = {}
    for row in summary:
        series.setdefault(row.policy, []).append((row.sweep_value, row.mean_sum_rate))

    with plt.rc_context({"svg.hashsalt": "pinchsim"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for policy, points in series.items():
            points = sorted(points)
            ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=policy)
        ax.set_xlabel(sweep_name)
        ax.set_ylabel("mean sum rate (bit/s/Hz)")
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

    sidecar = path.with_name(path.stem + "_points.json")
    payload = {
        "sweep": sweep_name,
        "series": [
            {"policy": policy, "points": [[x, y] for x, y in sorted(points)]}
            for policy, points in series.items()
        ],
    }
    sidecar.write_text(json.dumps(payload, indent=2) + "\n")
    return path, sidecar


@dataclass(frozen=True)
class OracleTrial:
    """One small-instance trial: brute-force optimum vs both search policies."""

    trial: int
    seed: int
    oracle_sum_rate: float
    policy_sum_rate: dict[str, float]
    policy_gap: dict[str, float]
    policy_stable: dict[str, bool]


@dataclass(frozen=True)
class OracleReport:
    trials: tuple[OracleTrial, ...]
    mean_gap: dict[str, float]
    max_gap: dict[str, float]
    optimal_fraction: dict[str, float]


def run_oracle_compare(
    config: ScenarioConfig,
    trials: int,
    master_seed: int,
    budget: int = 1_000_000,
) -> OracleReport:
    """Compare the swap search against exhaustive enumeration on small instances."""
    records = []
    for trial in range(trials):
        seed = derive_trial_seed(master_seed, trial)
        scenario = build_scenario(config, seed)
        tensor = build_channel_tensor(scenario)
        _, oracle_value = exhaustive_search(tensor, scenario.power, budget=budget)
        initial = random_baseline(scenario)
        rates: dict[str, float] = {}
        gaps: dict[str, float] = {}
        stables: dict[str, bool] = {}
        for policy, preference in (("sum_rate", SUM_RATE), ("los_distance", LOS_DISTANCE)):
            final, _ = run_swap_matching(initial, tensor, scenario.power, preference)
            achieved = rate.sum_rate(tensor, final, scenario.power).total
            rates[policy] = achieved
            gaps[policy] = (oracle_value - achieved) / oracle_value if oracle_value > 0 else 0.0
            stables[policy] = certify_stable(final, tensor, scenario.power, preference)
        records.append(
            OracleTrial(
                trial=trial,
                seed=seed,
                oracle_sum_rate=oracle_value,
                policy_sum_rate=rates,
                policy_gap=gaps,
                policy_stable=stables,
            )
        )
    mean_gap = {}
    max_gap = {}
    optimal_fraction = {}
    for policy in ("sum_rate", "los_distance"):
        gap_values = np.array([t.policy_gap[policy] for t in records])
        mean_gap[policy] = float(gap_values.mean())
        max_gap[policy] = float(gap_values.max())
        optimal_fraction[policy] = float((gap_values <= 1e-9).mean())
    return OracleReport(
        trials=tuple(records),
        mean_gap=mean_gap,
        max_gap=max_gap,
        optimal_fraction=optimal_fraction,
    )


# --- config documents ------------------------------------------------------

_SCENARIO_KEYS = tuple(ScenarioConfig.__dataclass_fields__)
_EXPERIMENT_KEYS = ("sweep", "sweep_values", "policies", "trials", "master_seed", "out_dir")


def experiment_from_document(doc: dict) -> tuple[ExperimentConfig, str | None]:
    """Build an ExperimentConfig from a flat config document.

    Unknown keys are errors so sweep-name typos cannot silently no-op.
    Returns the config and the optional output directory named in the file.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a flat JSON object")
    unknown = set(doc) - set(_SCENARIO_KEYS) - set(_EXPERIMENT_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    scenario_kwargs = {}
    for key in _SCENARIO_KEYS:
        if key in doc:
            value = doc[key]
            if key == "blockage_centers" and value is not None:
                value = tuple((float(x), float(y)) for x, y in value)
            if key == "waveguide_y" and value is not None:
                value = tuple(float(y) for y in value)
            scenario_kwargs[key] = value
    try:
        kwargs = {"scenario": ScenarioConfig(**scenario_kwargs)}
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if "sweep" in doc:
        kwargs["sweep"] = doc["sweep"]
    if "sweep_values" in doc:
        kwargs["sweep_values"] = tuple(float(v) for v in doc["sweep_values"])
    if "policies" in doc:
        kwargs["policies"] = tuple(doc["policies"])
    if "trials" in doc:
        kwargs["trials"] = int(doc["trials"])
    if "master_seed" in doc:
        kwargs["master_seed"] = int(doc["master_seed"])
    try:
        config = ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return config, doc.get("out_dir")


def load_experiment(path: str | Path) -> tuple[ExperimentConfig, str | None]:
    """Parse a JSON config file; malformed content raises ConfigError."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return experiment_from_document(doc)
