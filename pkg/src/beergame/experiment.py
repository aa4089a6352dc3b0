"""Batch harness: seeded replications of grouped scenarios, plus exports.

A scenario file is plain INI: a ``[game]`` section with the game
constants, an optional ``[policies]`` section assigning a policy to each
seat, an ``[experiment]`` section with the replication plan, and one
``[group.<label>]`` section per study group.  Groups inherit the base
game and override visibility and policies; subgroup k of every group
plays the same seed, so any difference between groups is attributable to
the group settings alone.
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass, replace
from decimal import Decimal
from pathlib import Path
from typing import Mapping, Sequence

from .engine import (
    CHAIN,
    ConfigurationError,
    EngineError,
    GameConfig,
    GameState,
    Human,
    Role,
    VisibilityMode,
    WeekRecord,
    new_game,
    records_to_csv,
    run_to_horizon,
)
from .metrics import (
    ComparisonReport,
    GroupTable,
    RunSummary,
    compare_groups,
    comparison_text,
    group_table,
    group_table_csv,
    group_table_text,
)
from .policy import PolicySpec, format_policy_spec, parse_policy_spec

#: Environment override for the replication base seed.
SEED_ENV_VAR = "BEERGAME_SEED"

EXPORT_FORMATS = ("csv", "text")


class HeadlessModeError(EngineError):
    """A batch run was asked to play a live seat."""


class ExperimentConfigError(ConfigurationError):
    """A scenario file is malformed."""


@dataclass(frozen=True)
class GroupSpec:
    """One study group: visibility, per-seat policy overrides, metadata.

    ``interactive_role`` records which seat a live player would occupy in
    a hosted session; headless runs carry it through to the outputs but
    give it no behavioral effect.
    """

    label: str
    visibility: VisibilityMode
    policy_overrides: Mapping[Role, PolicySpec]
    interactive_role: Role | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    base: GameConfig
    groups: tuple[GroupSpec, ...]
    subgroups_per_group: int = 7
    base_seed: int = 1
    explicit_seeds: tuple[int, ...] | None = None

    def validate(self) -> None:
        self.base.validate()
        if not self.groups:
            raise ExperimentConfigError("groups", "at least one group is required")
        labels = [group.label for group in self.groups]
        if len(set(labels)) != len(labels):
            raise ExperimentConfigError("groups", f"labels must be unique, got {labels}")
        if self.subgroups_per_group < 1:
            raise ExperimentConfigError(
                "subgroups_per_group", f"must be >= 1, got {self.subgroups_per_group}"
            )
        if (
            self.explicit_seeds is not None
            and len(self.explicit_seeds) < self.subgroups_per_group
        ):
            raise ExperimentConfigError(
                "seeds",
                f"need at least {self.subgroups_per_group} seeds, "
                f"got {len(self.explicit_seeds)}",
            )

    def seeds(self) -> list[int]:
        if self.explicit_seeds is not None:
            return list(self.explicit_seeds[: self.subgroups_per_group])
        return [self.base_seed + k for k in range(self.subgroups_per_group)]


@dataclass(frozen=True)
class GroupResult:
    spec: GroupSpec
    subgroup_labels: tuple[str, ...]
    seeds: tuple[int, ...]
    table: GroupTable
    records: tuple[tuple[WeekRecord, ...], ...]


@dataclass(frozen=True)
class BatchResult:
    groups: tuple[GroupResult, ...]
    comparison: ComparisonReport | None


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

def _read_ini(path: str | Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    if not read:
        raise ExperimentConfigError("config", f"cannot read scenario file {path}")
    return parser


_GAME_INT_FIELDS = {
    "horizon_weeks",
    "review_period_weeks",
    "shipping_delay_weeks",
    "order_delay_weeks",
    "rng_seed",
    "initial_inventory",
    "initial_pipeline_fill",
}
_GAME_FLOAT_FIELDS = {"demand_mean", "demand_std", "service_factor_z"}
_GAME_MONEY_FIELDS = {"holding_cost", "backorder_cost"}


def _game_config_from_sections(parser: configparser.ConfigParser) -> GameConfig:
    kwargs: dict = {}
    if parser.has_section("game"):
        for key, raw in parser.items("game"):
            value = raw.strip()
            try:
                if key in _GAME_INT_FIELDS:
                    kwargs[key] = int(value)
                elif key in _GAME_FLOAT_FIELDS:
                    kwargs[key] = float(value)
                elif key in _GAME_MONEY_FIELDS:
                    kwargs[key] = value
                elif key == "visibility":
                    kwargs[key] = VisibilityMode(value.lower())
                elif key == "demand_sequence":
                    kwargs[key] = tuple(
                        int(token) for token in value.split(",") if token.strip()
                    )
                else:
                    raise ExperimentConfigError(key, "unknown [game] key")
            except (ValueError, ArithmeticError) as exc:
                if isinstance(exc, ExperimentConfigError):
                    raise
                raise ExperimentConfigError(key, f"bad value {value!r}") from exc
    if parser.has_section("policies"):
        kwargs["policies"] = _policies_from_items(parser.items("policies"))
    config = GameConfig(**kwargs)
    config.validate()
    return config


def _policies_from_items(items) -> dict[Role, PolicySpec]:
    policies: dict[Role, PolicySpec] = {}
    for key, value in items:
        try:
            role = Role(key.lower())
        except ValueError:
            raise ExperimentConfigError("policies", f"unknown role {key!r}") from None
        policies[role] = parse_policy_spec(value)
    return policies


def load_game_config(path: str | Path) -> GameConfig:
    """Load the ``[game]`` and ``[policies]`` sections of a scenario file."""
    return _game_config_from_sections(_read_ini(path))


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Load a full scenario: game base, plan, and group sections.

    ``BEERGAME_SEED`` in the environment overrides the file's base seed;
    an explicit seed list always wins over both.
    """
    parser = _read_ini(path)
    base = _game_config_from_sections(parser)

    subgroups = 7
    base_seed = 1
    explicit_seeds: tuple[int, ...] | None = None
    if parser.has_section("experiment"):
        for key, raw in parser.items("experiment"):
            value = raw.strip()
            try:
                if key == "subgroups_per_group":
                    subgroups = int(value)
                elif key == "base_seed":
                    base_seed = int(value)
                elif key == "seeds":
                    explicit_seeds = tuple(
                        int(token) for token in value.split(",") if token.strip()
                    )
                else:
                    raise ExperimentConfigError(key, "unknown [experiment] key")
            except ValueError:
                raise ExperimentConfigError(key, f"bad value {value!r}") from None
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            base_seed = int(env_seed)
        except ValueError:
            raise ExperimentConfigError(
                SEED_ENV_VAR, f"must be an integer, got {env_seed!r}"
            ) from None

    groups: list[GroupSpec] = []
    for section in parser.sections():
        if not section.startswith("group."):
            continue
        label = section.split(".", 1)[1]
        visibility = base.visibility
        interactive: Role | None = None
        overrides: list[tuple[str, str]] = []
        for key, raw in parser.items(section):
            value = raw.strip()
            if key == "visibility":
                try:
                    visibility = VisibilityMode(value.lower())
                except ValueError:
                    raise ExperimentConfigError(
                        "visibility", f"expected full or restricted, got {value!r}"
                    ) from None
            elif key == "interactive_role":
                try:
                    interactive = Role(value.lower())
                except ValueError:
                    raise ExperimentConfigError(
                        "interactive_role", f"unknown role {value!r}"
                    ) from None
            else:
                overrides.append((key, value))
        groups.append(
            GroupSpec(
                label=label,
                visibility=visibility,
                policy_overrides=_policies_from_items(overrides),
                interactive_role=interactive,
            )
        )

    config = ExperimentConfig(
        base=base,
        groups=tuple(groups),
        subgroups_per_group=subgroups,
        base_seed=base_seed,
        explicit_seeds=explicit_seeds,
    )
    config.validate()
    return config


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def run_single(config: GameConfig) -> tuple[RunSummary, list[WeekRecord]]:
    """Play one all-agent game to its horizon."""
    config.validate()
    for role in CHAIN:
        if isinstance(config.policy_for(role), Human):
            raise HeadlessModeError(
                f"{role.value} is a live seat; host the game with the serve command"
            )
    state: GameState = new_game(config)
    records = run_to_horizon(state)
    return RunSummary.from_records(records), records


def _group_game_config(base: GameConfig, group: GroupSpec, seed: int) -> GameConfig:
    merged = dict(base.policies)
    merged.update(group.policy_overrides)
    return replace(
        base, visibility=group.visibility, policies=merged, rng_seed=seed
    )


def run_batch(config: ExperimentConfig) -> BatchResult:
    """Run every group over the shared seed list and aggregate tables.

    Subgroup labels number consecutively across groups (SG1, SG2, ...).
    """
    config.validate()
    seeds = config.seeds()
    results: list[GroupResult] = []
    counter = 0
    for group in config.groups:
        labels: list[str] = []
        summaries: list[RunSummary] = []
        all_records: list[tuple[WeekRecord, ...]] = []
        for seed in seeds:
            counter += 1
            label = f"SG{counter}"
            try:
                summary, records = run_single(
                    _group_game_config(config.base, group, seed)
                )
            except EngineError as exc:
                raise type(exc)(
                    f"group {group.label}, subgroup {label}, seed {seed}: {exc}"
                ) from exc
            labels.append(label)
            summaries.append(summary)
            all_records.append(tuple(records))
        results.append(
            GroupResult(
                spec=group,
                subgroup_labels=tuple(labels),
                seeds=tuple(seeds),
                table=group_table(summaries, labels),
                records=tuple(all_records),
            )
        )
    comparison = None
    if len(results) >= 2:
        comparison = compare_groups(
            results[0].table,
            results[1].table,
            label_a=results[0].spec.label,
            label_b=results[1].spec.label,
        )
    return BatchResult(groups=tuple(results), comparison=comparison)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def batch_result_to_dict(result: BatchResult) -> dict:
    """JSON-safe form of a batch result (tables only, not week ledgers)."""
    groups = []
    for group in result.groups:
        subgroups = []
        for label, seed, run in zip(
            group.subgroup_labels, group.seeds, group.table.rows
        ):
            subgroups.append(
                {
                    "label": label,
                    "seed": seed,
                    "costs": {
                        role.value: str(run.role_total_cost[role]) for role in CHAIN
                    },
                    "chain_total": str(run.chain_total_cost),
                    "order_stds": {
                        role.value: run.role_order_std[role] for role in CHAIN
                    },
                    "avg_order_std": run.avg_order_std,
                }
            )
        groups.append(
            {
                "label": group.spec.label,
                "visibility": group.spec.visibility.value,
                "interactive_role": group.spec.interactive_role.value
                if group.spec.interactive_role
                else None,
                "policies": {
                    role.value: format_policy_spec(spec)
                    for role, spec in group.spec.policy_overrides.items()
                },
                "subgroups": subgroups,
            }
        )
    comparison = None
    if result.comparison is not None:
        c = result.comparison
        comparison = {
            "label_a": c.label_a,
            "label_b": c.label_b,
            "total_cost_a": str(c.total_cost_a),
            "total_cost_b": str(c.total_cost_b),
            "percent_difference": c.percent_difference,
            "avg_order_std_a": c.avg_order_std_a,
            "avg_order_std_b": c.avg_order_std_b,
            "std_ratio": c.std_ratio,
            "lower_cost": c.lower_cost,
            "lower_order_std": c.lower_order_std,
        }
    return {"v": 1, "groups": groups, "comparison": comparison}


def tables_from_dict(data: Mapping) -> tuple[list[tuple[str, GroupTable]], dict | None]:
    """Rebuild group tables from the exported JSON form."""
    tables: list[tuple[str, GroupTable]] = []
    for group in data["groups"]:
        labels = [sub["label"] for sub in group["subgroups"]]
        rows = [
            RunSummary.from_values(
                costs={Role(name): value for name, value in sub["costs"].items()},
                stds={Role(name): value for name, value in sub["order_stds"].items()},
                chain_total=sub["chain_total"],
            )
            for sub in group["subgroups"]
        ]
        tables.append((group["label"], group_table(rows, labels)))
    return tables, data.get("comparison")


def export_batch(
    result: BatchResult,
    out_dir: str | Path,
    formats: Sequence[str] = EXPORT_FORMATS,
    include_ledgers: bool = True,
) -> list[Path]:
    """Write tables (and per-run week ledgers) under ``out_dir``.

    Output bytes are a pure function of the batch result.  Nothing is
    created for an empty result or an unknown format.
    """
    if not result.groups:
        raise ValueError("nothing to export: batch result has no groups")
    for fmt in formats:
        if fmt not in EXPORT_FORMATS:
            raise ValueError(f"unknown export format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def _write(path: Path, text: str) -> None:
        path.write_text(text, encoding="utf-8")
        written.append(path)

    for group in result.groups:
        if "csv" in formats:
            _write(out / f"group_{group.spec.label}.csv", group_table_csv(group.table))
        if "text" in formats:
            _write(
                out / f"group_{group.spec.label}.txt",
                group_table_text(group.table, title=f"Group {group.spec.label}"),
            )
    if result.comparison is not None and "text" in formats:
        _write(out / "comparison.txt", comparison_text(result.comparison))
    _write(
        out / "results.json",
        json.dumps(batch_result_to_dict(result), indent=2, sort_keys=True) + "\n",
    )
    if include_ledgers:
        ledger_dir = out / "runs"
        ledger_dir.mkdir(exist_ok=True)
        for group in result.groups:
            for label, records in zip(group.subgroup_labels, group.records):
                path = ledger_dir / f"{group.spec.label}_{label}.csv"
                _write(path, records_to_csv(records))
    return written


def render_report(results_path: str | Path, fmt: str) -> str:
    """Re-render exported results: the ``report`` command's core."""
    if fmt not in EXPORT_FORMATS:
        raise ValueError(f"unknown report format {fmt!r}")
    data = json.loads(Path(results_path).read_text(encoding="utf-8"))
    tables, comparison = tables_from_dict(data)
    chunks: list[str] = []
    for label, table in tables:
        if fmt == "csv":
            chunks.append(group_table_csv(table))
        else:
            chunks.append(group_table_text(table, title=f"Group {label}"))
    if comparison is not None and fmt == "text":
        report = ComparisonReport(
            label_a=comparison["label_a"],
            label_b=comparison["label_b"],
            total_cost_a=Decimal(comparison["total_cost_a"]),
            total_cost_b=Decimal(comparison["total_cost_b"]),
            percent_difference=comparison["percent_difference"],
            avg_order_std_a=comparison["avg_order_std_a"],
            avg_order_std_b=comparison["avg_order_std_b"],
            std_ratio=comparison["std_ratio"],
            lower_cost=comparison["lower_cost"],
            lower_order_std=comparison["lower_order_std"],
        )
        chunks.append(comparison_text(report))
    return "\n".join(chunks)
