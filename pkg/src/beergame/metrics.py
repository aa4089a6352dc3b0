"""Everything computed from weekly ledgers: totals, dispersion, tables.

Costs stay exact decimals end to end.  Standard deviations use the
sample (n-1) estimator throughout; the choice is pinned here so every
report and table agrees.  Table renderings show costs in whole units and
averages to one decimal; CSV exports keep two decimals for money.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from .engine import CHAIN, Role, WeekRecord


class MetricsError(ValueError):
    """Raised when a metric's preconditions are not met."""


class UndefinedRatioError(MetricsError):
    """Order variance ratio is undefined because demand never varied."""


def _require_records(records: Sequence[WeekRecord]) -> None:
    if not records:
        raise MetricsError("no weekly records to aggregate")


def _require_role(role: Role) -> None:
    if not isinstance(role, Role):
        raise MetricsError(f"unknown role {role!r}")


def total_cost(records: Sequence[WeekRecord], role: Role) -> Decimal:
    """Final cumulative cost for a role; equals the sum of its week costs."""
    _require_records(records)
    _require_role(role)
    return records[-1].roles[role].cumulative_cost


def order_series(records: Sequence[WeekRecord], role: Role) -> list[int]:
    _require_role(role)
    return [record.roles[role].order_placed for record in records]


def order_std(records: Sequence[WeekRecord], role: Role) -> float:
    """Sample standard deviation of a role's weekly orders."""
    series = order_series(records, role)
    if len(series) < 2:
        raise MetricsError("order dispersion needs at least two weeks of records")
    return statistics.stdev(series)


def bullwhip_ratio(records: Sequence[WeekRecord], role: Role) -> float:
    """Order variance over external demand variance (sample variances)."""
    series = order_series(records, role)
    demand = [record.external_demand for record in records]
    if len(series) < 2:
        raise MetricsError("variance ratio needs at least two weeks of records")
    demand_var = statistics.variance(demand)
    if demand_var == 0:
        raise UndefinedRatioError("external demand never varied; ratio undefined")
    return statistics.variance(series) / demand_var


@dataclass(frozen=True)
class RunSummary:
    """End-of-run aggregate for one game: cost and order dispersion per role.

    ``chain_total_cost`` normally equals the sum of the role costs; the
    explicit field lets externally published rows carry their printed
    total even when that total disagrees with its own cells.
    """

    role_total_cost: Mapping[Role, Decimal]
    role_order_std: Mapping[Role, float]
    chain_total_cost: Decimal
    avg_order_std: float
    bullwhip: Mapping[Role, float] | None = None

    @classmethod
    def from_records(cls, records: Sequence[WeekRecord]) -> "RunSummary":
        _require_records(records)
        costs = {role: total_cost(records, role) for role in CHAIN}
        stds = {role: order_std(records, role) for role in CHAIN}
        demand = [record.external_demand for record in records]
        ratios = None
        if len(demand) >= 2 and statistics.variance(demand) > 0:
            ratios = {role: bullwhip_ratio(records, role) for role in CHAIN}
        return cls(
            role_total_cost=costs,
            role_order_std=stds,
            chain_total_cost=sum(costs.values(), Decimal("0")),
            avg_order_std=statistics.fmean(stds.values()),
            bullwhip=ratios,
        )

    @classmethod
    def from_values(
        cls,
        costs: Mapping[Role, object],
        stds: Mapping[Role, float],
        chain_total: object | None = None,
    ) -> "RunSummary":
        """Build a row from externally supplied numbers (e.g. published data)."""
        dec_costs = {role: Decimal(str(costs[role])) for role in CHAIN}
        role_stds = {role: float(stds[role]) for role in CHAIN}
        total = (
            Decimal(str(chain_total))
            if chain_total is not None
            else sum(dec_costs.values(), Decimal("0"))
        )
        return cls(
            role_total_cost=dec_costs,
            role_order_std=role_stds,
            chain_total_cost=total,
            avg_order_std=statistics.fmean(role_stds.values()),
        )


@dataclass(frozen=True)
class GroupTable:
    """An ordered set of run rows plus their column-wise average row."""

    labels: tuple[str, ...]
    rows: tuple[RunSummary, ...]
    avg_role_cost: Mapping[Role, Decimal]
    avg_chain_cost: Decimal
    avg_role_std: Mapping[Role, float]
    avg_avg_std: float
    group_total_cost: Decimal


def group_table(runs: Sequence[RunSummary], labels: Sequence[str]) -> GroupTable:
    """Aggregate rows in the given order; averages are exact column means."""
    if not runs:
        raise MetricsError("a group table needs at least one run")
    if len(runs) != len(labels):
        raise MetricsError("each run needs exactly one label")
    n = len(runs)
    avg_cost = {
        role: sum((run.role_total_cost[role] for run in runs), Decimal("0")) / n
        for role in CHAIN
    }
    avg_std = {
        role: statistics.fmean(run.role_order_std[role] for run in runs)
        for role in CHAIN
    }
    return GroupTable(
        labels=tuple(labels),
        rows=tuple(runs),
        avg_role_cost=avg_cost,
        avg_chain_cost=sum((run.chain_total_cost for run in runs), Decimal("0")) / n,
        avg_role_std=avg_std,
        avg_avg_std=statistics.fmean(run.avg_order_std for run in runs),
        group_total_cost=sum((run.chain_total_cost for run in runs), Decimal("0")),
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Pairwise group comparison on total cost and order dispersion."""

    label_a: str
    label_b: str
    total_cost_a: Decimal
    total_cost_b: Decimal
    percent_difference: float  # (b - a) / a * 100
    avg_order_std_a: float
    avg_order_std_b: float
    std_ratio: float  # b / a
    lower_cost: str
    lower_order_std: str


def compare_groups(
    a: GroupTable, b: GroupTable, label_a: str = "A", label_b: str = "B"
) -> ComparisonReport:
    """Report absolute totals, relative cost difference, and dispersion pair."""
    if not a.rows or not b.rows:
        raise MetricsError("cannot compare empty groups")
    total_a, total_b = a.group_total_cost, b.group_total_cost
    if total_a == 0:
        percent = float("inf") if total_b != 0 else 0.0
    else:
        percent = float((total_b - total_a) / total_a * 100)
    std_a, std_b = a.avg_avg_std, b.avg_avg_std
    ratio = std_b / std_a if std_a != 0 else float("inf") if std_b else 0.0
    return ComparisonReport(
        label_a=label_a,
        label_b=label_b,
        total_cost_a=total_a,
        total_cost_b=total_b,
        percent_difference=percent,
        avg_order_std_a=std_a,
        avg_order_std_b=std_b,
        std_ratio=ratio,
        lower_cost=label_a if total_a <= total_b else label_b,
        lower_order_std=label_a if std_a <= std_b else label_b,
    )


@dataclass(frozen=True)
class PlayerReport:
    """One seat's weekly performance series plus end-of-run totals.

    This is the per-player artifact the game emits for outcome review:
    enough to redraw the weekly charts and to grade on final cost and
    order steadiness.
    """

    role: Role
    weeks: tuple[int, ...]
    demand: tuple[int, ...]
    shipped: tuple[int, ...]
    orders: tuple[int, ...]
    inventory: tuple[int, ...]
    backlog: tuple[int, ...]
    week_cost: tuple[Decimal, ...]
    cumulative_cost: tuple[Decimal, ...]
    total_cost: Decimal
    order_std: float | None

    def to_csv(self) -> str:
        lines = ["week,demand,shipped,order,inventory,backlog,week_cost,cum_cost"]
        for i, week in enumerate(self.weeks):
            lines.append(
                f"{week},{self.demand[i]},{self.shipped[i]},{self.orders[i]},"
                f"{self.inventory[i]},{self.backlog[i]},"
                f"{self.week_cost[i]:.2f},{self.cumulative_cost[i]:.2f}"
            )
        return "\n".join(lines) + "\n"

    def chart_payload(self) -> dict:
        """Series dictionary consumed by the dashboard charts."""
        return {
            "role": self.role.value,
            "weeks": list(self.weeks),
            "inventory": list(self.inventory),
            "backlog": list(self.backlog),
            "orders": list(self.orders),
            "week_cost": [str(cost) for cost in self.week_cost],
            "cumulative_cost": [str(cost) for cost in self.cumulative_cost],
            "total_cost": str(self.total_cost),
            "order_std": self.order_std,
        }


def player_report(records: Sequence[WeekRecord], role: Role) -> PlayerReport:
    """Weekly series and totals for one seat."""
    _require_records(records)
    _require_role(role)
    entries = [record.roles[role] for record in records]
    return PlayerReport(
        role=role,
        weeks=tuple(record.week for record in records),
        demand=tuple(entry.demand_received for entry in entries),
        shipped=tuple(entry.shipped for entry in entries),
        orders=tuple(entry.order_placed for entry in entries),
        inventory=tuple(entry.ending_inventory for entry in entries),
        backlog=tuple(entry.ending_backlog for entry in entries),
        week_cost=tuple(entry.week_cost for entry in entries),
        cumulative_cost=tuple(entry.cumulative_cost for entry in entries),
        total_cost=entries[-1].cumulative_cost,
        order_std=order_std(records, role) if len(records) >= 2 else None,
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _whole(amount: Decimal) -> str:
    return str(amount.quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def _one_decimal(amount: Decimal) -> str:
    return str(amount.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def group_table_text(table: GroupTable, title: str = "Group") -> str:
    """Fixed-width table: per-role costs, chain total, per-role order
    dispersion, and the row mean, with a final column-average row."""
    headers = [
        title, "R", "W", "D", "F", "Total Cost",
        "STD R", "STD W", "STD D", "STD F", "AVG",
    ]
    body: list[list[str]] = []
    for label, run in zip(table.labels, table.rows):
        body.append(
            [label]
            + [_whole(run.role_total_cost[role]) for role in CHAIN]
            + [_whole(run.chain_total_cost)]
            + [f"{run.role_order_std[role]:.1f}" for role in CHAIN]
            + [f"{run.avg_order_std:.1f}"]
        )
    body.append(
        ["AVG"]
        + [_one_decimal(table.avg_role_cost[role]) for role in CHAIN]
        + [_whole(table.group_total_cost)]
        + [f"{table.avg_role_std[role]:.1f}" for role in CHAIN]
        + [f"{table.avg_avg_std:.1f}"]
    )
    widths = [
        max(len(headers[col]), *(len(row[col]) for row in body))
        for col in range(len(headers))
    ]
    lines = [
        "  ".join(header.ljust(widths[i]) for i, header in enumerate(headers)).rstrip()
    ]
    lines.append("  ".join("-" * width for width in widths))
    for row in body:
        lines.append(
            "  ".join(cell.rjust(widths[i]) if i else cell.ljust(widths[i])
                      for i, cell in enumerate(row)).rstrip()
        )
    return "\n".join(lines) + "\n"


def group_table_csv(table: GroupTable) -> str:
    lines = [
        "label,retailer_cost,wholesaler_cost,distributor_cost,factory_cost,"
        "total_cost,retailer_order_std,wholesaler_order_std,"
        "distributor_order_std,factory_order_std,avg_order_std"
    ]
    for label, run in zip(table.labels, table.rows):
        lines.append(
            f"{label},"
            + ",".join(f"{run.role_total_cost[role]:.2f}" for role in CHAIN)
            + f",{run.chain_total_cost:.2f},"
            + ",".join(f"{run.role_order_std[role]:.3f}" for role in CHAIN)
            + f",{run.avg_order_std:.3f}"
        )
    lines.append(
        "AVG,"
        + ",".join(f"{table.avg_role_cost[role]:.2f}" for role in CHAIN)
        + f",{table.group_total_cost:.2f},"
        + ",".join(f"{table.avg_role_std[role]:.3f}" for role in CHAIN)
        + f",{table.avg_avg_std:.3f}"
    )
    return "\n".join(lines) + "\n"


def comparison_text(report: ComparisonReport) -> str:
    lines = [
        f"Total cost {report.label_a}: {_whole(report.total_cost_a)}",
        f"Total cost {report.label_b}: {_whole(report.total_cost_b)}",
        f"Cost difference ({report.label_b} vs {report.label_a}): "
        f"{report.percent_difference:+.1f}%",
        f"Average order STD {report.label_a}: {report.avg_order_std_a:.1f}",
        f"Average order STD {report.label_b}: {report.avg_order_std_b:.1f}",
        f"Order STD ratio ({report.label_b} / {report.label_a}): "
        f"{report.std_ratio:.2f}",
        f"Lower total cost: group {report.lower_cost}",
        f"Lower order STD: group {report.lower_order_std}",
    ]
    return "\n".join(lines) + "\n"
