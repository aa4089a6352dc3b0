"""Acceptance suite: every release criterion at its pinned tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.
"""

from __future__ import annotations

import statistics
import time
from contextlib import contextmanager
from decimal import Decimal

from fastapi.testclient import TestClient

from beergame import (
    CHAIN,
    BaseStock,
    ForecastBaseStock,
    Role,
    VisibilityMode,
    advance_week,
    new_game,
    records_to_csv,
    run_to_horizon,
)
from beergame.experiment import ExperimentConfig, GroupSpec, run_batch, run_single
from beergame.metrics import compare_groups, group_table
from beergame.server import create_app, replay_log
from conftest import all_agent_policies, default_config
from reference_tables import GROUP_A_ROWS, GROUP_B_ROWS, build_rows
from test_engine import EXPECTED_TRACE, hand_trace_config
import test_properties


@contextmanager
def criterion(name: str):
    try:
        yield
    except Exception:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


def _tables():
    labels_a, rows_a = build_rows(GROUP_A_ROWS)
    labels_b, rows_b = build_rows(GROUP_B_ROWS)
    return group_table(rows_a, labels_a), group_table(rows_b, labels_b)


def test_table_oracle_a():
    with criterion("table oracle A: chain totals, group total, average row"):
        table, _ = _tables()
        assert table.rows[0].chain_total_cost == Decimal("1067")
        assert table.group_total_cost == Decimal("6301")
        expected_avg = dict(zip(CHAIN, ("197.6", "208.6", "269.7", "224.3")))
        for role in CHAIN:
            assert abs(table.avg_role_cost[role] - Decimal(expected_avg[role])) <= Decimal("0.1")
        assert abs(table.avg_avg_std - 3.4) <= 0.1


def test_table_oracle_b():
    with criterion("table oracle B: group total within 1, average order STD"):
        _, table = _tables()
        assert abs(table.group_total_cost - Decimal("8121")) <= Decimal("1")
        assert abs(table.avg_avg_std - 6.8) <= 0.1


def test_comparison_oracle():
    with criterion("comparison oracle: +28.9% cost gap, 2.0x order STD"):
        table_a, table_b = _tables()
        report = compare_groups(table_a, table_b)
        assert abs(report.percent_difference - 28.9) <= 0.1
        assert abs(report.std_ratio - 2.0) <= 0.05


def test_cost_constants():
    with criterion("cost constants: 12 units held -> 6.00; 4 backordered -> 4.00"):
        holding_config = default_config(
            initial_pipeline_fill=0, demand_sequence=(0,), horizon_weeks=1
        )
        record = advance_week(new_game(holding_config))
        assert record.roles[Role.RETAILER].ending_inventory == 12
        assert record.roles[Role.RETAILER].week_cost == Decimal("6.00")

        backlog_config = default_config(
            initial_inventory=0,
            initial_pipeline_fill=0,
            demand_sequence=(4,),
            horizon_weeks=1,
        )
        record = advance_week(new_game(backlog_config))
        assert record.roles[Role.RETAILER].ending_backlog == 4
        assert record.roles[Role.RETAILER].week_cost == Decimal("4.00")


def test_hand_trace_oracle():
    with criterion("hand-trace oracle: three-week ledger matches exactly"):
        state = new_game(hand_trace_config())
        records = run_to_horizon(state)
        for record in records:
            for role in CHAIN:
                entry = record.roles[role]
                demand, shipped, order, inventory, backlog, cost, cum = EXPECTED_TRACE[
                    record.week
                ][role]
                assert entry.demand_received == demand
                assert entry.shipped == shipped
                assert entry.order_placed == order
                assert entry.ending_inventory == inventory
                assert entry.ending_backlog == backlog
                assert entry.week_cost == Decimal(cost)
                assert entry.cumulative_cost == Decimal(cum)


def test_property_suite_under_a_minute():
    with criterion("property suite: 1000 random configs green in under 60s"):
        started = time.monotonic()
        test_properties.test_conservation_costs_and_flow_over_population()
        test_properties.test_determinism_over_population_subset()
        test_properties.test_one_rng_draw_per_week()
        test_properties.test_eventual_fulfillment_after_demand_stops()
        elapsed = time.monotonic() - started
        assert elapsed < 60.0, f"property suite took {elapsed:.1f}s"


def test_qualitative_visibility_study():
    with criterion(
        "visibility study: full beats restricted in >=90% of 100 paired seeds, "
        "order STD grows upstream"
    ):
        started = time.monotonic()
        base = default_config(
            policies={role: ForecastBaseStock(z=1.64, smoothing_alpha=0.3) for role in Role},
        )
        exp = ExperimentConfig(
            base=base,
            groups=(
                GroupSpec("A", VisibilityMode.FULL, {}),
                GroupSpec("B", VisibilityMode.RESTRICTED, {}),
            ),
            subgroups_per_group=100,
            base_seed=1,
        )
        result = run_batch(exp)
        rows_full = result.groups[0].table.rows
        rows_restricted = result.groups[1].table.rows
        pairs = list(zip(rows_full, rows_restricted))
        cost_wins = sum(f.chain_total_cost < r.chain_total_cost for f, r in pairs)
        std_wins = sum(f.avg_order_std < r.avg_order_std for f, r in pairs)
        assert cost_wins >= 90, f"cost wins {cost_wins}/100"
        assert std_wins >= 90, f"order STD wins {std_wins}/100"

        mean_std = [
            statistics.fmean(row.role_order_std[role] for row in rows_restricted)
            for role in CHAIN
        ]
        assert all(
            later >= earlier for earlier, later in zip(mean_std, mean_std[1:])
        ), f"restricted mean order STD not monotone: {mean_std}"
        elapsed = time.monotonic() - started
        assert elapsed < 60.0, f"study took {elapsed:.1f}s"


def test_server_equivalence_and_replay(tmp_path):
    with criterion(
        "server equivalence: hosted ledger byte-identical to headless run; "
        "event replay reconstructs state"
    ):
        spool = tmp_path / "spool"
        app = create_app(default_config=None, spool_dir=spool)
        config = default_config(rng_seed=2024, policies=all_agent_policies(z=1.64))
        with TestClient(app) as client:
            created = client.post(
                "/sessions",
                json={"config": {
                    "rng_seed": 2024,
                    "policies": {
                        role.value: "base_stock z=1.64" for role in CHAIN
                    },
                }},
            )
            session_id = created.json()["session_id"]
            client.post(f"/sessions/{session_id}/start?auto=true")
            hosted_csv = client.get(f"/sessions/{session_id}/export.csv").text

        _, records = run_single(config)
        assert hosted_csv.encode() == records_to_csv(records).encode()

        rebuilt = replay_log(spool / f"{session_id}.jsonl")
        assert rebuilt.game.week == config.horizon_weeks
        assert records_to_csv(rebuilt.game.records) == hosted_csv
        assert rebuilt.game.records == records
