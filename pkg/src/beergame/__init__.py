"""Beer distribution game: engine, policies, metrics, experiments, server."""

from .engine import (
    CHAIN,
    ConfigurationError,
    GameConfig,
    GameFinishedError,
    GameState,
    IncompleteTurnError,
    Role,
    RoleState,
    RoleWeek,
    VisibilityMode,
    WeekRecord,
    advance_week,
    build_observation,
    downstream_of,
    generate_demand,
    inventory_position,
    new_game,
    records_to_csv,
    run_to_horizon,
    upstream_of,
)
from .policy import (
    BaseStock,
    BaseStockParams,
    ForecastBaseStock,
    ForecastState,
    Human,
    Observation,
    PolicySpec,
    SQ,
    average_inventory_level,
    base_stock_level,
    decide_order,
    format_policy_spec,
    parse_policy_spec,
    seed_forecast,
    update_forecast,
)

__all__ = [
    "CHAIN",
    "BaseStock",
    "BaseStockParams",
    "ConfigurationError",
    "ForecastBaseStock",
    "ForecastState",
    "GameConfig",
    "GameFinishedError",
    "GameState",
    "Human",
    "IncompleteTurnError",
    "Observation",
    "PolicySpec",
    "Role",
    "RoleState",
    "RoleWeek",
    "SQ",
    "VisibilityMode",
    "WeekRecord",
    "advance_week",
    "average_inventory_level",
    "base_stock_level",
    "build_observation",
    "decide_order",
    "downstream_of",
    "format_policy_spec",
    "generate_demand",
    "inventory_position",
    "new_game",
    "parse_policy_spec",
    "records_to_csv",
    "run_to_horizon",
    "seed_forecast",
    "update_forecast",
    "upstream_of",
]

__version__ = "0.1.0"
