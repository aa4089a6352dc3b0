"""Deterministic week-step engine for the four-stage beer distribution chain.

A game couples four stocking roles in series: the retailer serves an
external consumer, each other role serves the role below it, and the
factory draws on an unbounded production source.  Every week runs the
same five phases for all roles:

1. RECEIVE SHIPMENTS -- the due slot of each shipping pipeline arrives
   into on-hand stock (the factory's pipeline is its production line).
2. RECEIVE ORDERS -- the due slot of each inbound order queue is read;
   the retailer instead draws external consumer demand.
3. FULFILL -- each role ships ``min(on_hand, backlog + new demand)``;
   shipped units enter the downstream role's shipping pipeline and
   arrive after the shipping delay.  Retailer shipments leave the system.
4. COST -- holding cost accrues on ending inventory and backorder cost
   on ending backlog, both per unit-week.
5. ORDER -- every seat places an order (live players supply theirs,
   automated seats decide from a visibility-gated observation).  Orders
   travel through the upstream role's inbound queue; the factory's order
   enters its own production pipeline directly, with no order delay.

Unmet demand is never lost: it backorders and is served as soon as stock
allows.  All quantities are whole units; money is exact decimal so cost
sums never drift.  A game holds its own random generator, consumes at
most one draw per week (the retailer demand sample), and is therefore
bit-reproducible from its configuration alone.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, fields, replace
from decimal import Decimal
from enum import Enum
from statistics import NormalDist, fmean, stdev
from typing import Iterable, Mapping, Sequence

from .policy import (
    BaseStock,
    BaseStockParams,
    ForecastBaseStock,
    ForecastState,
    Human,
    Observation,
    PolicySpec,
    decide_order,
    format_policy_spec,
    parse_policy_spec,
    seed_forecast,
    update_forecast,
    validate_policy_spec,
)

#: Fixed CSV header for per-week, per-role ledgers.
CSV_HEADER = "week,role,demand,shipped,order,inventory,backlog,week_cost,cum_cost"


class EngineError(Exception):
    """Base class for engine failures."""


class ConfigurationError(EngineError):
    """A game configuration violates an invariant; names the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


class IncompleteTurnError(EngineError):
    """A live seat's order is missing or invalid; the game state is unchanged."""


class GameFinishedError(EngineError):
    """The game has already played its full horizon."""


class Role(Enum):
    """The four chain roles, ordered downstream to upstream."""

    RETAILER = "retailer"
    WHOLESALER = "wholesaler"
    DISTRIBUTOR = "distributor"
    FACTORY = "factory"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


#: Chain order, downstream first.  Code iterates this rather than naming roles.
CHAIN: tuple[Role, ...] = tuple(Role)


def upstream_of(role: Role) -> Role | None:
    """The role this one orders from, or ``None`` for the factory."""
    idx = CHAIN.index(role)
    return CHAIN[idx + 1] if idx + 1 < len(CHAIN) else None


def downstream_of(role: Role) -> Role | None:
    """The role this one ships to, or ``None`` for the retailer."""
    idx = CHAIN.index(role)
    return CHAIN[idx - 1] if idx > 0 else None


class VisibilityMode(Enum):
    """How much of the chain a seat may observe.

    ``FULL`` exposes every role's cumulative cost, backlog, and order
    history plus summary statistics of true end-customer demand.
    ``RESTRICTED`` exposes only a seat's own state and own demand stream
    (which is always the immediate downstream's order stream).
    """

    FULL = "full"
    RESTRICTED = "restricted"


def _money(value: object, field_name: str) -> Decimal:
    """Convert a config value to exact decimal money via its string form."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, (int, str)):
        try:
            return Decimal(value)
        except ArithmeticError as exc:
            raise ConfigurationError(field_name, f"not a valid amount: {value!r}") from exc
    if isinstance(value, float):
        return Decimal(str(value))
    raise ConfigurationError(field_name, f"not a valid amount: {value!r}")


@dataclass
class GameConfig:
    """All constants of one game: horizon, delays, costs, demand, policies.

    ``demand_sequence`` optionally pins the external demand for the first
    ``len(demand_sequence)`` weeks; later weeks fall back to the seeded
    normal generator.  Roles missing from ``policies`` default to
    ``BaseStock`` with the configured ``service_factor_z``.
    """

    horizon_weeks: int = 24
    review_period_weeks: int = 1
    shipping_delay_weeks: int = 2
    order_delay_weeks: int = 1
    holding_cost: Decimal = Decimal("0.50")
    backorder_cost: Decimal = Decimal("1.00")
    demand_mean: float = 4.0
    demand_std: float = 2.0
    rng_seed: int = 0
    initial_inventory: int = 12
    initial_pipeline_fill: int = 4
    visibility: VisibilityMode = VisibilityMode.RESTRICTED
    policies: Mapping[Role, PolicySpec] = field(default_factory=dict)
    service_factor_z: float = 0.0
    demand_sequence: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        self.holding_cost = _money(self.holding_cost, "holding_cost")
        self.backorder_cost = _money(self.backorder_cost, "backorder_cost")
        if isinstance(self.visibility, str):
            try:
                self.visibility = VisibilityMode(self.visibility.lower())
            except ValueError:
                raise ConfigurationError(
                    "visibility", f"expected full or restricted, got {self.visibility!r}"
                ) from None
        self.policies = dict(self.policies)
        if self.demand_sequence is not None:
            self.demand_sequence = tuple(int(d) for d in self.demand_sequence)

    def validate(self) -> None:
        if self.horizon_weeks < 1:
            raise ConfigurationError("horizon_weeks", f"must be >= 1, got {self.horizon_weeks}")
        if self.review_period_weeks < 1:
            raise ConfigurationError(
                "review_period_weeks", f"must be >= 1, got {self.review_period_weeks}"
            )
        if self.shipping_delay_weeks < 0:
            raise ConfigurationError(
                "shipping_delay_weeks", f"must be >= 0, got {self.shipping_delay_weeks}"
            )
        if self.order_delay_weeks < 0:
            raise ConfigurationError(
                "order_delay_weeks", f"must be >= 0, got {self.order_delay_weeks}"
            )
        if self.holding_cost < 0:
            raise ConfigurationError("holding_cost", f"must be >= 0, got {self.holding_cost}")
        if self.backorder_cost < 0:
            raise ConfigurationError("backorder_cost", f"must be >= 0, got {self.backorder_cost}")
        if self.demand_mean < 0:
            raise ConfigurationError("demand_mean", f"must be >= 0, got {self.demand_mean}")
        if self.demand_std < 0:
            raise ConfigurationError("demand_std", f"must be >= 0, got {self.demand_std}")
        if self.initial_inventory < 0:
            raise ConfigurationError(
                "initial_inventory", f"must be >= 0, got {self.initial_inventory}"
            )
        if self.initial_pipeline_fill < 0:
            raise ConfigurationError(
                "initial_pipeline_fill", f"must be >= 0, got {self.initial_pipeline_fill}"
            )
        if not isinstance(self.visibility, VisibilityMode):
            raise ConfigurationError("visibility", f"bad mode {self.visibility!r}")
        if self.demand_sequence is not None and any(d < 0 for d in self.demand_sequence):
            raise ConfigurationError("demand_sequence", "entries must be >= 0")
        for role, spec in self.policies.items():
            if not isinstance(role, Role):
                raise ConfigurationError("policies", f"unknown role {role!r}")
            try:
                validate_policy_spec(spec)
            except ValueError as exc:
                raise ConfigurationError("policies", f"{role.value}: {exc}") from exc

    def policy_for(self, role: Role) -> PolicySpec:
        return self.policies.get(role, BaseStock(z=self.service_factor_z))

    def to_dict(self) -> dict:
        """JSON-safe form, round-tripped by :meth:`from_dict`."""
        return {
            "horizon_weeks": self.horizon_weeks,
            "review_period_weeks": self.review_period_weeks,
            "shipping_delay_weeks": self.shipping_delay_weeks,
            "order_delay_weeks": self.order_delay_weeks,
            "holding_cost": str(self.holding_cost),
            "backorder_cost": str(self.backorder_cost),
            "demand_mean": self.demand_mean,
            "demand_std": self.demand_std,
            "rng_seed": self.rng_seed,
            "initial_inventory": self.initial_inventory,
            "initial_pipeline_fill": self.initial_pipeline_fill,
            "visibility": self.visibility.value,
            "policies": {
                role.value: format_policy_spec(spec) for role, spec in self.policies.items()
            },
            "service_factor_z": self.service_factor_z,
            "demand_sequence": list(self.demand_sequence)
            if self.demand_sequence is not None
            else None,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GameConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(sorted(unknown)[0], "unknown configuration field")
        kwargs = dict(data)
        if "policies" in kwargs and kwargs["policies"] is not None:
            kwargs["policies"] = {
                Role(name): parse_policy_spec(text) if isinstance(text, str) else text
                for name, text in kwargs["policies"].items()
            }
        if kwargs.get("demand_sequence") is not None:
            kwargs["demand_sequence"] = tuple(kwargs["demand_sequence"])
        config = cls(**kwargs)
        config.validate()
        return config


@dataclass
class RoleState:
    """One role's live inventory picture.

    ``shipping_pipeline`` is a FIFO delay line: the head arrives this
    week, a slot appended now arrives after the full shipping delay.
    ``inbound_orders`` is the same structure for order paperwork between
    this role and its downstream.  ``outstanding_orders`` counts units
    this role has ordered that its supplier has not yet shipped; it is
    what makes the inventory position a function of this state alone.
    """

    role: Role
    on_hand: int
    backlog: int
    shipping_pipeline: deque[int]
    inbound_orders: deque[int]
    outstanding_orders: int
    cumulative_cost: Decimal
    order_history: list[int]
    demand_history: list[int]
    forecast: ForecastState


@dataclass(frozen=True)
class RoleWeek:
    """One role's slice of a weekly ledger row."""

    demand_received: int
    shipped: int
    order_placed: int
    ending_inventory: int
    ending_backlog: int
    week_cost: Decimal
    cumulative_cost: Decimal


@dataclass(frozen=True)
class WeekRecord:
    """The per-week ledger every metric, report, and chart is computed from."""

    week: int
    external_demand: int
    roles: Mapping[Role, RoleWeek]


@dataclass
class GameState:
    """Full mutable state of one game; single mutator at a time."""

    config: GameConfig
    week: int
    roles: dict[Role, RoleState]
    rng: random.Random
    records: list[WeekRecord]

    @property
    def finished(self) -> bool:
        return self.week >= self.config.horizon_weeks

    def role_state(self, role: Role) -> RoleState:
        return self.roles[role]


def new_game(config: GameConfig) -> GameState:
    """Set up a game: seeded stock, filled pipelines, seeded forecasts, week 0."""
    config.validate()
    roles: dict[Role, RoleState] = {}
    for role in CHAIN:
        # The factory's orders skip the paperwork queue, so it never has
        # unshipped orders outstanding; everyone else starts with one
        # in-flight order per queue slot.
        outstanding = (
            config.initial_pipeline_fill * config.order_delay_weeks
            if upstream_of(role) is not None
            else 0
        )
        roles[role] = RoleState(
            role=role,
            on_hand=config.initial_inventory,
            backlog=0,
            shipping_pipeline=deque(
                config.initial_pipeline_fill for _ in range(config.shipping_delay_weeks)
            ),
            inbound_orders=deque(
                config.initial_pipeline_fill for _ in range(config.order_delay_weeks)
            ),
            outstanding_orders=outstanding,
            cumulative_cost=Decimal("0.00"),
            order_history=[],
            demand_history=[],
            forecast=seed_forecast(config.demand_mean, config.demand_std),
        )
    return GameState(
        config=config,
        week=0,
        roles=roles,
        rng=random.Random(config.rng_seed),
        records=[],
    )


def generate_demand(rng: random.Random, demand_mean: float, demand_std: float) -> int:
    """One external demand sample: a truncated, rounded normal draw.

    Consumes exactly one uniform from ``rng`` per call (inverse-CDF
    sampling), so the demand stream for a seed is fixed regardless of
    which policies play the other seats.
    """
    if demand_std < 0:
        raise ValueError(f"demand_std must be >= 0, got {demand_std!r}")
    u = rng.random()
    if demand_std == 0:
        sample = demand_mean
    else:
        # random() yields [0, 1); inv_cdf needs the open interval.
        if u <= 0.0:
            u = 5e-324
        sample = NormalDist(demand_mean, demand_std).inv_cdf(u)
    return int(round(max(0.0, sample)))


def inventory_position(role_state: RoleState) -> int:
    """Net stock plus everything already ordered: on-hand minus backlog,
    plus in-transit shipments, plus orders the supplier has not shipped yet."""
    return (
        role_state.on_hand
        - role_state.backlog
        + sum(role_state.shipping_pipeline)
        + role_state.outstanding_orders
    )


def external_demand_stats(state: GameState) -> tuple[float, float]:
    """Running mean and sample deviation of external demand so far.

    Falls back to the configured priors until enough weeks have played.
    """
    series = [record.external_demand for record in state.records]
    if not series:
        return (state.config.demand_mean, state.config.demand_std)
    mean = fmean(series)
    std = stdev(series) if len(series) >= 2 else state.config.demand_std
    return (mean, std)


def build_observation(state: GameState, role: Role) -> Observation:
    """The visibility-gated view a seat decides from.

    Peer information and end-customer demand statistics exist in the
    observation only under full visibility; restricted observations
    simply do not carry the fields.
    """
    rs = state.roles[role]
    peer_info = None
    end_stats = None
    if state.config.visibility is VisibilityMode.FULL:
        peer_info = {
            other.value: {
                "cumulative_cost": str(state.roles[other].cumulative_cost),
                "backlog": state.roles[other].backlog,
                "order_history": tuple(state.roles[other].order_history),
            }
            for other in CHAIN
            if other is not role
        }
        end_stats = external_demand_stats(state)
    return Observation(
        role=role.value,
        week=state.week,
        on_hand=rs.on_hand,
        backlog=rs.backlog,
        inventory_position=inventory_position(rs),
        demand_history=tuple(rs.demand_history),
        order_history=tuple(rs.order_history),
        forecast_avg=rs.forecast.avg,
        forecast_std=rs.forecast.std,
        peer_info=peer_info,
        end_customer_demand_stats=end_stats,
    )


def _planning_params(config: GameConfig) -> BaseStockParams:
    return BaseStockParams(
        review_period=config.review_period_weeks,
        lead_time=config.shipping_delay_weeks,
        avg_demand=config.demand_mean,
        std_demand=config.demand_std,
        service_factor=config.service_factor_z,
    )


def _draw_external_demand(state: GameState) -> int:
    sequence = state.config.demand_sequence
    if sequence is not None and state.week < len(sequence):
        return sequence[state.week]
    return generate_demand(state.rng, state.config.demand_mean, state.config.demand_std)


def advance_week(
    state: GameState, human_orders: Mapping[Role, int] | None = None
) -> WeekRecord:
    """Play one week in place and return its ledger row.

    ``human_orders`` must cover exactly the live seats.  Validation runs
    before any mutation, so a rejected call leaves the state untouched.
    """
    config = state.config
    if state.finished:
        raise GameFinishedError(
            f"game already played its {config.horizon_weeks}-week horizon"
        )
    orders_in: dict[Role, int] = dict(human_orders or {})
    for role in CHAIN:
        spec = config.policy_for(role)
        if isinstance(spec, Human):
            if role not in orders_in:
                raise IncompleteTurnError(f"missing order for live seat {role.value}")
            quantity = orders_in[role]
            if not isinstance(quantity, int) or isinstance(quantity, bool) or quantity < 0:
                raise IncompleteTurnError(
                    f"order for {role.value} must be a non-negative integer, got {quantity!r}"
                )
        elif role in orders_in:
            raise IncompleteTurnError(f"{role.value} is an automated seat; no order expected")

    week = state.week + 1

    # Phase 1: receive shipments.
    for role in CHAIN:
        rs = state.roles[role]
        arrived = rs.shipping_pipeline.popleft() if rs.shipping_pipeline else 0
        rs.on_hand += arrived

    # Phase 2: receive orders; the retailer draws external consumer demand.
    external = _draw_external_demand(state)
    received: dict[Role, int] = {}
    for role in CHAIN:
        rs = state.roles[role]
        if role is CHAIN[0]:
            demand = external
        else:
            demand = rs.inbound_orders.popleft() if rs.inbound_orders else 0
        received[role] = demand
        rs.demand_history.append(demand)

    # Phase 3: fulfill from stock; shortfalls backorder.
    shipped: dict[Role, int] = {}
    for role in CHAIN:
        rs = state.roles[role]
        owed = rs.backlog + received[role]
        out = min(rs.on_hand, owed)
        rs.on_hand -= out
        rs.backlog = owed - out
        shipped[role] = out
        downstream = downstream_of(role)
        if downstream is not None:
            ds = state.roles[downstream]
            ds.shipping_pipeline.append(out)
            ds.outstanding_orders -= out

    # Phase 4: accrue cost on end-of-week balances.
    week_costs: dict[Role, Decimal] = {}
    for role in CHAIN:
        rs = state.roles[role]
        cost = config.holding_cost * rs.on_hand + config.backorder_cost * rs.backlog
        rs.cumulative_cost += cost
        week_costs[role] = cost

    # Phase 5: place orders.  All decisions read the same post-fulfillment
    # snapshot; the paperwork lands only after every seat has decided.
    params = _planning_params(config)
    decisions: dict[Role, int] = {}
    for role in CHAIN:
        spec = config.policy_for(role)
        if isinstance(spec, Human):
            decisions[role] = orders_in[role]
        else:
            decisions[role] = decide_order(spec, build_observation(state, role), params)
    for role in CHAIN:
        rs = state.roles[role]
        order = decisions[role]
        rs.order_history.append(order)
        upstream = upstream_of(role)
        if upstream is None:
            rs.shipping_pipeline.append(order)  # production starts immediately
        else:
            state.roles[upstream].inbound_orders.append(order)
            rs.outstanding_orders += order

    # Forecasts track the stream each seat is allowed to see.
    for role in CHAIN:
        rs = state.roles[role]
        spec = config.policy_for(role)
        alpha = spec.smoothing_alpha if isinstance(spec, ForecastBaseStock) else 0.0
        observed = external if config.visibility is VisibilityMode.FULL else received[role]
        rs.forecast = update_forecast(rs.forecast, observed, alpha)

    record = WeekRecord(
        week=week,
        external_demand=external,
        roles={
            role: RoleWeek(
                demand_received=received[role],
                shipped=shipped[role],
                order_placed=decisions[role],
                ending_inventory=state.roles[role].on_hand,
                ending_backlog=state.roles[role].backlog,
                week_cost=week_costs[role],
                cumulative_cost=state.roles[role].cumulative_cost,
            )
            for role in CHAIN
        },
    )
    state.records.append(record)
    state.week = week
    return record


def run_to_horizon(state: GameState) -> list[WeekRecord]:
    """Advance an all-agent game to its horizon; returns the full ledger."""
    while not state.finished:
        advance_week(state)
    return state.records


def records_to_csv(records: Iterable[WeekRecord]) -> str:
    """Serialize ledger rows to CSV, one row per (week, role), fixed header."""
    lines = [CSV_HEADER]
    for record in records:
        for role in CHAIN:
            entry = record.roles[role]
            lines.append(
                f"{record.week},{role.value},{entry.demand_received},{entry.shipped},"
                f"{entry.order_placed},{entry.ending_inventory},{entry.ending_backlog},"
                f"{entry.week_cost:.2f},{entry.cumulative_cost:.2f}"
            )
    return "\n".join(lines) + "\n"


def replay_orders(
    config: GameConfig, human_orders_by_week: Sequence[Mapping[Role, int]]
) -> GameState:
    """Re-run a game from its configuration and recorded live orders."""
    state = new_game(replace(config))
    for orders in human_orders_by_week:
        advance_week(state, orders)
    return state
