"""Ordering policies for the four-stage distribution chain.

Each seat in a game is driven either by a live player or by one of the
automated policies defined here.  The automated policies are pure
functions of the observation they are handed: they hold no state of
their own and never touch the random stream, so a trajectory is
reproducible for any mix of seats.

Three automated variants are provided:

* ``BaseStock`` -- periodic-review order-up-to control planned against a
  fixed demand prior.  Every week it orders whatever is needed to raise
  the inventory position back to the order-up-to level.
* ``ForecastBaseStock`` -- the same control law, except the demand mean
  and deviation are re-estimated each week by exponential smoothing of
  the demand stream the seat is allowed to see.  Under restricted
  visibility that stream is the seat's own incoming orders, which is
  what lets order variance build from echelon to echelon.
* ``SQ`` -- reorder-point control: order a fixed quantity whenever the
  inventory position falls strictly below the reorder point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Mapping, Union

#: Mean absolute deviation to standard deviation conversion factor.
MAD_TO_STD = 1.25


class PolicyError(ValueError):
    """Raised when a policy is configured or invoked outside its contract."""


# ---------------------------------------------------------------------------
# Policy specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Human:
    """Seat controlled by a live player; orders enter through the week step."""


@dataclass(frozen=True)
class BaseStock:
    """Order-up-to policy with safety factor ``z`` and a fixed demand prior."""

    z: float = 0.0


@dataclass(frozen=True)
class ForecastBaseStock:
    """Order-up-to policy whose demand estimates track observed demand."""

    z: float = 0.0
    smoothing_alpha: float = 0.3


@dataclass(frozen=True)
class SQ:
    """Reorder-point policy: order ``q`` whenever the position falls below ``s``."""

    s: int
    q: int


PolicySpec = Union[Human, BaseStock, ForecastBaseStock, SQ]


def validate_policy_spec(spec: PolicySpec) -> None:
    """Check a policy's parameters, raising :class:`PolicyError` on violation."""
    if isinstance(spec, Human):
        return
    if isinstance(spec, (BaseStock, ForecastBaseStock)):
        if not math.isfinite(spec.z):
            raise PolicyError(f"policy safety factor z must be finite, got {spec.z!r}")
        if isinstance(spec, ForecastBaseStock) and not 0.0 <= spec.smoothing_alpha <= 1.0:
            raise PolicyError(
                f"smoothing_alpha must lie in [0, 1], got {spec.smoothing_alpha!r}"
            )
        return
    if isinstance(spec, SQ):
        if spec.s < 0:
            raise PolicyError(f"reorder point s must be >= 0, got {spec.s!r}")
        if spec.q < 1:
            raise PolicyError(f"order quantity q must be >= 1, got {spec.q!r}")
        return
    raise PolicyError(f"unknown policy spec {spec!r}")


def parse_policy_spec(text: str) -> PolicySpec:
    """Parse the textual policy form used in config files and APIs.

    Examples: ``human``, ``base_stock z=1.64``,
    ``forecast_base_stock z=1.64 alpha=0.3``, ``sq s=5 q=8``.
    """
    tokens = text.strip().lower().split()
    if not tokens:
        raise PolicyError("empty policy specification")
    name, args = tokens[0], tokens[1:]
    kwargs: dict[str, str] = {}
    for arg in args:
        key, sep, value = arg.partition("=")
        if not sep or not value:
            raise PolicyError(f"malformed policy argument {arg!r} in {text!r}")
        kwargs[key] = value

    def _float(key: str, default: float) -> float:
        try:
            return float(kwargs.pop(key)) if key in kwargs else default
        except ValueError as exc:
            raise PolicyError(f"bad numeric value for {key!r} in {text!r}") from exc

    def _int(key: str) -> int:
        if key not in kwargs:
            raise PolicyError(f"policy {name!r} requires {key}= in {text!r}")
        try:
            return int(kwargs.pop(key))
        except ValueError as exc:
            raise PolicyError(f"bad integer value for {key!r} in {text!r}") from exc

    spec: PolicySpec
    if name == "human":
        spec = Human()
    elif name == "base_stock":
        spec = BaseStock(z=_float("z", 0.0))
    elif name == "forecast_base_stock":
        spec = ForecastBaseStock(z=_float("z", 0.0), smoothing_alpha=_float("alpha", 0.3))
    elif name == "sq":
        spec = SQ(s=_int("s"), q=_int("q"))
    else:
        raise PolicyError(f"unknown policy variant {name!r}")
    if kwargs:
        raise PolicyError(f"unexpected policy arguments {sorted(kwargs)} in {text!r}")
    validate_policy_spec(spec)
    return spec


def format_policy_spec(spec: PolicySpec) -> str:
    """Inverse of :func:`parse_policy_spec`; used for config export and views."""
    if isinstance(spec, Human):
        return "human"
    if isinstance(spec, BaseStock):
        return f"base_stock z={spec.z:g}"
    if isinstance(spec, ForecastBaseStock):
        return f"forecast_base_stock z={spec.z:g} alpha={spec.smoothing_alpha:g}"
    if isinstance(spec, SQ):
        return f"sq s={spec.s} q={spec.q}"
    raise PolicyError(f"unknown policy spec {spec!r}")


# ---------------------------------------------------------------------------
# Order-up-to sizing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseStockParams:
    """Inputs to the periodic-review sizing formulas.

    ``review_period`` and ``lead_time`` are in weeks.  ``avg_demand`` and
    ``std_demand`` describe the weekly demand the seat plans against, and
    ``service_factor`` is the normal safety factor z.  An order placed at
    a review must carry the seat through the ``review_period + lead_time``
    weeks until the next order can arrive.
    """

    review_period: int
    lead_time: int
    avg_demand: float
    std_demand: float
    service_factor: float = 0.0

    def validate(self) -> None:
        if self.review_period < 1:
            raise PolicyError(f"review_period must be >= 1, got {self.review_period!r}")
        if self.lead_time < 0:
            raise PolicyError(f"lead_time must be >= 0, got {self.lead_time!r}")
        if self.avg_demand < 0:
            raise PolicyError(f"avg_demand must be >= 0, got {self.avg_demand!r}")
        if self.std_demand < 0:
            raise PolicyError(f"std_demand must be >= 0, got {self.std_demand!r}")
        if not math.isfinite(self.service_factor):
            raise PolicyError(f"service_factor must be finite, got {self.service_factor!r}")


def base_stock_level(params: BaseStockParams) -> int:
    """Order-up-to level in whole units.

    Demand over the protection interval of ``review_period + lead_time``
    weeks has mean ``avg * (R + L)`` and deviation ``std * sqrt(R + L)``;
    the level covers the mean plus ``z`` deviations, rounded up.
    """
    params.validate()
    protection = params.review_period + params.lead_time
    level = params.avg_demand * protection + (
        params.service_factor * params.std_demand * math.sqrt(protection)
    )
    return max(0, math.ceil(level))


def average_inventory_level(params: BaseStockParams) -> float:
    """Expected on-hand inventory under the order-up-to policy.

    Half a review period's demand cycles through stock on average, on top
    of the safety stock ``z * std * sqrt(R + L)``.  Diagnostic only; the
    ordering decision is driven by :func:`base_stock_level`.
    """
    params.validate()
    protection = params.review_period + params.lead_time
    return (params.review_period * params.avg_demand) / 2.0 + (
        params.service_factor * params.std_demand * math.sqrt(protection)
    )


# ---------------------------------------------------------------------------
# Demand forecasting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForecastState:
    """Running demand estimates: smoothed mean and mean absolute deviation."""

    avg: float
    mad: float

    @property
    def std(self) -> float:
        return MAD_TO_STD * self.mad


def seed_forecast(mean: float, std: float) -> ForecastState:
    """Initial estimates chosen so that the reported std equals ``std``."""
    return ForecastState(avg=float(mean), mad=float(std) / MAD_TO_STD)


def update_forecast(
    state: ForecastState, observed_demand: int, smoothing_alpha: float
) -> ForecastState:
    """Blend one demand observation into the running estimates.

    The deviation estimate smooths the absolute forecast error against the
    pre-update mean.  Both estimates stay non-negative for inputs >= 0.
    """
    if not 0.0 <= smoothing_alpha <= 1.0:
        raise PolicyError(f"smoothing_alpha must lie in [0, 1], got {smoothing_alpha!r}")
    a = smoothing_alpha
    error = observed_demand - state.avg
    return ForecastState(
        avg=a * observed_demand + (1.0 - a) * state.avg,
        mad=a * abs(error) + (1.0 - a) * state.mad,
    )


# ---------------------------------------------------------------------------
# Observations and decisions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Observation:
    """Everything a seat may legally base its order on.

    ``peer_info`` and ``end_customer_demand_stats`` are populated only
    under full visibility; under restricted visibility the fields are
    ``None`` rather than blanked, so restricted decisions cannot depend
    on them even by accident.  A seat always sees its own demand stream,
    which is its immediate downstream's order stream.
    """

    role: str
    week: int
    on_hand: int
    backlog: int
    inventory_position: int
    demand_history: tuple[int, ...]
    order_history: tuple[int, ...]
    forecast_avg: float
    forecast_std: float
    peer_info: Mapping[str, Mapping[str, Any]] | None = None
    end_customer_demand_stats: tuple[float, float] | None = None


def decide_order(
    spec: PolicySpec, obs: Observation, params_context: BaseStockParams
) -> int:
    """Automated order decision; a pure function of its arguments.

    ``params_context`` carries the review period, lead time, configured
    demand priors, and default safety factor.  ``BaseStock`` plans against
    the configured priors; ``ForecastBaseStock`` swaps in the smoothed
    estimates carried by the observation.
    """
    validate_policy_spec(spec)
    if isinstance(spec, Human):
        raise PolicyError("human seats submit orders through the week step")
    if isinstance(spec, BaseStock):
        level = base_stock_level(replace(params_context, service_factor=spec.z))
        return max(0, level - obs.inventory_position)
    if isinstance(spec, ForecastBaseStock):
        level = base_stock_level(
            replace(
                params_context,
                avg_demand=obs.forecast_avg,
                std_demand=obs.forecast_std,
                service_factor=spec.z,
            )
        )
        return max(0, level - obs.inventory_position)
    if isinstance(spec, SQ):
        return spec.q if obs.inventory_position < spec.s else 0
    raise PolicyError(f"unknown policy spec {spec!r}")
