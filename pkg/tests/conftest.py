from __future__ import annotations

from beergame import BaseStock, GameConfig, Role


def all_agent_policies(z: float = 0.0) -> dict[Role, BaseStock]:
    return {role: BaseStock(z=z) for role in Role}


def default_config(**overrides) -> GameConfig:
    kwargs = dict(policies=all_agent_policies())
    kwargs.update(overrides)
    return GameConfig(**kwargs)
