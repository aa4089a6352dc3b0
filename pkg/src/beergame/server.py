"""Live multi-player session host: HTTP + WebSocket, event-sourced.

A session wraps one game: seats may be claimed by live players in the
lobby, every remaining seat is played by its configured policy, and the
week advances exactly when all live seats have submitted an order.  Every
mutation appends an event to a line-delimited JSON log which is fsynced
on each advance; replaying the log byte-for-byte reconstructs the
session, which is also how the server recovers after a restart.

Within a session all mutations run under one lock (a single writer);
reads serve immutable view snapshots rebuilt after each mutation, so
they never block the writer.  Restricted-visibility snapshots simply do
not contain peer fields -- exclusion happens at the schema level, not by
blanking values.
"""

from __future__ import annotations

import json
import os
import uuid
import asyncio
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse

from .engine import (
    CHAIN,
    ConfigurationError,
    GameConfig,
    GameState,
    Human,
    Role,
    VisibilityMode,
    advance_week,
    external_demand_stats,
    inventory_position,
    new_game,
    records_to_csv,
)
from .metrics import RunSummary
from .policy import format_policy_spec

PROTOCOL_VERSION = 1

PHASE_LOBBY = "lobby"
PHASE_AWAITING = "awaiting_orders"
PHASE_FINISHED = "finished"

INSTRUCTOR = "instructor"


class SessionError(HTTPException):
    def __init__(self, status_code: int, code: str, message: str):
        super().__init__(status_code=status_code, detail={"code": code, "message": message})


@dataclass
class HumanSeat:
    player_id: str
    player_name: str


@dataclass
class Session:
    """Server-side lifecycle wrapper around one game."""

    session_id: str
    config: GameConfig
    game: GameState
    seats: dict[Role, HumanSeat | None]
    started: bool = False
    pending_orders: dict[Role, int] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)
    log_path: Path | None = None
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    views: dict[str, dict] = field(default_factory=dict)
    sockets: dict[str, list[Any]] = field(default_factory=dict)

    @property
    def phase(self) -> str:
        if self.game.finished:
            return PHASE_FINISHED
        return PHASE_AWAITING if self.started else PHASE_LOBBY

    @property
    def current_week(self) -> int:
        return self.game.week + 1

    def human_roles(self) -> list[Role]:
        return [role for role in CHAIN if self.seats[role] is not None]

    def quorum_met(self) -> bool:
        return all(role in self.pending_orders for role in self.human_roles())

    def seat_of(self, player_id: str) -> Role | None:
        for role, seat in self.seats.items():
            if seat is not None and seat.player_id == player_id:
                return role
        return None


# ---------------------------------------------------------------------------
# Event log
# ---------------------------------------------------------------------------

def _append_event(session: Session, event: dict, fsync: bool = False) -> None:
    event = {"v": PROTOCOL_VERSION, **event}
    session.events.append(event)
    if session.log_path is not None:
        with session.log_path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, sort_keys=True) + "\n")
            if fsync:
                handle.flush()
                os.fsync(handle.fileno())


def _new_session(config: GameConfig, session_id: str | None = None) -> Session:
    config.validate()
    return Session(
        session_id=session_id or uuid.uuid4().hex,
        config=config,
        game=new_game(config),
        seats={role: None for role in CHAIN},
    )


def apply_event(session: Session | None, event: dict) -> Session:
    """Apply one logged event; the base case builds the session itself."""
    kind = event["type"]
    if kind == "session_created":
        config = GameConfig.from_dict(event["config"])
        return _new_session(config, session_id=event["session_id"])
    if session is None:
        raise ValueError(f"event log must start with session_created, got {kind}")
    if kind == "player_joined":
        role = Role(event["role"])
        session.seats[role] = HumanSeat(event["player_id"], event["player_name"])
        session.config.policies[role] = Human()
    elif kind == "session_started":
        session.started = True
    elif kind == "order_submitted":
        session.pending_orders[Role(event["role"])] = int(event["quantity"])
    elif kind == "week_advanced":
        live_orders = {Role(name): int(q) for name, q in event["live_orders"].items()}
        advance_week(session.game, live_orders)
        session.pending_orders.clear()
    else:
        raise ValueError(f"unknown event type {kind}")
    return session


def replay_events(events: list[dict]) -> Session:
    """Rebuild a session from its event sequence."""
    session: Session | None = None
    for event in events:
        session = apply_event(session, event)
    if session is None:
        raise ValueError("empty event log")
    session.events = list(events)
    _rebuild_views(session)
    return session


def replay_log(path: str | Path) -> Session:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    session = replay_events([json.loads(line) for line in lines if line.strip()])
    session.log_path = Path(path)
    return session


# ---------------------------------------------------------------------------
# View payloads
# ---------------------------------------------------------------------------

def _role_series(session: Session, role: Role) -> dict:
    records = session.game.records
    entries = [record.roles[role] for record in records]
    return {
        "week": [record.week for record in records],
        "inventory": [entry.ending_inventory for entry in entries],
        "backlog": [entry.ending_backlog for entry in entries],
        "order": [entry.order_placed for entry in entries],
        "demand": [entry.demand_received for entry in entries],
        "week_cost": [str(entry.week_cost) for entry in entries],
        "cum_cost": [str(entry.cumulative_cost) for entry in entries],
    }


def _own_block(session: Session, role: Role) -> dict:
    rs = session.game.roles[role]
    return {
        "role": role.value,
        "seat": "human" if session.seats[role] is not None else "agent",
        "policy": format_policy_spec(session.config.policy_for(role)),
        "on_hand": rs.on_hand,
        "backlog": rs.backlog,
        "inventory_position": inventory_position(rs),
        "cumulative_cost": str(rs.cumulative_cost),
        "demand_history": list(rs.demand_history),
        "order_history": list(rs.order_history),
        "series": _role_series(session, role),
        "pending_submitted": role in session.pending_orders,
    }


def _full_extras(session: Session, exclude: Role | None) -> dict:
    peers = {
        other.value: {
            "cumulative_cost": str(session.game.roles[other].cumulative_cost),
            "backlog": session.game.roles[other].backlog,
            "order_history": list(session.game.roles[other].order_history),
        }
        for other in CHAIN
        if other is not exclude
    }
    avg, std = external_demand_stats(session.game)
    return {
        "peers": peers,
        "end_customer_demand_stats": {"avg": avg, "std": std},
        "chain_order_series": {
            role.value: _role_series(session, role)["order"] for role in CHAIN
        },
        "chain_cost_series": {
            role.value: _role_series(session, role)["cum_cost"] for role in CHAIN
        },
    }


def _summary_block(session: Session) -> dict:
    summary = RunSummary.from_records(session.game.records)
    return {
        "role_total_cost": {
            role.value: str(summary.role_total_cost[role]) for role in CHAIN
        },
        "role_order_std": {
            role.value: summary.role_order_std[role] for role in CHAIN
        },
        "chain_total_cost": str(summary.chain_total_cost),
        "avg_order_std": summary.avg_order_std,
    }


def build_view_payload(session: Session, who: str) -> dict:
    """The visibility-gated JSON snapshot for one seat or the instructor."""
    payload: dict[str, Any] = {
        "v": PROTOCOL_VERSION,
        "session_id": session.session_id,
        "phase": session.phase,
        "week_completed": session.game.week,
        "current_week": session.current_week if session.phase == PHASE_AWAITING else None,
        "horizon_weeks": session.config.horizon_weeks,
        "visibility": session.config.visibility.value,
        "seats": {
            role.value: (
                {"kind": "human", "player_name": seat.player_name}
                if seat is not None
                else {"kind": "agent"}
            )
            for role, seat in session.seats.items()
        },
    }
    if who == INSTRUCTOR:
        payload["role"] = INSTRUCTOR
        payload["roles"] = {role.value: _own_block(session, role) for role in CHAIN}
        payload.update(_full_extras(session, exclude=None))
    else:
        role = Role(who)
        payload["role"] = role.value
        payload["own"] = _own_block(session, role)
        if session.config.visibility is VisibilityMode.FULL:
            payload.update(_full_extras(session, exclude=role))
    if session.phase == PHASE_FINISHED and session.game.records:
        payload["run_summary"] = _summary_block(session)
    return payload


def _rebuild_views(session: Session) -> None:
    views = {role.value: build_view_payload(session, role.value) for role in CHAIN}
    views[INSTRUCTOR] = build_view_payload(session, INSTRUCTOR)
    session.views = views


async def _broadcast(session: Session) -> None:
    for key, sockets in list(session.sockets.items()):
        payload = session.views.get(key)
        if payload is None:
            continue
        alive = []
        for socket in sockets:
            try:
                await socket.send_json(payload)
                alive.append(socket)
            except Exception:
                continue
        session.sockets[key] = alive


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def create_app(
    default_config: GameConfig | None = None,
    spool_dir: Path | None = None,
) -> FastAPI:
    """Build the session server.

    ``spool_dir`` enables event-log persistence; existing logs found
    there are replayed on startup so sessions survive a restart.
    """
    app = FastAPI(title="beergame session server")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions
    app.state.spool_dir = spool_dir

    if spool_dir is not None:
        spool_dir.mkdir(parents=True, exist_ok=True)
        for log_file in sorted(spool_dir.glob("*.jsonl")):
            try:
                session = replay_log(log_file)
            except (ValueError, ConfigurationError):
                continue
            sessions[session.session_id] = session

    def _get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise SessionError(404, "unknown_session", f"no session {session_id}")
        return session

    async def _advance_once(session: Session) -> None:
        live_orders = dict(session.pending_orders)
        advance_week(session.game, live_orders)
        session.pending_orders.clear()
        _append_event(
            session,
            {
                "type": "week_advanced",
                "week": session.game.week,
                "live_orders": {role.value: q for role, q in live_orders.items()},
            },
            fsync=True,
        )

    async def _run_all_agent_game(session: Session) -> int:
        advanced = 0
        while session.phase == PHASE_AWAITING:
            await _advance_once(session)
            advanced += 1
        _rebuild_views(session)
        await _broadcast(session)
        return advanced

    @app.post("/sessions")
    async def create_session(body: dict | None = Body(default=None)) -> dict:
        data = body or {}
        config_data = data.get("config", data) or {}
        try:
            # Round-trip through the dict form so each session owns a
            # private config; seat claims rewrite its policy map.
            base = (default_config or GameConfig()).to_dict()
            base.update(config_data)
            config = GameConfig.from_dict(base)
        except (ConfigurationError, ValueError) as exc:
            raise SessionError(400, "invalid_config", str(exc)) from exc
        session = _new_session(config)
        if spool_dir is not None:
            session.log_path = spool_dir / f"{session.session_id}.jsonl"
        sessions[session.session_id] = session
        _append_event(
            session,
            {
                "type": "session_created",
                "session_id": session.session_id,
                "config": config.to_dict(),
            },
        )
        _rebuild_views(session)
        return {"v": PROTOCOL_VERSION, "session_id": session.session_id, "phase": session.phase}

    @app.post("/sessions/{session_id}/join")
    async def join(session_id: str, body: dict = Body(...)) -> dict:
        session = _get_session(session_id)
        async with session.lock:
            if session.phase != PHASE_LOBBY:
                raise SessionError(409, "not_in_lobby", "seats can only be claimed in the lobby")
            try:
                role = Role(str(body.get("role", "")).lower())
            except ValueError:
                raise SessionError(400, "unknown_role", f"unknown role {body.get('role')!r}") from None
            if session.seats[role] is not None:
                raise SessionError(409, "seat_taken", f"{role.value} is already claimed")
            player_name = str(body.get("player_name", "")) or role.value
            player_id = uuid.uuid4().hex
            session.seats[role] = HumanSeat(player_id, player_name)
            session.config.policies[role] = Human()
            _append_event(
                session,
                {
                    "type": "player_joined",
                    "role": role.value,
                    "player_id": player_id,
                    "player_name": player_name,
                },
            )
            _rebuild_views(session)
            await _broadcast(session)
            return {
                "v": PROTOCOL_VERSION,
                "session_id": session_id,
                "player_id": player_id,
                "role": role.value,
            }

    @app.post("/sessions/{session_id}/start")
    async def start(session_id: str, auto: bool = Query(default=False)) -> dict:
        session = _get_session(session_id)
        async with session.lock:
            if session.phase == PHASE_FINISHED:
                raise SessionError(409, "finished", "session already finished")
            if not session.started:
                session.started = True
                _append_event(session, {"type": "session_started"})
            advanced = 0
            if auto:
                if session.human_roles():
                    raise SessionError(
                        409, "live_seats", "auto play requires an all-agent session"
                    )
                advanced = await _run_all_agent_game(session)
            else:
                _rebuild_views(session)
                await _broadcast(session)
            return {
                "v": PROTOCOL_VERSION,
                "phase": session.phase,
                "weeks_advanced": advanced,
                "week_completed": session.game.week,
            }

    @app.post("/sessions/{session_id}/advance")
    async def advance(session_id: str) -> dict:
        session = _get_session(session_id)
        async with session.lock:
            if session.phase != PHASE_AWAITING:
                raise SessionError(409, "not_running", f"session is {session.phase}")
            if not session.quorum_met():
                missing = [
                    role.value
                    for role in session.human_roles()
                    if role not in session.pending_orders
                ]
                raise SessionError(
                    409, "awaiting_orders", f"missing orders from {missing}"
                )
            await _advance_once(session)
            _rebuild_views(session)
            await _broadcast(session)
            return {
                "v": PROTOCOL_VERSION,
                "phase": session.phase,
                "week_completed": session.game.week,
            }

    @app.post("/sessions/{session_id}/orders")
    async def submit_order(session_id: str, body: dict = Body(...)) -> dict:
        session = _get_session(session_id)
        async with session.lock:
            if session.phase != PHASE_AWAITING:
                raise SessionError(409, "not_running", f"session is {session.phase}")
            player_id = str(body.get("player_id", ""))
            role = session.seat_of(player_id)
            if role is None:
                raise SessionError(403, "unknown_player", "player holds no seat here")
            week = body.get("week")
            if week != session.current_week:
                raise SessionError(
                    409,
                    "stale_turn",
                    f"submitted for week {week}, server is at week {session.current_week}",
                )
            quantity = body.get("quantity")
            if not isinstance(quantity, int) or isinstance(quantity, bool) or quantity < 0:
                raise SessionError(400, "bad_quantity", "quantity must be a non-negative integer")
            if role in session.pending_orders:
                return {
                    "v": PROTOCOL_VERSION,
                    "status": "duplicate",
                    "week": session.current_week,
                    "accepted_quantity": session.pending_orders[role],
                }
            session.pending_orders[role] = quantity
            _append_event(
                session,
                {
                    "type": "order_submitted",
                    "role": role.value,
                    "player_id": player_id,
                    "week": week,
                    "quantity": quantity,
                },
            )
            accepted_week = session.current_week
            if session.quorum_met():
                await _advance_once(session)
            _rebuild_views(session)
            await _broadcast(session)
            return {
                "v": PROTOCOL_VERSION,
                "status": "accepted",
                "week": accepted_week,
                "accepted_quantity": quantity,
                "phase": session.phase,
            }

    @app.get("/sessions/{session_id}/view")
    async def view(session_id: str, role: str = Query(...)) -> dict:
        session = _get_session(session_id)
        key = role.lower()
        if key != INSTRUCTOR:
            try:
                key = Role(key).value
            except ValueError:
                raise SessionError(400, "unknown_role", f"unknown role {role!r}") from None
        payload = session.views.get(key)
        if payload is None:  # pragma: no cover - views exist after creation
            payload = build_view_payload(session, key)
        return payload

    @app.get("/sessions/{session_id}/export.csv", response_class=PlainTextResponse)
    async def export_csv(session_id: str) -> str:
        session = _get_session(session_id)
        return records_to_csv(session.game.records)

    @app.websocket("/sessions/{session_id}/ws")
    async def websocket_view(websocket: WebSocket, session_id: str) -> None:
        session = sessions.get(session_id)
        if session is None:
            await websocket.close(code=4404)
            return
        key = websocket.query_params.get("role", "").lower()
        if key != INSTRUCTOR:
            try:
                key = Role(key).value
            except ValueError:
                await websocket.close(code=4400)
                return
        await websocket.accept()
        payload = session.views.get(key) or build_view_payload(session, key)
        await websocket.send_json(payload)
        session.sockets.setdefault(key, []).append(websocket)
        try:
            while True:
                await websocket.receive_text()  # keepalive / ignored
        except WebSocketDisconnect:
            pass
        finally:
            if websocket in session.sockets.get(key, []):
                session.sockets[key].remove(websocket)

    return app
