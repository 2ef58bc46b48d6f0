"""Session-oriented HTTP service exposing the interactive design loop.

One session = one city + one trip + one assistant posterior. The designer
(or the web UI) fetches the current state and the assistant's recommendation,
then POSTs chosen changes; every applied choice is recorded as an observation
(with the recommendation that was actually served, or absent if none was
fetched) and drives a posterior update.

Sessions live in memory and are event-sourced: every mutation appends an
event with a monotone sequence number, and replaying a session's event log
reproduces its live state exactly. Event logs can optionally be mirrored to
disk as JSONL. Mutations on one session serialize through a per-session lock
in arrival order; reads are lock-free.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .assistant import (
    AssistantConfig,
    JointParamPrior,
    ParticleSet,
    init_posterior,
    plan_recommendation,
    update_posterior,
    whatif,
)
from .city import City, city_from_dict, city_to_dict, load_city
from .core import DesignChange, Dynamics, IllegalChangeError, InvalidStateError
from .trip import TripConfig, TripDesign, TripProcess, TripUtilityPrior
from .user_model import ChoiceObservation, UserParamPrior


class ChangePayload(BaseModel):
    kind: Literal["add", "remove", "noop"]
    target: int | None = None

    def to_change(self) -> DesignChange:
        if self.kind == "noop":
            return DesignChange.parse("noop")
        if self.target is None:
            raise ValueError(f"{self.kind} requires a target POI id")
        return DesignChange.parse(f"{self.kind}:{self.target}")

    @staticmethod
    def from_change(change: DesignChange) -> "ChangePayload":
        if change.is_noop:
            return ChangePayload(kind="noop", target=None)
        return ChangePayload(kind=change.kind.name.lower(), target=change.target)


class CreateSessionRequest(BaseModel):
    city: dict | None = None  # inline city document (daytrip-city/1)
    city_file: str | None = None  # or a path to one
    seed: int = 0
    n_particles: int = 256
    info_gain_weight: float = 0.0
    duration_budget_h: float = 12.0
    tour_mode: Literal["closed", "open"] = "closed"


class ChooseRequest(BaseModel):
    change: ChangePayload
    token: str | None = None


@dataclass
class Session:
    id: str
    city: City
    process: TripProcess
    config: AssistantConfig
    seed: int
    trip: TripDesign = field(default_factory=TripDesign)
    ps: ParticleSet | None = None
    history: list[ChoiceObservation] = field(default_factory=list)
    served_rec: DesignChange | None = None
    served_whatif: dict | None = None
    iteration: int = 0
    events: list[dict] = field(default_factory=list)
    token_responses: dict[str, dict] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    event_log_path: Path | None = None

    def append_event(self, kind: str, data: dict) -> None:
        event = {"seq": len(self.events), "type": kind, "data": data}
        self.events.append(event)
        if self.event_log_path is not None:
            with open(self.event_log_path, "a") as fh:
                fh.write(json.dumps(event) + "\n")


def _prior_for(city: City, config: AssistantConfig) -> JointParamPrior:
    return JointParamPrior(
        utility_prior=TripUtilityPrior(n_categories=city.config.n_categories),
        user_prior=UserParamPrior(horizon_max=config.model.horizon_max),
    )


def _build_session(
    sid: str,
    city: City,
    request: CreateSessionRequest,
    event_log_dir: str | None,
) -> Session:
    trip_config = TripConfig(
        duration_budget_h=request.duration_budget_h, tour_mode=request.tour_mode
    )
    assistant_config = AssistantConfig(
        n_particles=request.n_particles, info_gain_weight=request.info_gain_weight
    )
    process = TripProcess(city, trip_config)
    ps = init_posterior(_prior_for(city, assistant_config), assistant_config, request.seed)
    path = None
    if event_log_dir is not None:
        path = Path(event_log_dir) / f"{sid}.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
    return Session(
        id=sid, city=city, process=process, config=assistant_config,
        seed=request.seed, ps=ps, event_log_path=path,
    )


def state_payload(session: Session) -> dict:
    process = session.process
    trip = session.trip
    outcomes = process.outcomes(trip)
    legal = process.legal_changes(trip)
    top = session.ps.top_particle()
    return {
        "session_id": session.id,
        "iteration": session.iteration,
        "trip": {"tour": list(trip.tour), "outcomes": outcomes.as_dict()},
        "legal_changes": [ChangePayload.from_change(c).model_dump() for c in legal],
        "posterior": {
            "entropy": session.ps.entropy(),
            "ess": session.ps.ess(),
            "n_particles": len(session.ps),
            "top_particle": {
                "weight": float(session.ps.weights.max()),
                "cost_weight": top.utility.cost_weight,
                "category_prefs": list(top.utility.category_prefs),
                "walk_penalty": top.utility.walk_penalty,
                "beta_select": top.user.beta_select,
                "beta_switch": top.user.beta_switch,
                "beta_stop": top.user.beta_stop,
                "horizon": top.user.horizon,
            },
        },
        "recommendation_pending": session.served_rec is not None,
        "history_length": len(session.history),
    }


def _apply_choice(session: Session, change: DesignChange, token: str | None) -> dict:
    """Shared by the live endpoint and event replay; caller holds the lock."""
    process = session.process
    legal = process.legal_changes(session.trip)
    if change not in legal:
        raise IllegalChangeError(f"{change.describe()} is not legal in the current trip")
    rec = session.served_rec
    obs = ChoiceObservation(session.trip, rec, change)
    session.trip = process.apply(session.trip, change, Dynamics.OBJECTIVE)
    session.ps = update_posterior(session.ps, obs, process, session.config)
    session.history.append(obs)
    session.served_rec = None
    session.served_whatif = None
    session.iteration += 1
    session.append_event(
        "choice_applied",
        {
            "change": change.describe(),
            "recommendation": rec.describe() if rec is not None else None,
            "token": token,
        },
    )
    return state_payload(session)


def replay_events(events: list[dict]) -> Session:
    """Rebuild a session from its event log; equals the live session state."""
    if not events or events[0]["type"] != "session_created":
        raise ValueError("event log must start with session_created")
    created = events[0]["data"]
    request = CreateSessionRequest(
        city=created["city"],
        seed=created["seed"],
        n_particles=created["n_particles"],
        info_gain_weight=created["info_gain_weight"],
        duration_budget_h=created["duration_budget_h"],
        tour_mode=created["tour_mode"],
    )
    session = _build_session(created["session_id"], city_from_dict(created["city"]), request, None)
    session.append_event("session_created", created)
    for event in events[1:]:
        data = event["data"]
        if event["type"] == "recommendation_served":
            session.served_rec = DesignChange.parse(data["change"])
            session.served_whatif = data["whatif"]
            session.append_event("recommendation_served", data)
        elif event["type"] == "choice_applied":
            _apply_choice(session, DesignChange.parse(data["change"]), data.get("token"))
        else:
            raise ValueError(f"unknown event type {event['type']!r}")
    return session


def create_app(event_log_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="daytrip design service")
    store: dict[str, Session] = {}
    app.state.sessions = store

    def _get_session(sid: str) -> Session:
        session = store.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {sid!r}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(request: CreateSessionRequest):
        if request.city is None and request.city_file is None:
            raise HTTPException(
                status_code=400, detail="provide 'city' (inline document) or 'city_file'"
            )
        try:
            city = (
                city_from_dict(request.city)
                if request.city is not None
                else load_city(request.city_file)
            )
        except (ValueError, KeyError, OSError) as exc:
            raise HTTPException(status_code=400, detail=f"bad city: {exc}") from exc
        sid = uuid.uuid4().hex[:12]
        session = _build_session(sid, city, request, event_log_dir)
        session.append_event(
            "session_created",
            {
                "session_id": sid,
                "city": city_to_dict(city),
                "seed": request.seed,
                "n_particles": request.n_particles,
                "info_gain_weight": request.info_gain_weight,
                "duration_budget_h": request.duration_budget_h,
                "tour_mode": request.tour_mode,
            },
        )
        store[sid] = session
        return {"session_id": sid, "state": state_payload(session)}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return state_payload(_get_session(sid))

    @app.get("/sessions/{sid}/recommendation")
    def get_recommendation(sid: str):
        session = _get_session(sid)
        with session.lock:
            if session.served_rec is not None:
                return {
                    "recommendation": ChangePayload.from_change(session.served_rec).model_dump(),
                    "whatif": session.served_whatif,
                }
            rec = plan_recommendation(session.ps, session.trip, session.process, session.config)
            if rec is None:
                return {"no_recommendation": True}
            report = whatif(session.trip, rec, session.ps, session.process, session.config)
            session.served_rec = rec
            session.served_whatif = report.to_dict()
            session.append_event(
                "recommendation_served",
                {"change": rec.describe(), "whatif": session.served_whatif},
            )
            return {
                "recommendation": ChangePayload.from_change(rec).model_dump(),
                "whatif": session.served_whatif,
            }

    @app.post("/sessions/{sid}/choose")
    def choose(sid: str, request: ChooseRequest):
        session = _get_session(sid)
        with session.lock:
            if request.token is not None and request.token in session.token_responses:
                return session.token_responses[request.token]
            try:
                change = request.change.to_change()
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            try:
                payload = _apply_choice(session, change, request.token)
            except IllegalChangeError as exc:
                legal = session.process.legal_changes(session.trip)
                raise HTTPException(
                    status_code=409,
                    detail={
                        "error": str(exc),
                        "legal_changes": [c.describe() for c in legal],
                    },
                ) from exc
            if request.token is not None:
                session.token_responses[request.token] = payload
            return payload

    @app.get("/sessions/{sid}/whatif")
    def get_whatif(sid: str, change: str):
        session = _get_session(sid)
        try:
            parsed = DesignChange.parse(change)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            report = whatif(session.trip, parsed, session.ps, session.process, session.config)
        except (IllegalChangeError, InvalidStateError) as exc:
            legal = session.process.legal_changes(session.trip)
            raise HTTPException(
                status_code=409,
                detail={"error": str(exc), "legal_changes": [c.describe() for c in legal]},
            ) from exc
        return report.to_dict()

    @app.get("/sessions/{sid}/events")
    def get_events(sid: str):
        return {"events": _get_session(sid).events}

    return app
