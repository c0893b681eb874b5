"""Interactive play sessions over HTTP: humans and bots occupy seats, submit
actions, and receive redacted views. Completed sessions export their round
log in corpus format, so human play becomes gold data."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .datagen import RandomPolicy, emit_samples
from .engine import (
    Action,
    IllegalAction,
    RoundLog,
    Transition,
    blank_state,
    legal_actions,
    pending_step,
    step,
)
from .diff import render_diff
from .script import GameSpec, ScriptError, parse_script, validate_spec
from .state import NO_INPUT, GameState, PlayerInput, view_for_player

import random


class ServiceError(Exception):
    def __init__(self, code: str, detail: str, status: int = 400, extra: dict | None = None):
        super().__init__(detail)
        self.code = code
        self.detail = detail
        self.status = status
        self.extra = extra or {}

    def payload(self) -> dict:
        return {"error": self.code, "detail": self.detail, **self.extra}


class UnknownSession(ServiceError):
    def __init__(self, session_id: str):
        super().__init__("UnknownSession", f"no session {session_id!r}", status=404)


class NotYourTurn(ServiceError):
    def __init__(self, seat: int, actor):
        super().__init__("NotYourTurn", f"seat {seat} may not act (actor is {actor})",
                         status=409)


def _action_to_dict(a: Action) -> dict:
    d: dict = {"kind": a.kind}
    if a.amount is not None:
        d["amount"] = a.amount
    if a.cards:
        d["cards"] = list(a.cards)
    return d


def _action_from_dict(d: dict) -> Action:
    kind = d.get("kind")
    if not isinstance(kind, str):
        raise ServiceError("BadAction", "action needs a 'kind'")
    return Action(kind, d.get("amount"), tuple(sorted(d.get("cards", ()))))


def _legal_sorted(legal) -> list[dict]:
    return [_action_to_dict(a)
            for a in sorted(legal, key=lambda a: (a.kind, a.amount or 0, a.cards))]


@dataclass
class Session:
    id: str
    spec: GameSpec
    seed: int
    state: GameState
    seats: dict[int, str] = field(default_factory=dict)   # seat -> "open"|"human"|"bot"
    bots: dict[int, RandomPolicy] = field(default_factory=dict)
    transitions: list[Transition] = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock)
    cond: threading.Condition = None  # type: ignore[assignment]
    rng: random.Random = None  # type: ignore[assignment]

    def __post_init__(self):
        self.cond = threading.Condition(self.lock)
        self.rng = random.Random(f"session-{self.id}-{self.seed}")

    @property
    def step_count(self) -> int:
        return len(self.transitions)

    def status(self) -> str:
        if any(kind == "open" for kind in self.seats.values()):
            return "waiting"
        if self.state.finished():
            return "finished"
        return "active"


class PlayService:
    """Server-held sessions with per-session serialization of mutations."""

    def __init__(self, data_dir=None):
        self.sessions: dict[str, Session] = {}
        self._counter = 0
        self._registry_lock = threading.Lock()
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir:
            self.data_dir.mkdir(parents=True, exist_ok=True)

    # -- session registry ---------------------------------------------------

    def create_session(self, script_text: str, seed: int | None = None) -> dict:
        try:
            spec = parse_script(script_text)
        except ScriptError as e:
            raise ServiceError(type(e).__name__, str(e), extra={"line": e.line}) from None
        violations = validate_spec(spec)
        if violations:
            raise ServiceError("InvalidSpec", "; ".join(
                f"{v.code}: {v.detail}" for v in violations))
        with self._registry_lock:
            self._counter += 1
            sid = f"s{self._counter:06d}"
        if seed is None:
            seed = random.randrange(2**31)
        session = Session(sid, spec, seed, blank_state(spec, seed),
                          seats={p: "open" for p in spec.seats()})
        self.sessions[sid] = session
        self._persist(session, {"event": "created", "seed": seed, "script": script_text})
        return {"session_id": sid, "players": spec.num_players, "status": session.status()}

    def _get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    def _persist(self, session: Session, record: dict) -> None:
        if not self.data_dir:
            return
        path = self.data_dir / f"{session.id}.ndjson"
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, sort_keys=True) + "\n")

    # -- seating ------------------------------------------------------------

    def join(self, session_id: str, seat: int) -> dict:
        session = self._get(session_id)
        with session.lock:
            self._claim(session, seat, "human")
            self._drive(session)
            return self.get_view(session_id, seat)

    def add_bot(self, session_id: str, seat: int, seed: int = 0) -> dict:
        session = self._get(session_id)
        with session.lock:
            self._claim(session, seat, "bot")
            session.bots[seat] = RandomPolicy(f"bot-{session.id}-{seat}-{seed}")
            self._drive(session)
            return {"session_id": session.id, "seat": seat, "status": session.status()}

    def _claim(self, session: Session, seat: int, kind: str) -> None:
        if seat not in session.seats:
            raise ServiceError("BadSeat", f"no seat {seat} in this game")
        if session.seats[seat] != "open":
            raise ServiceError("SeatTaken", f"seat {seat} already {session.seats[seat]}")
        session.seats[seat] = kind

    # -- play ---------------------------------------------------------------

    def _apply(self, session: Session, player_input: PlayerInput) -> None:
        nxt, d = step(session.spec, session.state, player_input,
                      seed=session.rng.getrandbits(32))
        category = pending_step(session.spec, session.state).kind
        t = Transition(session.state, player_input, nxt, d, category)
        session.transitions.append(t)
        session.state = nxt
        self._persist(session, {
            "event": "transition",
            "step_idx": session.step_count - 1,
            "category": category,
            "input": player_input.render(),
            "diff": render_diff(d),
        })
        session.cond.notify_all()

    def _drive(self, session: Session) -> None:
        """Advance automatic steps and bot turns until a human must act."""
        if session.status() != "active":
            return
        while not session.state.finished():
            actor = session.state.current_actor
            if actor is None:
                self._apply(session, NO_INPUT)
            elif session.seats.get(actor) == "bot":
                legal = legal_actions(session.spec, session.state)
                view = view_for_player(session.state, actor)
                action = session.bots[actor](session.spec, view, legal)
                self._apply(session, action.to_input(actor))
            else:
                break

    def post_action(self, session_id: str, seat: int, action: dict) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.status() == "waiting":
                raise ServiceError("NotStarted", "seats are still open", status=409)
            if session.seats.get(seat) != "human":
                raise ServiceError("BadSeat", f"seat {seat} is not a joined human seat")
            if session.state.current_actor != seat:
                raise NotYourTurn(seat, session.state.current_actor)
            act = _action_from_dict(action)
            try:
                self._apply(session, act.to_input(seat))
            except IllegalAction as e:
                raise ServiceError("IllegalAction", e.reason, status=409,
                                   extra={"legal": _legal_sorted(e.legal)}) from None
            self._drive(session)
            return self.get_view(session_id, seat)

    # -- reads --------------------------------------------------------------

    def get_view(self, session_id: str, seat: int) -> dict:
        session = self._get(session_id)
        with session.lock:
            if seat not in session.seats:
                raise ServiceError("BadSeat", f"no seat {seat} in this game")
            view = view_for_player(session.state, seat)
            legal = ()
            if session.state.current_actor == seat:
                legal = legal_actions(session.spec, session.state)
            return {
                "session_id": session.id,
                "seat": seat,
                "step": session.step_count,
                "status": session.status(),
                "seats": {str(p): kind for p, kind in sorted(session.seats.items())},
                "state": view.to_tree(),
                "legal": _legal_sorted(legal),
                "your_turn": session.state.current_actor == seat,
            }

    def wait_view(self, session_id: str, seat: int, since: int, timeout: float = 10.0) -> dict:
        """Long-poll: block until the session advances past ``since`` steps."""
        session = self._get(session_id)
        with session.lock:
            session.cond.wait_for(
                lambda: session.step_count > since or session.state.finished(),
                timeout=timeout)
            return self.get_view(session_id, seat)

    def get_log(self, session_id: str, mode: str = "DSP") -> str:
        """Round log in corpus format (one sample per line)."""
        session = self._get(session_id)
        with session.lock:
            log = RoundLog(session.spec, session.seed, list(session.transitions))
            records = emit_samples(log, mode.upper(), round_id=session.id)
            return "".join(r.to_json() + "\n" for r in records)


# ---------------------------------------------------------------------------
# HTTP wiring
# ---------------------------------------------------------------------------

def build_app(service: PlayService | None = None):
    """FastAPI app over a PlayService."""
    from fastapi import Body, FastAPI, Request
    from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

    svc = service or PlayService()
    app = FastAPI(title="cardroom play service")
    app.state.service = svc

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content=exc.payload())

    @app.post("/sessions")
    def create_session(body: dict = Body(...)):
        return svc.create_session(body.get("script", ""), body.get("seed"))

    @app.post("/sessions/{sid}/join")
    def join(sid: str, body: dict = Body(...)):
        return svc.join(sid, int(body.get("seat", 0)))

    @app.post("/sessions/{sid}/bots")
    def add_bot(sid: str, body: dict = Body(...)):
        return svc.add_bot(sid, int(body.get("seat", 0)), int(body.get("seed", 0)))

    @app.get("/sessions/{sid}/view")
    def get_view(sid: str, seat: int):
        return svc.get_view(sid, seat)

    @app.post("/sessions/{sid}/actions")
    def post_action(sid: str, body: dict = Body(...)):
        return svc.post_action(sid, int(body.get("seat", 0)), body.get("action", {}))

    @app.get("/sessions/{sid}/events")
    def events(sid: str, seat: int, since: int = 0, timeout: float = 10.0):
        return svc.wait_view(sid, seat, since, min(timeout, 30.0))

    @app.get("/sessions/{sid}/log")
    def get_log(sid: str, mode: str = "dsp"):
        return PlainTextResponse(svc.get_log(sid, mode))

    @app.get("/sessions/{sid}/stream")
    def stream(sid: str, seat: int, max_events: int = 256):
        def gen():
            since = -1
            for _ in range(max_events):
                view = svc.wait_view(sid, seat, since, timeout=15.0)
                if view["step"] == since and view["status"] != "finished":
                    continue
                since = view["step"]
                yield "data: " + json.dumps(view, sort_keys=True) + "\n\n"
                if view["status"] == "finished":
                    return
        return StreamingResponse(gen(), media_type="text/event-stream")

    return app
