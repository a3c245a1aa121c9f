"""HTTP session service: a live human plays the acting user.

Each session holds the ground-truth world, the agent's belief, and derived
rng streams keyed the same way the episode runner keys them, so a recorded
session can be replayed through the simulator and produce identical belief
snapshots. Handlers for one session run under a lock; concurrent submits are
rejected rather than queued.
"""
from __future__ import annotations

import asyncio
import json
import random
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from . import belief as bel
from . import momdp
from .domains import domain_names, load_domain
from .momdp import PlannerConfig
from .planner import plan_action
from .simulator import DEFAULT_C, derive_seed, sense
from .tasknet import TaskNet, apply_primitive

V = 1

QUESTION_TEMPLATE = "I believe that you just did action ({action}), is this correct?"
INSTRUCTION_TEMPLATE = "I think the correct step is ({action})."


class CreateSessionRequest(BaseModel):
    v: int = V
    domain: str
    sr: float = 0.95
    seed: int = 0
    sims: int = 500
    depth: int = 19
    obs_samples: int = 6
    ucb_c: float = 5.0
    gamma: float = 0.95
    wait_cost: float = 0.0
    c: float = DEFAULT_C


class StepRequest(BaseModel):
    v: int = V
    action: str


class UtteranceRequest(BaseModel):
    v: int = V
    text: str


@dataclass
class Session:
    id: str
    net: TaskNet
    domain: str
    sr: float
    c: float
    planner: PlannerConfig
    seed: int
    belief: bel.Belief
    world: dict[str, bool]
    rng_policy: random.Random
    transcript: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    step_index: int = 0
    pending_question: str | None = None
    # held so an answer can be folded back into the step it refers to
    pre_step_belief: bel.Belief | None = None
    last_observation: bel.WorldObservation | None = None


def _snapshot(s: Session) -> dict:
    return bel.snapshot(s.belief)


def _turn(s: Session, kind: str, target: str | None, text: str | None) -> dict:
    turn = {
        "v": V,
        "turn": len(s.transcript),
        "kind": kind,
        "target": target,
        "text": text,
        "snapshot": _snapshot(s),
        "pending_question": s.pending_question,
    }
    s.transcript.append(turn)
    return turn


def _decide(s: Session, rng: random.Random) -> dict:
    action = plan_action(s.belief, s.net, s.planner, rng)
    if action.kind == "ask":
        s.pending_question = action.target
        return _turn(s, "ask", action.target, QUESTION_TEMPLATE.format(action=action.target))
    s.pending_question = None
    return _turn(s, "wait", None, None)


def create_app() -> FastAPI:
    app = FastAPI(title="goalcoach session service")
    sessions: dict[str, Session] = {}

    def get_session(session_id: str) -> Session:
        s = sessions.get(session_id)
        if s is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return s

    @app.get("/domains")
    def list_domains() -> dict:
        out = []
        for name in sorted(domain_names()):
            net = load_domain(name)
            out.append(
                {
                    "name": name,
                    "goals": list(net.goals),
                    "primitives": sorted(net.primitives),
                    "primitives_by_goal": {
                        g: sorted(net.primitives_under(g)) for g in net.goals
                    },
                    "vars": list(net.var_order),
                }
            )
        return {"v": V, "domains": out}

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest) -> dict:
        if req.domain not in domain_names():
            raise HTTPException(status_code=404, detail=f"unknown domain: {req.domain!r}")
        if not 0.5 <= req.sr <= 1.0:
            raise HTTPException(status_code=422, detail="sr outside [0.5, 1.0]")
        net = load_domain(req.domain)
        planner = PlannerConfig(
            depth=req.depth, obs_samples=req.obs_samples, sims=req.sims,
            ucb_c=req.ucb_c, gamma=req.gamma, c=req.c, sr=req.sr,
            wait_cost=req.wait_cost, seed=req.seed,
        )
        s = Session(
            id=uuid.uuid4().hex,
            net=net,
            domain=req.domain,
            sr=req.sr,
            c=req.c,
            planner=planner,
            seed=req.seed,
            belief=bel.init_belief(net),
            world=net.initial_world(),
            rng_policy=random.Random(derive_seed(req.seed, "policy", "d4gr")),
        )
        sessions[s.id] = s
        return {"v": V, "id": s.id, "snapshot": _snapshot(s)}

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> dict:
        s = get_session(session_id)
        return {
            "v": V,
            "id": s.id,
            "domain": s.domain,
            "sr": s.sr,
            "step": s.step_index,
            "snapshot": _snapshot(s),
            "pending_question": s.pending_question,
            "transcript": s.transcript,
            "ground_truth": dict(s.world),
        }

    @app.post("/sessions/{session_id}/step")
    def submit_step(session_id: str, req: StepRequest) -> dict:
        s = get_session(session_id)
        if req.action not in s.net.primitives:
            raise HTTPException(status_code=404, detail=f"unknown primitive: {req.action!r}")
        if not s.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="turn already in flight")
        try:
            s.world = apply_primitive(s.net, s.world, req.action)
            rng_sense = random.Random(derive_seed(s.seed, s.step_index))
            ow = bel.WorldObservation(sense(s.net, s.world, rng_sense, s.sr))
            s.pre_step_belief = s.belief
            s.last_observation = ow
            try:
                s.belief = bel.belief_step(
                    s.belief, ow, bel.LanguageLabel.NONE, None, s.net, sr=s.sr, c=s.c
                )
            except bel.RecognitionError as e:
                raise HTTPException(status_code=409, detail=str(e)) from e
            s.step_index += 1
            return _decide(s, s.rng_policy)
        finally:
            s.lock.release()

    @app.post("/sessions/{session_id}/utterance")
    def submit_utterance(session_id: str, req: UtteranceRequest) -> dict:
        s = get_session(session_id)
        if s.pending_question is None:
            raise HTTPException(status_code=409, detail="no question is pending")
        if not s.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="turn already in flight")
        try:
            label = momdp.classify_utterance(req.text)
            redecide_rng = random.Random(
                derive_seed(s.seed, "redecide", len(s.transcript))
            )
            if label is bel.LanguageLabel.NONE:
                # unparseable answer: belief unchanged, question stays open
                return _decide_keeping_question(s, redecide_rng)
            q = s.pending_question
            s.belief = bel.belief_step(
                s.pre_step_belief, s.last_observation, label, q, s.net, sr=s.sr, c=s.c
            )
            s.pending_question = None
            if label is bel.LanguageLabel.NEGATIVE:
                suggestion = bel.predict_next_action(s.belief, s.net)
                return _turn(
                    s, "inform", suggestion, INSTRUCTION_TEMPLATE.format(action=suggestion)
                )
            return _decide(s, redecide_rng)
        finally:
            s.lock.release()

    def _decide_keeping_question(s: Session, rng: random.Random) -> dict:
        q = s.pending_question
        turn = _decide(s, rng)
        if turn["kind"] == "wait":
            # the question remains on the table
            s.pending_question = q
            turn["pending_question"] = q
        return turn

    @app.get("/sessions/{session_id}/events")
    async def events(session_id: str, last: int = -1, once: bool = False):
        """Event stream of agent turns; `once` drains the backlog and closes,
        for polling clients that reconnect with `last`."""
        s = get_session(session_id)

        async def stream():
            cursor = last + 1
            while True:
                while cursor < len(s.transcript):
                    turn = s.transcript[cursor]
                    yield f"id: {cursor}\ndata: {json.dumps(turn, sort_keys=True)}\n\n"
                    cursor += 1
                if once:
                    return
                await asyncio.sleep(0.2)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


app = create_app()
