"""Session-oriented HTTP facade for interactive evidence exploration.

A session holds a pristine diagram plus an ordered evidence log; the
current diagram is always rebuilt by replaying the log on the pristine
copy, so retraction is trivially correct and identical logs always produce
identical responses.  Sessions live in memory; an optional snapshot of
(diagram, log) pairs is written on shutdown.

All endpoints are JSON under /v1.  Errors use {code, message, details}.
Requests touching one session are serialized by a per-session lock;
distinct sessions proceed in parallel.
"""

from __future__ import annotations

import json
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .bench import compare_methods, voe_by_lock, voe_by_lock_conditional, voe_by_propagation
from .core import Diagram, DiagramError, UnknownNodeError
from .evidence import Evidence, EvidenceError, ImpossibleEvidenceError
from .fileio import (
    ParseError,
    ValidationFailure,
    diagram_document,
    evidence_from_document,
    evidence_to_document,
    load_diagram,
    policy_document,
)
from .transforms import EvaluationResult, evaluate
from .valuation import (
    JointConditionalTable,
    propagate_observation,
    ValuationError,
    VoeReport,
    build_joint,
    default_vopi_decision,
    informed_evaluation,
    outcome_sensitivity,
    value_of_control,
    voe_report,
    vopi_from_voe,
)


@dataclass
class Session:
    id: str
    pristine: Diagram
    evidence_log: list[Evidence] = field(default_factory=list)
    joints: dict[str, JointConditionalTable] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    current: Diagram = None  # type: ignore[assignment]
    baseline: EvaluationResult = None  # type: ignore[assignment]
    current_eval: EvaluationResult = None  # type: ignore[assignment]

    def rebuild(self) -> None:
        diagram = self.pristine
        for ev in self.evidence_log:
            diagram = propagate_observation(diagram, ev).diagram
        self.current = diagram
        self.current_eval = evaluate(diagram)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details=None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details or []
        super().__init__(message)


def _error_response(exc: ApiError) -> JSONResponse:
    return JSONResponse(
        status_code=exc.status,
        content={"code": exc.code, "message": exc.message, "details": exc.details},
    )


def _report_json(report: VoeReport) -> dict:
    return {
        "node": report.node,
        "mode": report.mode,
        "baselineEv": report.baseline_ev,
        "entries": [
            {
                "outcome": e.outcome,
                "probability": e.probability,
                "evAfter": e.ev_after,
                "voe": e.voe,
                "policy": policy_document(e.policy),
            }
            for e in report.entries
        ],
    }


def create_app(
    default_diagram: dict | None = None,
    snapshot_path: str | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    sessions: dict[str, Session] = {}
    store_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        if snapshot_path:
            snap = [
                {
                    "id": s.id,
                    "diagram": diagram_document(s.pristine),
                    "evidence": [evidence_to_document(e) for e in s.evidence_log],
                }
                for s in sessions.values()
            ]
            with open(snapshot_path, "w", encoding="utf-8") as fh:
                json.dump({"sessions": snap}, fh, indent=2, sort_keys=True)

    app = FastAPI(title="infdiag session service", lifespan=lifespan)

    @app.exception_handler(ApiError)
    async def _on_api_error(_req, exc: ApiError):
        return _error_response(exc)

    def _session(session_id: str) -> Session:
        with store_lock:
            session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown-session", f"no session {session_id!r}")
        return session

    def _wrap(fn):
        try:
            return fn()
        except ImpossibleEvidenceError as exc:
            raise ApiError(409, "impossible-evidence", str(exc))
        except (EvidenceError, ValuationError) as exc:
            raise ApiError(409, "inadmissible", str(exc))
        except UnknownNodeError as exc:
            raise ApiError(404, "unknown-node", str(exc))
        except ValidationFailure as exc:
            raise ApiError(422, "invalid-diagram", "diagram failed validation",
                           [str(v) for v in exc.violations])
        except ParseError as exc:
            raise ApiError(422, "parse-error", str(exc))
        except DiagramError as exc:
            raise ApiError(409, "structural", str(exc))

    def _state(session: Session) -> dict:
        return {
            "id": session.id,
            "name": session.pristine.name,
            "baselineEv": session.baseline.ev,
            "ev": session.current_eval.ev,
            "policy": policy_document(session.current_eval.policy),
            "maxSpace": session.current_eval.ledger.max_space,
            "evidence": [evidence_to_document(e) for e in session.evidence_log],
            "voeFromBaseline": session.current_eval.ev - session.baseline.ev,
        }

    @app.get("/v1/default-diagram")
    async def get_default():
        if default_diagram is None:
            raise ApiError(404, "no-default", "service started without a default diagram")
        return default_diagram

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.body()

        def build():
            diagram = load_diagram(body)
            session = Session(id=uuid.uuid4().hex, pristine=diagram)
            session.baseline = evaluate(diagram)
            session.rebuild()
            return session

        session = _wrap(build)
        with store_lock:
            sessions[session.id] = session
        return _state(session)

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        session = _session(session_id)
        with session.lock:
            return _state(session)

    @app.get("/v1/sessions/{session_id}/diagram")
    async def get_diagram(session_id: str):
        session = _session(session_id)
        with session.lock:
            return diagram_document(session.current)

    @app.get("/v1/sessions/{session_id}/evaluate")
    async def get_evaluate(session_id: str):
        session = _session(session_id)
        with session.lock:
            result = session.current_eval
            return {
                "ev": result.ev,
                "policy": policy_document(result.policy),
                "maxSpace": result.ledger.max_space,
            }

    @app.post("/v1/sessions/{session_id}/evidence")
    async def apply_evidence(session_id: str, request: Request):
        session = _session(session_id)
        body = await request.json()
        with session.lock:
            def apply():
                ev = evidence_from_document(body)
                if any(e.node == ev.node for e in session.evidence_log):
                    raise EvidenceError(
                        f"evidence on {ev.node!r} already applied; retract it first"
                    )
                previous = session.current_eval.ev
                result = propagate_observation(session.current, ev)
                session.evidence_log.append(ev)
                session.rebuild()
                state = _state(session)
                state["evidenceWeight"] = result.evidence_weight
                state["delta"] = session.current_eval.ev - previous
                return state

            return _wrap(apply)

    @app.delete("/v1/sessions/{session_id}/evidence/{node}")
    async def retract_evidence(session_id: str, node: str):
        session = _session(session_id)
        with session.lock:
            kept = [e for e in session.evidence_log if e.node != node]
            if len(kept) == len(session.evidence_log):
                raise ApiError(404, "no-such-evidence", f"no evidence on {node!r} to retract")
            session.evidence_log = kept
            _wrap(session.rebuild)
            return _state(session)

    @app.post("/v1/sessions/{session_id}/reset")
    async def reset(session_id: str):
        session = _session(session_id)
        with session.lock:
            session.evidence_log = []
            _wrap(session.rebuild)
            return _state(session)

    @app.post("/v1/sessions/{session_id}/joints")
    async def register_joint(session_id: str, request: Request):
        session = _session(session_id)
        body = await request.json()
        with session.lock:
            def register():
                node = body.get("node")
                raw = body.get("joint")
                if not isinstance(node, str) or not isinstance(raw, dict):
                    raise ParseError("joint document needs 'node' and 'joint'")
                from .fileio import parse_vector_label
                from .core import iter_label_configs

                parents = session.current.parents(node)
                configs = tuple(
                    iter_label_configs([session.current.space(p) for p in parents])
                )
                probabilities = {}
                for label, p in raw.items():
                    comps = dict(parse_vector_label(label))
                    if set(comps) != set(configs):
                        raise ParseError(f"vector {label!r} does not match configurations")
                    probabilities[tuple(comps[c] for c in configs)] = float(p)
                joint = build_joint(session.current, node, probabilities)
                session.joints[node] = joint
                return {"node": node, "vectors": len(joint.entries)}

            return _wrap(register)

    @app.get("/v1/sessions/{session_id}/metrics")
    async def get_metrics(
        session_id: str,
        node: str,
        mode: str = "naive",
        method: str = "1",
        decision: str | None = None,
    ):
        session = _session(session_id)
        with session.lock:
            def compute():
                diagram = session.current
                if node not in diagram.nodes:
                    raise UnknownNodeError(f"no node {node!r} in the current diagram")
                joint = None
                if mode == "full":
                    joint = session.joints.get(node)
                    if joint is None:
                        raise EvidenceError(
                            f"full mode needs a joint registered for {node!r}"
                        )
                elif mode != "naive":
                    raise EvidenceError(f"unknown mode {mode!r}")
                if method == "1":
                    report, ledger = voe_by_propagation(diagram, node, joint)
                elif method == "2":
                    if joint is None:
                        report, ledger = voe_by_lock(diagram, node)
                    else:
                        report, ledger = voe_by_lock_conditional(diagram, node, joint)
                else:
                    raise EvidenceError(f"unknown method {method!r}")
                dec = decision
                vopi_std = None
                if dec is None:
                    try:
                        dec = default_vopi_decision(diagram, node)
                    except ValuationError:
                        dec = None
                if dec is not None:
                    try:
                        vopi_std = (
                            informed_evaluation(diagram, node, dec, joint).ev
                            - report.baseline_ev
                        )
                    except DiagramError:
                        vopi_std = None
                return {
                    "node": node,
                    "mode": mode,
                    "method": method,
                    "report": _report_json(report),
                    "outcomeSensitivity": outcome_sensitivity(report),
                    "vopi": {"fromVoe": vopi_from_voe(report), "standard": vopi_std,
                             "decision": dec},
                    "voc": {"fromVoe": value_of_control(report)},
                    "maxSpace": ledger.max_space,
                }

            return _wrap(compute)

    @app.get("/v1/sessions/{session_id}/bench")
    async def get_bench(session_id: str, node: str, decision: str):
        session = _session(session_id)
        with session.lock:
            def compute():
                comparison = compare_methods(session.current, node, decision)
                return {
                    "node": comparison.node,
                    "decision": comparison.decision,
                    "rows": comparison.rows(session.current.name),
                    "violations": comparison.violations,
                }

            return _wrap(compute)

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
