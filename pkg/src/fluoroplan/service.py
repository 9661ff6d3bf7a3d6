"""Stateful planning sessions behind a JSON message protocol.

A client opens a case, selects vertebrae, initializes screws, streams
edits, and exports plans, all through one message catalog (see
``schema/protocol.schema.json``). The engine here is transport-neutral:
it maps one request dict to one reply dict. Newline-delimited-JSON and
HTTP transports live in :mod:`fluoroplan.server`.

Replies to state-changing messages carry the session revision, which
increases by exactly 1 per change, and the freshly recomputed per-view
projections of the affected screw. All reply content is deterministic, so
replaying a recorded message log on a fresh service reproduces the same
state byte for byte (see :func:`canonical_json`).
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .anatomy import hit_test_vertebra, resolve_ivdl
from .caseio import (
    CaseFile,
    PlanDocument,
    PlannedScrew,
    bbox_json,
    calibration_json,
    load_case,
    projection_json,
    save_plan,
    screw_json,
    spec_json,
)
from .errors import (
    FluoroplanError,
    ForbiddenPath,
    StaleRevision,
    UnknownLabel,
    UnknownMessage,
    UnknownScrew,
    UnknownSession,
    ValidationError,
)
from .geometry import Point2, ViewKind, project_screw
from .planning import Screw3D, compute_screw_spec, init_screw, validate_containment
from .sync import EditOp, MoveEndpoint, Resize, Translate, apply_edit

#: Environment variable confining open_case / export_plan paths.
CASE_ROOT_ENV = "FLUOROPLAN_CASE_ROOT"


def canonical_json(obj: Any) -> str:
    """The stable wire form: sorted keys, no whitespace, no NaN.

    Identical reply dicts serialize to identical bytes, which is what the
    replay guarantee is stated against.
    """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _require(msg: dict, key: str) -> Any:
    if key not in msg:
        raise ValidationError(f"message field {key!r} is missing", field=key)
    return msg[key]


def _num(msg: dict, key: str) -> float:
    v = _require(msg, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"message field {key!r} must be a number", field=key)
    return float(v)


def _text(msg: dict, key: str) -> str:
    v = _require(msg, key)
    if not isinstance(v, str):
        raise ValidationError(f"message field {key!r} must be a string", field=key)
    return v


def _xy(msg: dict, key: str) -> tuple[float, float]:
    v = _require(msg, key)
    if (
        not isinstance(v, list)
        or len(v) != 2
        or any(isinstance(e, bool) or not isinstance(e, (int, float)) for e in v)
    ):
        raise ValidationError(f"message field {key!r} must be [u, v]", field=key)
    return (float(v[0]), float(v[1]))


def _view(msg: dict, key: str = "view") -> ViewKind:
    name = _text(msg, key)
    if name not in ("AP", "LP"):
        raise ValidationError(
            f"message field {key!r} must be 'AP' or 'LP', got {name!r}", field=key
        )
    return ViewKind(name)


def parse_edit_op(obj: Any) -> EditOp:
    """Wire form of an edit: {"kind": "translate"|"move_endpoint"|"resize", ...}."""
    if not isinstance(obj, dict):
        raise ValidationError("op must be an object", field="op")
    kind = obj.get("kind")
    if kind == "translate":
        return Translate(
            view=_view(obj), du_px=_num(obj, "du_px"), dv_px=_num(obj, "dv_px")
        )
    if kind == "move_endpoint":
        u, v = _xy(obj, "new_px")
        return MoveEndpoint(
            view=_view(obj), endpoint=_text(obj, "endpoint"), new_px=Point2(u, v)
        )
    if kind == "resize":
        return Resize(new_radius_mm=_num(obj, "new_radius_mm"))
    raise ValidationError(f"unknown edit kind {kind!r}", field="op.kind")


def edit_op_json(op: EditOp) -> dict:
    """Inverse of :func:`parse_edit_op`; used by clients and transcripts."""
    if isinstance(op, Translate):
        return {
            "kind": "translate",
            "view": op.view.value,
            "du_px": op.du_px,
            "dv_px": op.dv_px,
        }
    if isinstance(op, MoveEndpoint):
        return {
            "kind": "move_endpoint",
            "view": op.view.value,
            "endpoint": op.endpoint,
            "new_px": [op.new_px.u, op.new_px.v],
        }
    return {"kind": "resize", "new_radius_mm": op.new_radius_mm}


@dataclass
class ScrewRecord:
    """A live screw plus the context needed to rebuild its reply payload."""

    screw: Screw3D
    ivdl_mm: float
    ivdl_warnings: tuple[str, ...]


@dataclass
class Session:
    """One operator planning one case; revision counts state changes."""

    id: str
    case: CaseFile
    screws: dict[str, ScrewRecord] = field(default_factory=dict)
    revision: int = 0
    selection: dict[str, dict] = field(default_factory=dict)


class PlanningService:
    """Message-dispatch engine over any number of sessions.

    ``case_root``, or the FLUOROPLAN_CASE_ROOT environment variable when
    the argument is omitted, confines every path the protocol accepts.
    Messages are processed one at a time; session ids are a deterministic
    counter so recorded transcripts replay exactly.
    """

    def __init__(self, case_root: str | Path | None = None):
        if case_root is None:
            case_root = os.environ.get(CASE_ROOT_ENV) or None
        self.case_root = Path(case_root).resolve() if case_root is not None else None
        self.sessions: dict[str, Session] = {}
        self._counter = 0
        self._lock = threading.Lock()

    # -- public entry point -------------------------------------------------

    def handle_message(self, msg: Any, session_id: str | None = None) -> dict:
        """One request dict in, one reply dict out; errors go in-band.

        ``session_id`` is the transport's bound session (connection-scoped
        protocols); an explicit "session" field in the message wins over
        it. Replies echo the request's "req" id.
        """
        req = msg.get("req") if isinstance(msg, dict) else None
        with self._lock:
            try:
                if not isinstance(msg, dict):
                    raise UnknownMessage("message must be a JSON object")
                result, sid = self._dispatch(msg, session_id)
            except FluoroplanError as e:
                return {"req": req, "ok": False, "error": self._error_json(e)}
        reply = {"req": req, "ok": True, "result": result}
        if sid is not None:
            reply["session"] = sid
        return reply

    # -- dispatch -----------------------------------------------------------

    def _dispatch(self, msg: dict, session_id: str | None) -> tuple[dict, str | None]:
        kind = msg.get("type")
        if kind == "open_case":
            session = self._open_case(msg)
            return self._case_summary(session), session.id

        session = self._session_for(msg, session_id)
        handlers = {
            "select_vertebra": self._select_vertebra,
            "init_screw": self._init_screw,
            "edit": self._edit,
            "delete_screw": self._delete_screw,
            "get_state": self._get_state,
            "export_plan": self._export_plan,
        }
        if kind not in handlers:
            raise UnknownMessage(f"unknown message type {kind!r}")
        return handlers[kind](session, msg), session.id

    def _session_for(self, msg: dict, session_id: str | None) -> Session:
        sid = msg.get("session", session_id)
        if sid is None:
            raise UnknownSession("no session bound; send open_case first")
        session = self.sessions.get(sid)
        if session is None:
            raise UnknownSession(f"unknown session {sid!r}")
        return session

    def _error_json(self, e: FluoroplanError) -> dict:
        out: dict[str, Any] = {"code": e.code, "message": e.message}
        if e.details:
            try:
                json.dumps(e.details, allow_nan=False)
            except (TypeError, ValueError):
                pass
            else:
                out["details"] = e.details
        return out

    # -- path confinement ---------------------------------------------------

    def _resolve_path(self, raw: str, what: str) -> Path:
        p = Path(raw)
        if not p.is_absolute() and self.case_root is not None:
            p = self.case_root / p
        resolved = p.resolve()
        if self.case_root is not None:
            try:
                resolved.relative_to(self.case_root)
            except ValueError:
                raise ForbiddenPath(
                    f"{what} path {resolved} escapes the case root "
                    f"{self.case_root}"
                ) from None
        return resolved

    # -- handlers -----------------------------------------------------------

    def _open_case(self, msg: dict) -> Session:
        path = self._resolve_path(_text(msg, "path"), "case")
        case = load_case(path)
        self._counter += 1
        session = Session(id=f"s{self._counter}", case=case)
        self.sessions[session.id] = session
        return session

    def _case_summary(self, session: Session) -> dict:
        case = session.case
        return {
            "session": session.id,
            "case_path": str(case.path),
            "labels": [p.label for p in case.pairs],
            "pairs": [
                {
                    "label": p.label,
                    "ap_box": bbox_json(p.ap_box),
                    "lp_box": bbox_json(p.lp_box),
                }
                for p in case.pairs
            ],
            "image_size_px": {
                "ap": list(case.ap_calibration.image_size),
                "lp": list(case.lp_calibration.image_size),
            },
            "calibration": {
                "ap": calibration_json(case.ap_calibration),
                "lp": calibration_json(case.lp_calibration),
            },
            "discrepancy": {
                "gain_a": case.discrepancy.gain_a,
                "offset_b_mm": case.discrepancy.offset_b,
            },
            "warnings": list(case.warnings),
            "revision": session.revision,
        }

    def _check_expected_revision(self, session: Session, msg: dict) -> None:
        expected = msg.get("expected_revision")
        if expected is None:
            return
        if isinstance(expected, bool) or not isinstance(expected, int):
            raise ValidationError(
                "expected_revision must be an integer", field="expected_revision"
            )
        if expected != session.revision:
            raise StaleRevision(
                f"expected revision {expected}, session is at {session.revision}",
                expected=expected,
                actual=session.revision,
            )

    def _select_vertebra(self, session: Session, msg: dict) -> dict:
        self._check_expected_revision(session, msg)
        view = _view(msg)
        u, v = _xy(msg, "point_px")
        label = hit_test_vertebra(
            Point2(u, v), view, list(session.case.annotations)
        )
        session.selection[view.value.lower()] = {
            "point_px": [u, v],
            "label": label,
        }
        session.revision += 1
        return {"label": label, "revision": session.revision}

    def _screw_payload(self, session: Session, record: ScrewRecord) -> dict:
        """Reply body for one screw; projections are always recomputed.

        Raises before any state is committed when the screw cannot be
        projected, so a reply is only ever produced for a renderable state.
        """
        case = session.case
        spec, catalog_warnings = compute_screw_spec(
            record.screw, case.catalog, strict=False
        )
        pair = case.find_pair(record.screw.label)
        containment = validate_containment(
            record.screw, pair, record.ivdl_mm, case.ap_calibration, case.lp_calibration
        )
        return {
            "screw_id": record.screw.id,
            "screw": screw_json(record.screw),
            "projections": {
                "ap": projection_json(project_screw(record.screw, case.ap_calibration)),
                "lp": projection_json(project_screw(record.screw, case.lp_calibration)),
            },
            "spec": spec_json(spec),
            "warnings": list(record.ivdl_warnings) + catalog_warnings + containment,
        }

    def _init_screw(self, session: Session, msg: dict) -> dict:
        self._check_expected_revision(session, msg)
        case = session.case
        label = _text(msg, "label")
        pair = case.find_pair(label)
        if pair is None:
            raise UnknownLabel(f"no paired vertebra labeled {label!r}")
        ivdl_mm, ivdl_warnings = resolve_ivdl(
            list(case.pairs), label, case.ivdl, case.ap_calibration.mm_per_px_v
        )
        screw = init_screw(
            pair,
            _text(msg, "side"),
            ivdl_mm,
            case.padding,
            case.ap_calibration,
            case.lp_calibration,
        )
        record = ScrewRecord(screw, ivdl_mm, tuple(ivdl_warnings))
        payload = self._screw_payload(session, record)
        # Re-initializing an already planned pedicle replaces its screw.
        session.screws[screw.id] = record
        session.revision += 1
        payload["revision"] = session.revision
        return payload

    def _record_for(self, session: Session, msg: dict) -> tuple[str, ScrewRecord]:
        screw_id = _text(msg, "screw_id")
        record = session.screws.get(screw_id)
        if record is None:
            raise UnknownScrew(f"no screw {screw_id!r} in session {session.id}")
        return screw_id, record

    def _edit(self, session: Session, msg: dict) -> dict:
        self._check_expected_revision(session, msg)
        screw_id, record = self._record_for(session, msg)
        op = parse_edit_op(msg.get("op"))
        case = session.case
        edited = ScrewRecord(
            apply_edit(record.screw, op, case.ap_calibration, case.lp_calibration),
            record.ivdl_mm,
            record.ivdl_warnings,
        )
        payload = self._screw_payload(session, edited)
        session.screws[screw_id] = edited
        session.revision += 1
        payload["revision"] = session.revision
        return payload

    def _delete_screw(self, session: Session, msg: dict) -> dict:
        self._check_expected_revision(session, msg)
        screw_id, _ = self._record_for(session, msg)
        del session.screws[screw_id]
        session.revision += 1
        return {"revision": session.revision}

    def _get_state(self, session: Session, msg: dict) -> dict:
        summary = self._case_summary(session)
        summary["selection"] = {
            view: session.selection.get(view) for view in ("ap", "lp")
        }
        summary["screws"] = [
            self._screw_payload(session, record)
            for record in session.screws.values()
        ]
        summary["revision"] = session.revision
        return summary

    def _export_plan(self, session: Session, msg: dict) -> dict:
        path = self._resolve_path(_text(msg, "path"), "plan")
        case = session.case
        entries = []
        for record in session.screws.values():
            payload = self._screw_payload(session, record)
            spec, _ = compute_screw_spec(record.screw, case.catalog, strict=False)
            entries.append(
                PlannedScrew.from_screw(
                    record.screw,
                    spec,
                    case.ap_calibration,
                    case.lp_calibration,
                    payload["warnings"],
                )
            )
        doc = PlanDocument(
            case_ref=str(case.path),
            ap_calibration=case.ap_calibration,
            lp_calibration=case.lp_calibration,
            discrepancy=case.discrepancy,
            screws=tuple(entries),
            revision=session.revision,
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        return {"path": str(save_plan(doc, path))}
