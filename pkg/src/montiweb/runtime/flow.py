"""Activity interpreter: sessions, guard evaluation and scripted runs."""

from __future__ import annotations

import datetime as dt
import enum
import json
import operator
from dataclasses import dataclass, field

from ..activity import (ActionRef, And, Compare, EnumLiteral, Final, IntLiteral, Or,
                        ParamAttribute, StringLiteral, TransitionStmt, print_guard)
from ..classviews import ViewModifier
from ..diagnostics import MWError
from ..linker import ClassRef, EnumRef, FieldElement, LinkedModel, ResolvedActivity, Role
from .store import ChildSpec, ObjectStore, StoreError
from .validation import Rule, ValidationViolation, validate_field
from .values import EnumVal, ObjectId, Value, encode_value

STEP_LIMIT = 10_000

_OPS = {">=": operator.ge, "<=": operator.le, ">": operator.gt, "<": operator.lt,
        "==": operator.eq, "!=": operator.ne}


class FlowStatus(str, enum.Enum):
    RUNNING = "Running"
    COMPLETED = "Completed"
    FAILED = "Failed"


@dataclass
class TraceEvent:
    kind: str
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.data}


class FlowError(MWError):
    def __init__(self, code: str, message: str, trace: list[TraceEvent] | None = None):
        super().__init__(code, message)
        self.trace = trace or []


@dataclass
class StepInput:
    """Raw input for one action: field texts, composition children and association links."""

    fields: dict[str, str] = field(default_factory=dict)
    children: dict[str, list[dict]] = field(default_factory=dict)
    links: dict[str, list[str]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> StepInput:
        return cls(dict(data.get("fields") or {}), dict(data.get("children") or {}),
                   dict(data.get("links") or {}))


@dataclass
class FlowSession:
    model: LinkedModel
    activity: ResolvedActivity
    store: ObjectStore
    seed: int = 0
    current: str | None = None
    bindings: dict[str, ObjectId] = field(default_factory=dict)
    trace: list[TraceEvent] = field(default_factory=list)
    status: FlowStatus = FlowStatus.RUNNING
    error: FlowError | None = None

    @property
    def captcha_challenge(self) -> str:
        return str(self.seed)

    def emit(self, kind: str, **data):
        self.trace.append(TraceEvent(kind, data))

    def fail(self, code: str, message: str):
        self.status = FlowStatus.FAILED
        self.emit("FlowFailed", code=code, message=message, action=self.current)
        self.error = FlowError(code, message, self.trace)
        raise self.error


# -- guards ------------------------------------------------------------------

def _operand_value(op, bindings: dict[str, ObjectId], store: ObjectStore):
    if isinstance(op, IntLiteral):
        return op.value
    if isinstance(op, StringLiteral):
        return op.value
    if isinstance(op, EnumLiteral):
        return EnumVal(op.enum_name, op.literal)
    oid = bindings.get(op.param)
    if oid is None:
        raise MWError("MW504", f"guard parameter {op.param!r} is not bound")
    if oid not in store:
        raise MWError("MW504", f"object bound to {op.param!r} no longer exists")
    value = store.get(oid).fields.get(op.attribute)
    if value is None:
        raise MWError("MW504", f"{op.param}.{op.attribute} has no value")
    return value


def _compare(op: str, left, right) -> bool:
    if isinstance(left, dt.date) and isinstance(right, str):
        right = dt.date.fromisoformat(right)
    if isinstance(right, dt.date) and isinstance(left, str):
        left = dt.date.fromisoformat(left)
    if op not in ("==", "!=") and not (
            type(left) is type(right) and isinstance(left, (int, dt.date))):
        raise MWError("MW504", f"cannot order {left!r} and {right!r}")
    return _OPS[op](left, right)


def eval_guard(guard, bindings: dict[str, ObjectId], store: ObjectStore) -> bool:
    """Evaluate a resolved guard; ``And``/``Or`` short-circuit left to right.

    Raises ``MWError`` with MW504 for unbound parameters or absent values.
    """
    if isinstance(guard, And):
        return eval_guard(guard.left, bindings, store) and eval_guard(guard.right, bindings, store)
    if isinstance(guard, Or):
        return eval_guard(guard.left, bindings, store) or eval_guard(guard.right, bindings, store)
    assert isinstance(guard, Compare)
    left = _operand_value(guard.lhs, bindings, store)
    right = _operand_value(guard.rhs, bindings, store)
    return _compare(guard.op, left, right)


# -- sessions ----------------------------------------------------------------

def start_session(model: LinkedModel, name: str, seed: int = 0,
                  store: ObjectStore | None = None) -> FlowSession:
    if not model.ok:
        raise ValueError("cannot run a model that has errors")
    act = model.activities.get(name)
    if act is None:
        raise FlowError("MW502", f"unknown activity {name!r}")
    session = FlowSession(model, act, store or ObjectStore(model.table), seed)
    _fire(session, act.initial)
    return session


def _enter(session: FlowSession, target):
    if isinstance(target, Final):
        session.current = None
        session.status = FlowStatus.COMPLETED
        session.emit("FlowCompleted")
        return
    session.current = target.action
    session.emit("EnterAction", action=target.action)


def _fire(session: FlowSession, stmt: TransitionStmt | None, source: str | None = None):
    """Take the first alternative of ``stmt`` whose guard holds."""
    if stmt is None:
        session.fail("MW505", f"action {source!r} has no outgoing transition")
    src_ref = next((s for s in stmt.sources if isinstance(s, ActionRef) and s.action == source),
                   None)
    for alt in stmt.alternatives:
        if alt.guard is not None:
            text = print_guard(alt.guard)
            try:
                result = eval_guard(alt.guard, session.bindings, session.store)
            except MWError as exc:
                session.fail(exc.code, f"guard [{text}]: {exc.message}")
            session.emit("GuardEvaluated", guard=text, result=result)
            if not result:
                continue
        if source is not None:
            session.emit("TransitionTaken", source=source, target=str(alt.target))
        target = alt.target
        if isinstance(target, ActionRef) and target.param is not None:
            if src_ref is None or src_ref.param not in session.bindings:
                session.fail("MW504", f"no object flows into {target}")
            session.bindings[target.param] = session.bindings[src_ref.param]
        _enter(session, target)
        return
    session.fail("MW505", f"no alternative matches after {source or 'initial'}")


def _field_default(value: Value) -> str:
    if value is None:
        return ""
    return str(encode_value(value)) if not isinstance(value, str) else value


def _validate_children(session, role: Role, maps: list[dict], prefix: str,
                       violations: list[ValidationViolation]) -> list[ChildSpec]:
    sym = session.store.class_symbol(role.target)
    specs = []
    for i, raw_map in enumerate(maps):
        here = f"{prefix}[{i}]"
        values = {}
        children = {}
        for key, raw in raw_map.items():
            if key == "children" and isinstance(raw, dict):
                for child_role, child_maps in raw.items():
                    r = sym.roles.get(child_role)
                    if r is None or not r.is_composition:
                        raise StoreError("MW502", f"{role.target} has no composition "
                                         f"role {child_role!r}")
                    children[child_role] = _validate_children(
                        session, r, child_maps, f"{here}.{child_role}", violations)
                continue
            t = sym.attributes.get(key)
            if t is None or isinstance(t, ClassRef):
                raise StoreError("MW502", f"{role.target} has no attribute {key!r}")
            value, errs = validate_field(t, (), str(raw), f"{here}.{key}")
            values[key] = value
            violations.extend(errs)
        specs.append(ChildSpec(values, children))
    return specs


def _editor_step(session: FlowSession, action, inp: StepInput):
    view = action.view
    call = action.call
    store = session.store
    cls = store.class_symbol(view.owner)
    editing = None
    if call.argument is not None:
        editing = session.bindings.get(call.argument)
        if editing is None or editing not in store:
            session.fail("MW504", f"{call.argument!r} is not bound to a live object")

    inputs: dict[str, FieldElement] = {}
    for el in view.fields():
        if el.modifier is ViewModifier.EDITOR:
            inputs.setdefault(el.name, el)
    for name in (*inp.fields, *inp.children, *inp.links):
        if name == "captcha" and view.has_captcha:
            continue
        if name not in inputs:
            session.fail("MW502", f"view {view.qualified_name} has no input {name!r}")

    violations: list[ValidationViolation] = []
    values: dict[str, Value] = {}
    children: dict[str, list[ChildSpec]] = {}
    links: dict[str, list[ObjectId]] = {}
    try:
        for name, el in inputs.items():
            b = el.binding
            if isinstance(b, Role):
                if b.is_composition:
                    if name in inp.children or editing is None:
                        children[name] = _validate_children(
                            session, b, inp.children.get(name, []), name, violations)
                elif name in inp.links or editing is None:
                    links[name] = [store.find(b.target, label) for label in inp.links.get(name, [])]
                continue
            if name in inp.fields:
                raw = str(inp.fields[name])
            elif editing is not None:
                raw = _field_default(store.get(editing).fields.get(name))
            else:
                raw = ""
            value, errs = validate_field(b, el.annotations, raw, name)
            violations.extend(errs)
            values[name] = value
    except StoreError as exc:
        session.fail(exc.code, exc.message)

    for name, cs in children.items():
        card = cls.roles[name].cardinality
        if not card.allows(len(cs)):
            violations.append(ValidationViolation(
                name, Rule.CARDINALITY, f"{name} needs [{card}] entries, got {len(cs)}",
                str(len(cs)), (("min", card.min), ("max", card.max))))
    for name, targets in links.items():
        card = cls.roles[name].cardinality
        if not card.allows(len(set(targets))):
            violations.append(ValidationViolation(
                name, Rule.CARDINALITY, f"{name} needs [{card}] links, got {len(set(targets))}",
                str(len(set(targets))), (("min", card.min), ("max", card.max))))
    if view.has_captcha:
        given = str(inp.fields.get("captcha", ""))
        if given != session.captcha_challenge:
            violations.append(ValidationViolation("captcha", Rule.CAPTCHA,
                                                  "captcha answer is wrong", given))
    if violations:
        session.emit("ValidationRejected", action=action.name, view=view.qualified_name,
                     violations=[v.to_dict() for v in violations])
        return False

    try:
        if editing is None:
            before = set(store.objects)
            oid = store.create_object(view.owner, values, children)
            for name, targets in links.items():
                store.set_links(oid, name, targets)
            for new in sorted(set(store.objects) - before):
                session.emit("ObjectCreated", action=action.name, object=store.snapshot(new))
        else:
            oid = editing
            store.update_object(oid, values)
            for name, specs in children.items():
                store.replace_children(oid, name, specs)
            for name, targets in links.items():
                store.set_links(oid, name, targets)
            session.emit("ObjectUpdated", action=action.name, object=store.snapshot(oid))
    except StoreError as exc:
        session.fail(exc.code, exc.message)
    if call.assign_to is not None:
        session.bindings[call.assign_to] = oid
    return True


def step_session(session: FlowSession, inp: StepInput | None = None) -> FlowSession:
    """Perform the current action and follow its outgoing transition.

    An editor action whose input is rejected leaves the session where it is.
    """
    if session.status is not FlowStatus.RUNNING or session.current is None:
        raise FlowError("MW506", "session is not waiting at an action", session.trace)
    inp = inp or StepInput()
    act = session.activity
    action = act.actions[session.current]
    if action.is_code:
        session.fail("MW503", f"action {action.name!r} contains code and cannot be executed")
    view = action.view
    if view.modifier is ViewModifier.EDITOR:
        if not _editor_step(session, action, inp):
            return session
    else:
        arg = action.call.argument
        snapshot = None
        if arg is not None:
            oid = session.bindings.get(arg)
            if oid is None or oid not in session.store:
                session.fail("MW504", f"{arg!r} is not bound to a live object")
            snapshot = session.store.snapshot(oid)
        session.emit("ViewShown", action=action.name, view=view.qualified_name, object=snapshot)
    _fire(session, act.outgoing.get(action.name), action.name)
    return session


def waits_for_input(session: FlowSession) -> bool:
    """True when the current action shows an editor view."""
    if session.status is not FlowStatus.RUNNING or session.current is None:
        return False
    action = session.activity.actions[session.current]
    return action.view is not None and action.view.modifier is ViewModifier.EDITOR


# -- scripted runs -----------------------------------------------------------

def load_script(text: str) -> list[dict]:
    data = json.loads(text)
    if not isinstance(data, list) or not all(
            isinstance(e, dict) and isinstance(e.get("action"), str) for e in data):
        raise ValueError("a script is a JSON list of objects with an 'action' name")
    return data


def run_script(model: LinkedModel, name: str, script: list[dict], seed: int = 0,
               step_limit: int = STEP_LIMIT) -> FlowSession:
    """Drive an activity with recorded inputs.

    Display actions advance on their own unless the next entry names them.
    Raises ``FlowError`` (with the trace so far) on any runtime failure.
    """
    session = start_session(model, name, seed)
    entries = list(script)
    steps = 0
    while session.status is FlowStatus.RUNNING:
        steps += 1
        if steps > step_limit:
            session.fail("MW508", f"flow did not finish within {step_limit} steps")
        nxt = entries[0] if entries else None
        if waits_for_input(session):
            if nxt is None:
                session.fail("MW507", f"script ended while waiting at {session.current!r}")
            if nxt["action"] != session.current:
                session.fail("MW506", f"script names {nxt['action']!r} but the flow is at "
                             f"{session.current!r}")
            entries.pop(0)
            step_session(session, StepInput.from_dict(nxt))
        else:
            if nxt is not None and nxt["action"] == session.current:
                entries.pop(0)
            step_session(session)
    if entries:
        raise FlowError("MW506", f"script entry for {entries[0]['action']!r} was never reached",
                        session.trace)
    return session


def serialize_trace(trace: list[TraceEvent]) -> str:
    return json.dumps([e.to_dict() for e in trace], indent=2, sort_keys=True,
                      ensure_ascii=False) + "\n"
