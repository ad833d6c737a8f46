"""Built-in leaf behaviors and parameter plumbing.

Every engine instance starts with these behaviors pre-registered under their
own names, so documents can use them without a bindings file.  The set covers
deterministic status stubs for testing (AlwaysSuccess, AlwaysFailure,
AlwaysRunning, ScriptedStatus) and small blackboard manipulators
(SetBlackboard, CompareBlackboard, PopFromList).

Parameter values are strings.  A value wrapped in braces, ``{key}``, is an
indirection through the blackboard; anything else is a literal.  Literals are
coerced int, then float, then bool, then kept as text.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .engine import LeafBehavior, NodeState
from .model import (
    Blackboard,
    BlackboardValue,
    Status,
    is_blackboard_ref,
    parse_literal,
    ref_key,
)

__all__ = [
    "resolve_param",
    "parse_status_list",
    "AlwaysStatus",
    "ScriptedStatus",
    "SetBlackboard",
    "CompareBlackboard",
    "PopFromList",
    "builtin_registry",
    "make_builtin",
    "BUILTIN_ACTION_ELEMENTS",
    "BUILTIN_CONDITION_ELEMENTS",
]

# Element names the XML front end accepts as leaf shorthand, e.g.
# <AlwaysSuccess/> for <Action ID="AlwaysSuccess"/>.
BUILTIN_ACTION_ELEMENTS = frozenset(
    ["AlwaysSuccess", "AlwaysFailure", "AlwaysRunning", "ScriptedStatus",
     "SetBlackboard", "PopFromList"]
)
BUILTIN_CONDITION_ELEMENTS = frozenset(["CompareBlackboard"])


def resolve_param(
    params: Mapping[str, str],
    name: str,
    blackboard: Blackboard,
    default: str | None = None,
) -> BlackboardValue:
    """Resolve one parameter: ``{key}`` reads the blackboard, else literal.

    Missing parameters fall back to ``default``; with no default they raise
    ValueError.  Blackboard reads raise on absent keys.
    """
    raw = params.get(name, default)
    if raw is None:
        raise ValueError(f"missing required parameter {name!r}")
    if is_blackboard_ref(raw):
        return blackboard.read(ref_key(raw))
    return parse_literal(raw)


_STATUS_ALIASES = {
    "SUCCESS": Status.SUCCESS,
    "S": Status.SUCCESS,
    "FAILURE": Status.FAILURE,
    "F": Status.FAILURE,
    "RUNNING": Status.RUNNING,
    "R": Status.RUNNING,
}


def parse_status_list(text: str) -> list[Status]:
    """Parse ``"RUNNING,SUCCESS"`` (or ``"R,S"``) into a status list."""
    statuses = []
    for piece in text.split(","):
        token = piece.strip().upper()
        if token not in _STATUS_ALIASES:
            raise ValueError(f"unknown status {piece.strip()!r} in script {text!r}")
        statuses.append(_STATUS_ALIASES[token])
    if not statuses:
        raise ValueError("status script must not be empty")
    return statuses


class AlwaysStatus(LeafBehavior):
    """Returns the same status on every tick."""

    def __init__(self, status: Status):
        self.status = status

    def tick(self, params, blackboard, state) -> Status:
        return self.status


class ScriptedStatus(LeafBehavior):
    """Replays a fixed status script, one entry per tick, cycling at the end.

    The script comes from the ``statuses`` parameter (node parameters win over
    constructor defaults).  The replay position lives in the node's leaf
    state, so it survives completions of this leaf but resets when the node is
    halted.
    """

    def __init__(self, statuses: str | None = None):
        self.default_statuses = statuses

    def _script(self, params: Mapping[str, str]) -> list[Status]:
        raw = params.get("statuses", self.default_statuses)
        if raw is None:
            raise ValueError("ScriptedStatus needs a 'statuses' parameter")
        return parse_status_list(raw)

    def tick(self, params, blackboard, state: NodeState) -> Status:
        script = self._script(params)
        index = state.leaf_state.get("index", 0)
        state.leaf_state["index"] = index + 1
        return script[index % len(script)]


class SetBlackboard(LeafBehavior):
    """Writes ``value`` under ``key``; always succeeds.

    ``value`` may be a ``{ref}`` to copy another entry.
    """

    def tick(self, params, blackboard, state) -> Status:
        key = params.get("key")
        if not key:
            raise ValueError("SetBlackboard needs a 'key' parameter")
        value = resolve_param(params, "value", blackboard)
        blackboard.write(key, value)
        return Status.SUCCESS


class CompareBlackboard(LeafBehavior):
    """Compares the entry under ``key`` against ``value`` with operator ``op``.

    ``op`` is one of eq, ne, lt, le, gt, ge (default eq).  The literal is
    coerced to the type of the current entry; ordering comparisons on lists
    are rejected.  Success when the comparison holds, Failure otherwise.
    """

    _OPS = {
        "eq": lambda a, b: a == b,
        "ne": lambda a, b: a != b,
        "lt": lambda a, b: a < b,
        "le": lambda a, b: a <= b,
        "gt": lambda a, b: a > b,
        "ge": lambda a, b: a >= b,
    }

    def tick(self, params, blackboard, state) -> Status:
        key = params.get("key")
        if not key:
            raise ValueError("CompareBlackboard needs a 'key' parameter")
        op_name = params.get("op", "eq")
        op = self._OPS.get(op_name)
        if op is None:
            raise ValueError(f"unknown comparison op {op_name!r}")
        current = blackboard.read(key)
        expected = self._expected(params, blackboard, current)
        if isinstance(current, list) and op_name not in ("eq", "ne"):
            raise TypeError("lists support only eq/ne comparisons")
        return Status.SUCCESS if op(current, expected) else Status.FAILURE

    def _expected(self, params, blackboard: Blackboard, current) -> BlackboardValue:
        raw = params.get("value")
        if raw is None:
            raise ValueError("CompareBlackboard needs a 'value' parameter")
        if is_blackboard_ref(raw):
            return blackboard.read(ref_key(raw))
        if isinstance(current, bool):
            return raw.strip().lower() == "true"
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float):
            return float(raw)
        if isinstance(current, list):
            return [piece.strip() for piece in raw.split(",")] if raw else []
        return raw


class PopFromList(LeafBehavior):
    """Takes the front element of the list under ``list_key``.

    The element is written under ``out_key`` and the shortened list written
    back.  Fails (without writing) when the list is empty.
    """

    def tick(self, params, blackboard, state) -> Status:
        list_key = params.get("list_key")
        out_key = params.get("out_key")
        if not list_key or not out_key:
            raise ValueError("PopFromList needs 'list_key' and 'out_key' parameters")
        current = blackboard.read(list_key)
        if not isinstance(current, list):
            raise TypeError(f"blackboard entry {list_key!r} is not a list")
        if not current:
            return Status.FAILURE
        blackboard.write(out_key, current[0])
        blackboard.write(list_key, current[1:])
        return Status.SUCCESS


_BUILTIN_CLASSES = {
    "AlwaysSuccess": lambda params: AlwaysStatus(Status.SUCCESS),
    "AlwaysFailure": lambda params: AlwaysStatus(Status.FAILURE),
    "AlwaysRunning": lambda params: AlwaysStatus(Status.RUNNING),
    "ScriptedStatus": lambda params: ScriptedStatus(params.get("statuses")),
    "SetBlackboard": lambda params: SetBlackboard(),
    "CompareBlackboard": lambda params: CompareBlackboard(),
    "PopFromList": lambda params: PopFromList(),
}


def make_builtin(name: str, params: Mapping[str, str] | None = None) -> LeafBehavior:
    """Instantiate a built-in behavior by name, e.g. from a bindings file."""
    factory = _BUILTIN_CLASSES.get(name)
    if factory is None:
        known = ", ".join(sorted(_BUILTIN_CLASSES))
        raise ValueError(f"unknown behavior {name!r} (known: {known})")
    return factory(dict(params or {}))


def builtin_registry() -> dict[str, LeafBehavior]:
    """Fresh leaf registry with every built-in bound under its own name."""
    return {name: make_builtin(name) for name in _BUILTIN_CLASSES}
