"""Bindings files: TOML descriptions of leaf behaviors and blackboard seeds.

A bindings file complements a model document for execution: the model gives
the tree shape, the bindings say what each leaf id does and what the
blackboard holds at start.

::

    [blackboard]
    waypoints = ["wp1", "wp2", "wp3"]

    [leaves.UpdateWaypoints]
    behavior = "ScriptedStatus"
    statuses = "RUNNING,SUCCESS"

Each ``[leaves.<id>]`` table names a built-in behavior and passes the
remaining keys as its parameters.  Blackboard values keep their TOML types
(strings, integers, floats, booleans, arrays of strings).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .engine import LeafBehavior
from .leaves import make_builtin
from .model import BlackboardValue

__all__ = ["BindingError", "BindingSet", "load_bindings"]


class BindingError(ValueError):
    """A bindings file could not be used: bad table, unknown behavior."""


@dataclass(frozen=True)
class BindingSet:
    """Parsed bindings: ready-made behaviors plus their raw descriptions.

    ``specs`` keeps the (behavior name, params) pairs the behaviors were
    built from, so a differential check can derive oracle scripts from the
    same source the engine executes.
    """

    behaviors: Mapping[str, LeafBehavior]
    specs: Mapping[str, tuple[str, Mapping[str, str]]]
    blackboard: Mapping[str, BlackboardValue]


def _param_str(leaf_id: str, key: str, value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return str(value)
    raise BindingError(
        f"leaf {leaf_id!r}: parameter {key!r} must be a scalar, got {type(value).__name__}"
    )


def _blackboard_value(key: str, value) -> BlackboardValue:
    if isinstance(value, (str, int, float, bool)):
        return value
    if isinstance(value, list):
        if all(isinstance(item, str) for item in value):
            return list(value)
        raise BindingError(f"blackboard entry {key!r}: arrays may hold only strings")
    raise BindingError(
        f"blackboard entry {key!r} has unsupported type {type(value).__name__}"
    )


def load_bindings(path: str) -> BindingSet:
    """Read a bindings file; raises :class:`BindingError` on any defect."""
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except OSError as exc:
        raise BindingError(f"cannot read bindings {path!r}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise BindingError(f"{path}: {exc}") from None

    leaves_table = data.get("leaves", {})
    if not isinstance(leaves_table, dict):
        raise BindingError(f"{path}: [leaves] must be a table of tables")
    behaviors: dict[str, LeafBehavior] = {}
    specs: dict[str, tuple[str, Mapping[str, str]]] = {}
    for leaf_id, table in leaves_table.items():
        if not isinstance(table, dict):
            raise BindingError(f"{path}: [leaves.{leaf_id}] must be a table")
        fields = dict(table)
        behavior_name = fields.pop("behavior", None)
        if not isinstance(behavior_name, str):
            raise BindingError(f"{path}: [leaves.{leaf_id}] needs behavior = \"<name>\"")
        params = {key: _param_str(leaf_id, key, value) for key, value in fields.items()}
        try:
            behaviors[leaf_id] = make_builtin(behavior_name, params)
        except ValueError as exc:
            raise BindingError(f"{path}: [leaves.{leaf_id}]: {exc}") from None
        specs[leaf_id] = (behavior_name, params)

    blackboard_table = data.get("blackboard", {})
    if not isinstance(blackboard_table, dict):
        raise BindingError(f"{path}: [blackboard] must be a table")
    blackboard = {
        key: _blackboard_value(key, value) for key, value in blackboard_table.items()
    }

    unknown = set(data) - {"leaves", "blackboard"}
    if unknown:
        raise BindingError(f"{path}: unknown top-level keys: {', '.join(sorted(unknown))}")

    return BindingSet(behaviors=behaviors, specs=specs, blackboard=blackboard)
