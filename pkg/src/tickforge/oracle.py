"""Reference interpreter used to cross-check the tick engine.

This is an intentionally naive second implementation of the tick semantics:
a pure recursive function over immutable per-node records, with no registry,
no blackboard, and no trace machinery.  Leaves are limited to fixed status
scripts.  It shares only the syntax-tree types with the engine; the traversal,
state handling, and halt logic are written separately so that a bug in one
implementation is unlikely to hide in the other.

``compare_runs`` drives an engine instance and this oracle over the same tree
for a number of epochs and reports every disagreement in root status or in
per-node visit counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .model import (
    CompositeVariant,
    DecoratorKind,
    NodeKind,
    NodeSpec,
    Status,
    TreeDefinition,
    iter_nodes,
)

__all__ = [
    "OracleNodeState",
    "oracle_tick",
    "scripts_for_tree",
    "script_for_leaf",
    "Divergence",
    "compare_runs",
]

Path = tuple  # tuple[int, ...]


class OracleNodeState(NamedTuple):
    """Immutable per-node record; a fresh one means 'never ticked'."""

    cursor: int = 0
    counter: int = 0
    script_pos: int = 0
    last_status: Status | None = None
    done: tuple[tuple[int, Status], ...] = ()


_TOKEN_STATUSES = {
    "SUCCESS": Status.SUCCESS,
    "S": Status.SUCCESS,
    "FAILURE": Status.FAILURE,
    "F": Status.FAILURE,
    "RUNNING": Status.RUNNING,
    "R": Status.RUNNING,
}


def _parse_script(text: str) -> tuple[Status, ...]:
    parts = []
    for raw in text.split(","):
        token = raw.strip().upper()
        if token not in _TOKEN_STATUSES:
            raise ValueError(f"oracle cannot parse status token {raw.strip()!r}")
        parts.append(_TOKEN_STATUSES[token])
    if not parts:
        raise ValueError("empty status script")
    return tuple(parts)


def script_for_leaf(leaf_id: str, params: Mapping[str, str]) -> tuple[Status, ...]:
    """Status script for a leaf the oracle can emulate; raises otherwise."""
    if leaf_id == "AlwaysSuccess":
        return (Status.SUCCESS,)
    if leaf_id == "AlwaysFailure":
        return (Status.FAILURE,)
    if leaf_id == "AlwaysRunning":
        return (Status.RUNNING,)
    if leaf_id == "ScriptedStatus":
        raw = params.get("statuses")
        if raw is None:
            raise ValueError("ScriptedStatus leaf without a 'statuses' parameter")
        return _parse_script(raw)
    raise ValueError(f"oracle cannot emulate leaf {leaf_id!r}; supply a script")


def scripts_for_tree(tree: TreeDefinition) -> dict[Path, tuple[Status, ...]]:
    """Derive the per-path scripts of a fully scripted tree."""
    scripts: dict[Path, tuple[Status, ...]] = {}
    for path, node in iter_nodes(tree.root_child):
        if node.kind in (NodeKind.ACTION, NodeKind.CONDITION):
            scripts[path] = script_for_leaf(node.leaf_id or "", node.params)
    return scripts


def oracle_tick(
    tree: TreeDefinition,
    state: Mapping[Path, OracleNodeState] | None,
    scripts: Mapping[Path, Sequence[Status]] | None = None,
) -> tuple[Status, dict[Path, OracleNodeState], list[Path]]:
    """Run one epoch and return (root status, next state, visit order).

    ``state`` is never mutated; pass the returned mapping into the next call.
    ``scripts`` maps leaf paths to status scripts; omitted, they are derived
    from the tree itself (built-in scripted leaves only).
    """
    if scripts is None:
        scripts = scripts_for_tree(tree)
    next_state: dict[Path, OracleNodeState] = dict(state or {})
    visits: list[Path] = []

    def get(path: Path) -> OracleNodeState:
        return next_state.get(path, OracleNodeState())

    def put(path: Path, **changes) -> None:
        next_state[path] = get(path)._replace(**changes)

    def drop_subtree(path: Path) -> None:
        for key in [k for k in next_state if k[: len(path)] == path]:
            del next_state[key]

    def tick(node: NodeSpec, path: Path) -> Status:
        visits.append(path)

        if node.kind is NodeKind.SEQUENCE or node.kind is NodeKind.SELECTOR:
            exit_early = (
                Status.FAILURE if node.kind is NodeKind.SEQUENCE else Status.SUCCESS
            )
            walk_on = (
                Status.SUCCESS if node.kind is NodeKind.SEQUENCE else Status.FAILURE
            )
            reactive = node.variant is CompositeVariant.REACTIVE
            index = 0 if reactive else get(path).cursor
            status = walk_on
            while index < len(node.children):
                status = tick(node.children[index], path + (index,))
                if status is not walk_on:
                    break
                index += 1
            if status is Status.RUNNING:
                if not reactive:
                    put(path, cursor=index)
            elif status is exit_early:
                put(path, cursor=index if node.variant is CompositeVariant.STAR else 0)
            else:
                put(path, cursor=0)
                status = walk_on
            put(path, last_status=status)
            return status

        if node.kind is NodeKind.PARALLEL:
            m = int(node.params["success_threshold"])
            n = len(node.children)
            done = dict(get(path).done)
            for index, child in enumerate(node.children):
                if index in done:
                    continue
                child_status = tick(child, path + (index,))
                if child_status is not Status.RUNNING:
                    done[index] = child_status
            wins = sum(1 for s in done.values() if s is Status.SUCCESS)
            losses = sum(1 for s in done.values() if s is Status.FAILURE)
            if wins >= m:
                status = Status.SUCCESS
            elif losses > n - m:
                status = Status.FAILURE
            else:
                put(path, done=tuple(sorted(done.items())), last_status=Status.RUNNING)
                return Status.RUNNING
            for index in range(n):
                child_state = next_state.get(path + (index,))
                if child_state is not None and child_state.last_status is Status.RUNNING:
                    drop_subtree(path + (index,))
            put(path, done=(), last_status=status)
            return status

        if node.kind is NodeKind.DECORATOR:
            child = node.children[0]
            child_path = path + (0,)
            if node.variant is DecoratorKind.INVERTER:
                inner = tick(child, child_path)
                flipped = {
                    Status.SUCCESS: Status.FAILURE,
                    Status.FAILURE: Status.SUCCESS,
                    Status.RUNNING: Status.RUNNING,
                }[inner]
                put(path, last_status=flipped)
                return flipped
            if node.variant is DecoratorKind.FORCE_SUCCESS:
                inner = tick(child, child_path)
                forced = Status.RUNNING if inner is Status.RUNNING else Status.SUCCESS
                put(path, last_status=forced)
                return forced
            if node.variant is DecoratorKind.REPEAT:
                bound = int(node.params["num_cycles"])
                inner = tick(child, child_path)
                if inner is Status.RUNNING:
                    put(path, last_status=Status.RUNNING)
                    return Status.RUNNING
                if inner is Status.FAILURE:
                    put(path, counter=0, last_status=Status.FAILURE)
                    return Status.FAILURE
                count = get(path).counter + 1
                if count >= bound:
                    put(path, counter=0, last_status=Status.SUCCESS)
                    return Status.SUCCESS
                put(path, counter=count, last_status=Status.RUNNING)
                return Status.RUNNING
            if node.variant is DecoratorKind.RETRY:
                bound = int(node.params["num_attempts"])
                while True:
                    inner = tick(child, child_path)
                    if inner is Status.SUCCESS:
                        put(path, counter=0, last_status=Status.SUCCESS)
                        return Status.SUCCESS
                    if inner is Status.RUNNING:
                        put(path, last_status=Status.RUNNING)
                        return Status.RUNNING
                    count = get(path).counter + 1
                    if count >= bound:
                        put(path, counter=0, last_status=Status.FAILURE)
                        return Status.FAILURE
                    put(path, counter=count)
            raise ValueError(f"unknown decorator variant {node.variant!r}")

        if node.kind in (NodeKind.ACTION, NodeKind.CONDITION):
            script = scripts.get(path)
            if script is None:
                raise ValueError(f"no script for leaf at {path}")
            pos = get(path).script_pos
            status = script[pos % len(script)]
            put(path, script_pos=pos + 1, last_status=status)
            return status

        raise ValueError(f"oracle cannot tick node kind {node.kind!r}")

    root_status = tick(tree.root_child, (0,))

    visited = set(visits)
    stale = {
        p
        for p, ns in next_state.items()
        if ns.last_status is Status.RUNNING and p not in visited
    }
    minimal = [p for p in stale if not any(p[:k] in stale for k in range(1, len(p)))]
    for p in sorted(minimal):
        drop_subtree(p)

    return root_status, next_state, visits


@dataclass(frozen=True)
class Divergence:
    """One disagreement between engine and oracle."""

    epoch: int
    kind: str  # "root_status" or "visits"
    detail: str

    def __str__(self) -> str:
        return f"epoch {self.epoch}: {self.kind}: {self.detail}"


def compare_runs(instance, epochs: int, scripts=None) -> list[Divergence]:
    """Tick an engine instance and the oracle side by side for ``epochs``.

    Both sides see the same tree (``instance.tree``) and are ticked for the
    full epoch count; a completed root simply restarts, so re-activation
    behavior (star cursors, latched parallels) is compared too.  Returns all
    divergences found, empty when the implementations agree.
    """
    tree = instance.tree
    if scripts is None:
        scripts = scripts_for_tree(tree)
    divergences: list[Divergence] = []
    oracle_state: dict[Path, OracleNodeState] = {}

    for epoch in range(epochs):
        marker_base = len(instance.trace.markers)
        engine_status = instance.tick_root()
        engine_visits = [
            path
            for kind, _, path in instance.trace.markers[marker_base:]
            if kind == "enter"
        ]
        oracle_status, oracle_state, oracle_visits = oracle_tick(
            tree, oracle_state, scripts
        )

        if engine_status is not oracle_status:
            divergences.append(
                Divergence(
                    epoch,
                    "root_status",
                    f"engine={engine_status.value} oracle={oracle_status.value}",
                )
            )
        if sorted(engine_visits) != sorted(oracle_visits):
            counts_e: dict[Path, int] = {}
            for p in engine_visits:
                counts_e[p] = counts_e.get(p, 0) + 1
            counts_o: dict[Path, int] = {}
            for p in oracle_visits:
                counts_o[p] = counts_o.get(p, 0) + 1
            diffs = []
            for p in sorted(set(counts_e) | set(counts_o)):
                a, b = counts_e.get(p, 0), counts_o.get(p, 0)
                if a != b:
                    where = "/".join(str(i) for i in p)
                    diffs.append(f"{where}: engine={a} oracle={b}")
            divergences.append(Divergence(epoch, "visits", "; ".join(diffs)))

    return divergences
