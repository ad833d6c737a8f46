"""Tick-driven interpreter over an expanded behavior tree.

An :class:`EngineInstance` owns one expanded tree, its blackboard, and the
per-node runtime state (cursors for memory composites, counters for repeat and
retry, scratch storage for leaf behaviors).  Calling :meth:`tick_root` runs one
epoch: the tick signal enters at the root, traverses the tree according to each
composite's policy, and every visited node reports Success, Failure, or
Running back to its parent.  There are no jumps; control flow is entirely the
traversal.

Composite semantics implemented here:

* sequence / selector come in three variants.  ``memory`` resumes at the child
  that was running and forgets its cursor on any completion; ``star`` pins the
  cursor on the early-exit status (failed sequence child, succeeded selector
  child) so that child is re-tried on the next activation; ``reactive``
  restarts from the first child on every tick.
* parallel ticks all not-yet-completed children each epoch, latches their
  completions, and applies a success-threshold policy M over N children:
  Success once M children have succeeded this activation, Failure once more
  than N - M have failed (success impossible), Running otherwise.
* decorators: inverter swaps Success and Failure; force-success coerces both
  completions to Success; repeat counts child successes up to a bound; retry
  re-ticks a failing child immediately, within the same epoch, up to a bound.

Running always propagates upward without visiting later siblings.  When a
re-traversal bypasses a subtree that was running in the previous epoch, that
subtree is halted: its state is reset and running leaves get their ``on_halt``
hook invoked.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .model import (
    Blackboard,
    CompositeVariant,
    DecoratorKind,
    NodeKind,
    NodeSpec,
    Status,
    TreeDefinition,
    TreeModel,
    InvalidModelError,
    expand_subtrees,
    iter_nodes,
    node_display_label,
    validate,
)

__all__ = [
    "NodeState",
    "TraceEvent",
    "TickTrace",
    "LeafBehavior",
    "FunctionLeaf",
    "EngineInstance",
    "run",
    "LeafUnregisteredError",
    "PolicyRangeError",
    "BoundRangeError",
]

Path = tuple  # tuple[int, ...]; child indices from the root, root child = (0,)


class LeafUnregisteredError(LookupError):
    """An action or condition has no registered behavior."""

    code = "LEAF_UNREGISTERED"

    def __init__(self, leaf_id: str, path: Path):
        super().__init__(leaf_id)
        self.leaf_id = leaf_id
        self.path = path

    def __str__(self) -> str:
        where = "/".join(str(i) for i in self.path)
        return f"no behavior registered for leaf {self.leaf_id!r} (node {where})"


class PolicyRangeError(ValueError):
    code = "POLICY_RANGE"


class BoundRangeError(ValueError):
    code = "BOUND_RANGE"


@dataclass
class NodeState:
    """Mutable per-node runtime state, keyed by node path.

    ``cursor`` is the resume index of memory/star composites, ``counter``
    the completed-attempt count of repeat/retry.  Both are zeroed when the
    owning node completes (star keeps its cursor on the early-exit status).
    ``completed`` latches finished children of a parallel node for the current
    activation.  ``leaf_state`` is scratch storage owned by the leaf behavior;
    the engine only ever clears it on halt.
    """

    cursor: int = 0
    counter: int = 0
    last_status: Status | None = None
    completed: dict[int, Status] = field(default_factory=dict)
    leaf_state: dict = field(default_factory=dict)

    def reset(self) -> None:
        self.cursor = 0
        self.counter = 0
        self.last_status = None
        self.completed.clear()
        self.leaf_state.clear()


@dataclass(frozen=True)
class TraceEvent:
    epoch: int
    path: Path
    name: str
    status: Status


class TickTrace:
    """Ordered log of per-node status events emitted by a run.

    ``events`` records one entry per node tick, in completion order.  The
    engine additionally records enter/status markers (``markers``) so tests
    can check that events nest properly inside their parent's visit.
    """

    def __init__(self) -> None:
        self.events: list[TraceEvent] = []
        self.markers: list[tuple[str, int, Path]] = []

    def _enter(self, epoch: int, path: Path) -> None:
        self.markers.append(("enter", epoch, path))

    def _emit(self, epoch: int, path: Path, name: str, status: Status) -> None:
        self.events.append(TraceEvent(epoch, path, name, status))
        self.markers.append(("status", epoch, path))

    def events_for_epoch(self, epoch: int) -> list[TraceEvent]:
        return [e for e in self.events if e.epoch == epoch]

    def tick_counts(self) -> dict[str, int]:
        """Number of ticks per display name, summed over all epochs."""
        counts: dict[str, int] = {}
        for event in self.events:
            counts[event.name] = counts.get(event.name, 0) + 1
        return counts

    def to_lines(self) -> list[str]:
        """Line format: ``epoch=<n> path=<i/j/k> name=<label> status=<STATUS>``.

        Whitespace inside labels is replaced by underscores so each line stays
        a whitespace-separated record; ``to_records`` keeps exact names.
        """
        lines = []
        for e in self.events:
            path = "/".join(str(i) for i in e.path)
            name = "_".join(e.name.split()) if e.name else "_"
            lines.append(f"epoch={e.epoch} path={path} name={name} status={e.status.value}")
        return lines

    def to_records(self) -> list[dict]:
        return [
            {
                "epoch": e.epoch,
                "path": list(e.path),
                "name": e.name,
                "status": e.status.value,
            }
            for e in self.events
        ]

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.to_records())


class LeafBehavior:
    """Base class for leaf behaviors bound to action/condition nodes.

    ``tick`` receives the node's raw parameters, the shared blackboard, and
    the node's own :class:`NodeState`; it must return a :class:`Status` and
    must not tick other nodes.  ``on_halt`` is invoked when the node is
    abandoned while running; the engine resets the node state right after.
    """

    def tick(self, params: Mapping[str, str], blackboard: Blackboard, state: NodeState) -> Status:
        raise NotImplementedError

    def on_halt(self, state: NodeState) -> None:
        pass


class FunctionLeaf(LeafBehavior):
    """Adapter turning a plain callable into a leaf behavior."""

    def __init__(self, fn: Callable[[Mapping[str, str], Blackboard, NodeState], Status]):
        self.fn = fn

    def tick(self, params, blackboard, state) -> Status:
        return self.fn(params, blackboard, state)


def _as_behavior(behavior) -> LeafBehavior:
    if isinstance(behavior, LeafBehavior):
        return behavior
    if callable(behavior):
        return FunctionLeaf(behavior)
    raise TypeError("behavior must be a LeafBehavior or a callable")


class EngineInstance:
    """Executable pairing of one expanded tree with blackboard and leaf registry.

    Single-threaded: exactly one thread may tick an instance at a time.
    Distinct instances share nothing.
    """

    def __init__(
        self,
        tree: TreeDefinition,
        blackboard: Blackboard | None = None,
        leaf_registry: Mapping[str, LeafBehavior] | None = None,
    ):
        from .leaves import builtin_registry

        self.tree = tree
        self.blackboard = blackboard if blackboard is not None else Blackboard()
        self.leaf_registry: dict[str, LeafBehavior] = dict(builtin_registry())
        for leaf_id, behavior in (leaf_registry or {}).items():
            self.register_leaf(leaf_id, behavior)
        self.states: dict[Path, NodeState] = {}
        self.epoch = 0
        self.trace = TickTrace()
        self._nodes: dict[Path, NodeSpec] = dict(
            (path, node) for path, node in iter_nodes(tree.root_child)
        )
        self._labels = {p: node_display_label(n) for p, n in self._nodes.items()}
        self._visited: set[Path] = set()

    @classmethod
    def from_model(
        cls,
        model: TreeModel,
        blackboard: Blackboard | None = None,
        leaf_registry: Mapping[str, LeafBehavior] | None = None,
    ) -> "EngineInstance":
        """Validate and expand ``model``, then build an instance over it."""
        diagnostics = validate(model)
        if diagnostics:
            raise InvalidModelError(diagnostics)
        return cls(expand_subtrees(model), blackboard, leaf_registry)

    def register_leaf(self, leaf_id: str, behavior) -> None:
        """Bind ``leaf_id`` to a behavior; re-registration replaces."""
        if not leaf_id:
            raise ValueError("leaf_id must be nonempty")
        self.leaf_registry[leaf_id] = _as_behavior(behavior)

    # -- one epoch ----------------------------------------------------------

    def tick_root(self) -> Status:
        """Run one epoch: tick the root's child and sweep abandoned branches."""
        self._visited = set()
        status = self._tick(self.tree.root_child, (0,))
        self._halt_sweep()
        self.epoch += 1
        return status

    def _state(self, path: Path) -> NodeState:
        state = self.states.get(path)
        if state is None:
            state = self.states[path] = NodeState()
        return state

    def _tick(self, node: NodeSpec, path: Path) -> Status:
        self._visited.add(path)
        self.trace._enter(self.epoch, path)
        state = self._state(path)

        if node.kind is NodeKind.SEQUENCE:
            status = self._tick_sequence(node, path, state)
        elif node.kind is NodeKind.SELECTOR:
            status = self._tick_selector(node, path, state)
        elif node.kind is NodeKind.PARALLEL:
            status = self._tick_parallel(node, path, state)
        elif node.kind is NodeKind.DECORATOR:
            status = self._tick_decorator(node, path, state)
        elif node.kind in (NodeKind.ACTION, NodeKind.CONDITION):
            status = self._tick_leaf(node, path, state)
        else:
            raise ValueError(f"cannot tick unexpanded node {node.kind.value} at {path}")

        state.last_status = status
        self.trace._emit(self.epoch, path, self._labels[path], status)
        return status

    def _tick_sequence(self, node: NodeSpec, path: Path, state: NodeState) -> Status:
        variant = node.variant
        start = 0 if variant is CompositeVariant.REACTIVE else state.cursor
        for i in range(start, len(node.children)):
            status = self._tick(node.children[i], path + (i,))
            if status is Status.RUNNING:
                if variant is not CompositeVariant.REACTIVE:
                    state.cursor = i
                return Status.RUNNING
            if status is Status.FAILURE:
                state.cursor = i if variant is CompositeVariant.STAR else 0
                return Status.FAILURE
        state.cursor = 0
        return Status.SUCCESS

    def _tick_selector(self, node: NodeSpec, path: Path, state: NodeState) -> Status:
        variant = node.variant
        start = 0 if variant is CompositeVariant.REACTIVE else state.cursor
        for i in range(start, len(node.children)):
            status = self._tick(node.children[i], path + (i,))
            if status is Status.RUNNING:
                if variant is not CompositeVariant.REACTIVE:
                    state.cursor = i
                return Status.RUNNING
            if status is Status.SUCCESS:
                state.cursor = i if variant is CompositeVariant.STAR else 0
                return Status.SUCCESS
        state.cursor = 0
        return Status.FAILURE

    def _tick_parallel(self, node: NodeSpec, path: Path, state: NodeState) -> Status:
        n = len(node.children)
        threshold = node.params.get("success_threshold")
        try:
            m = int(threshold)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise PolicyRangeError(f"parallel success_threshold {threshold!r} is not an integer")
        if not 1 <= m <= n:
            raise PolicyRangeError(f"parallel success_threshold {m} outside [1, {n}]")

        for i in range(n):
            if i in state.completed:
                continue
            status = self._tick(node.children[i], path + (i,))
            if status is not Status.RUNNING:
                state.completed[i] = status

        succeeded = sum(1 for s in state.completed.values() if s is Status.SUCCESS)
        failed = sum(1 for s in state.completed.values() if s is Status.FAILURE)
        if succeeded >= m:
            result = Status.SUCCESS
        elif failed > n - m:
            result = Status.FAILURE
        else:
            return Status.RUNNING

        state.completed.clear()
        for i in range(n):
            child_path = path + (i,)
            child_state = self.states.get(child_path)
            if child_state is not None and child_state.last_status is Status.RUNNING:
                self._halt_subtree(child_path)
        return result

    def _bound(self, node: NodeSpec, param: str) -> int:
        raw = node.params.get(param)
        try:
            bound = int(raw)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise BoundRangeError(f"{param} {raw!r} is not an integer")
        if bound < 1:
            raise BoundRangeError(f"{param} must be >= 1, got {bound}")
        return bound

    def _tick_decorator(self, node: NodeSpec, path: Path, state: NodeState) -> Status:
        child = node.children[0]
        child_path = path + (0,)
        kind = node.variant

        if kind is DecoratorKind.INVERTER:
            status = self._tick(child, child_path)
            if status is Status.SUCCESS:
                return Status.FAILURE
            if status is Status.FAILURE:
                return Status.SUCCESS
            return Status.RUNNING

        if kind is DecoratorKind.FORCE_SUCCESS:
            status = self._tick(child, child_path)
            return Status.RUNNING if status is Status.RUNNING else Status.SUCCESS

        if kind is DecoratorKind.REPEAT:
            bound = self._bound(node, "num_cycles")
            status = self._tick(child, child_path)
            if status is Status.RUNNING:
                return Status.RUNNING
            if status is Status.FAILURE:
                state.counter = 0
                return Status.FAILURE
            state.counter += 1
            if state.counter >= bound:
                state.counter = 0
                return Status.SUCCESS
            return Status.RUNNING

        if kind is DecoratorKind.RETRY:
            bound = self._bound(node, "num_attempts")
            while True:
                status = self._tick(child, child_path)
                if status is Status.SUCCESS:
                    state.counter = 0
                    return Status.SUCCESS
                if status is Status.RUNNING:
                    return Status.RUNNING
                state.counter += 1
                if state.counter >= bound:
                    state.counter = 0
                    return Status.FAILURE

        raise ValueError(f"unknown decorator {kind!r}")

    def _tick_leaf(self, node: NodeSpec, path: Path, state: NodeState) -> Status:
        behavior = self.leaf_registry.get(node.leaf_id or "")
        if behavior is None:
            raise LeafUnregisteredError(node.leaf_id or "", path)
        status = behavior.tick(node.params, self.blackboard, state)
        if not isinstance(status, Status):
            raise TypeError(
                f"leaf {node.leaf_id!r} returned {status!r} instead of a Status"
            )
        return status

    # -- halting ------------------------------------------------------------

    def _halt_sweep(self) -> None:
        stale = {
            p
            for p, st in self.states.items()
            if st.last_status is Status.RUNNING and p not in self._visited
        }
        roots = [
            p for p in stale if not any(p[:k] in stale for k in range(1, len(p)))
        ]
        for p in sorted(roots):
            self._halt_subtree(p)

    def _halt_subtree(self, prefix: Path) -> None:
        for path in sorted(self.states):
            if path[: len(prefix)] != prefix:
                continue
            state = self.states[path]
            node = self._nodes.get(path)
            if (
                node is not None
                and node.is_leaf
                and state.last_status is Status.RUNNING
            ):
                behavior = self.leaf_registry.get(node.leaf_id or "")
                if behavior is not None:
                    behavior.on_halt(state)
            state.reset()


def run(
    instance: EngineInstance,
    max_epochs: int,
    frequency: float | None = None,
) -> tuple[Status, TickTrace]:
    """Tick ``instance`` until its root child completes or the epoch cap hits.

    With ``frequency`` set, epoch starts are spaced ``1/frequency`` seconds
    apart in wall-clock time; without it, epochs run back to back and the run
    is fully deterministic.  Returns Running when the cap was reached first.
    """
    if max_epochs < 1:
        raise ValueError("max_epochs must be >= 1")
    if frequency is not None and frequency <= 0:
        raise ValueError("frequency must be > 0")

    period = None if frequency is None else 1.0 / frequency
    status = Status.RUNNING
    deadline = time.monotonic()
    for _ in range(max_epochs):
        if period is not None:
            now = time.monotonic()
            if now < deadline:
                time.sleep(deadline - now)
            deadline = max(deadline, now) + period
        status = instance.tick_root()
        if status is not Status.RUNNING:
            break
    return status, instance.trace
