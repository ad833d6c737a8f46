"""Behavior-tree abstract syntax, structural validation, and subtree expansion.

A behavior tree model is a set of named tree definitions plus a designated
entry tree.  Each definition owns a single root child; composite nodes
(sequence, selector, parallel, decorator) coordinate leaf nodes (actions and
conditions) that do the actual work.  Subtree references point at other
definitions by name and are flattened away by :func:`expand_subtrees` before
execution or metric analysis.

Everything in this module is plain data: nodes are immutable, validation is a
pure function returning diagnostics, and the only mutable value is the
:class:`Blackboard`, the string-keyed store through which leaves exchange data
with the host system.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Union

__all__ = [
    "Status",
    "NodeKind",
    "CompositeVariant",
    "DecoratorKind",
    "NodeSpec",
    "TreeDefinition",
    "TreeModel",
    "structurally_equal",
    "Blackboard",
    "BlackboardMissError",
    "CycleError",
    "Diagnostic",
    "InvalidModelError",
    "validate",
    "expand_subtrees",
    "iter_nodes",
    "node_display_label",
    "parse_literal",
]


class Status(enum.Enum):
    """The three-valued result every node tick produces."""

    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"
    RUNNING = "RUNNING"

    def __str__(self) -> str:
        return self.value


class NodeKind(enum.Enum):
    SEQUENCE = "sequence"
    SELECTOR = "selector"
    PARALLEL = "parallel"
    DECORATOR = "decorator"
    ACTION = "action"
    CONDITION = "condition"
    SUBTREE_REF = "subtree_ref"


#: Kinds that coordinate children (the "composite" category in metrics).
COMPOSITE_KINDS = frozenset(
    {NodeKind.SEQUENCE, NodeKind.SELECTOR, NodeKind.PARALLEL, NodeKind.DECORATOR}
)
#: Kinds that execute work and never have children.
LEAF_KINDS = frozenset({NodeKind.ACTION, NodeKind.CONDITION})


class CompositeVariant(enum.Enum):
    """Cursor discipline of a sequence or selector.

    MEMORY resumes at the running child and forgets its cursor on any
    completion.  STAR additionally pins the cursor on the early-exit status
    (a failed sequence child / a succeeded selector child) so that child is
    re-tried on the next activation.  REACTIVE restarts from the first child
    on every tick.
    """

    MEMORY = "memory"
    STAR = "star"
    REACTIVE = "reactive"


class DecoratorKind(enum.Enum):
    INVERTER = "Inverter"
    FORCE_SUCCESS = "ForceSuccess"
    REPEAT = "Repeat"
    RETRY = "Retry"


#: Decorators that carry an integer bound, with their parameter name.
BOUND_PARAMS = {
    DecoratorKind.REPEAT: "num_cycles",
    DecoratorKind.RETRY: "num_attempts",
}

#: Parameter holding the parallel success policy.
PARALLEL_THRESHOLD_PARAM = "success_threshold"

Variant = Union[CompositeVariant, DecoratorKind, None]


def _freeze_params(params: Mapping[str, str] | None) -> Mapping[str, str]:
    return MappingProxyType(dict(params or {}))


@dataclass(frozen=True)
class NodeSpec:
    """One node of the syntax tree.

    ``variant`` refines the kind: a :class:`CompositeVariant` for sequences
    and selectors, a :class:`DecoratorKind` for decorators, ``None`` elsewhere.
    ``leaf_id`` binds actions and conditions to a registered behavior, and
    names the target definition for subtree references.  ``params`` holds raw
    attribute strings; a value written ``{key}`` is a blackboard reference,
    anything else is a literal.
    """

    kind: NodeKind
    variant: Variant = None
    name: str | None = None
    leaf_id: str | None = None
    params: Mapping[str, str] = field(default_factory=dict)
    children: tuple["NodeSpec", ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", _freeze_params(self.params))
        object.__setattr__(self, "children", tuple(self.children))
        if self.kind in (NodeKind.SEQUENCE, NodeKind.SELECTOR):
            if not isinstance(self.variant, CompositeVariant):
                raise ValueError(f"{self.kind.value} node needs a CompositeVariant")
        elif self.kind is NodeKind.DECORATOR:
            if not isinstance(self.variant, DecoratorKind):
                raise ValueError("decorator node needs a DecoratorKind")
        elif self.variant is not None:
            raise ValueError(f"{self.kind.value} node takes no variant")
        if self.kind in LEAF_KINDS and not self.leaf_id:
            raise ValueError(f"{self.kind.value} node needs a leaf_id")
        if self.kind is NodeKind.SUBTREE_REF and not self.leaf_id:
            raise ValueError("subtree reference needs a target tree id")

    @property
    def is_composite(self) -> bool:
        return self.kind in COMPOSITE_KINDS

    @property
    def is_leaf(self) -> bool:
        return self.kind in LEAF_KINDS


def node_display_label(node: NodeSpec) -> str:
    """Human-facing label used in traces and DOT output."""
    if node.name:
        return node.name
    if node.kind is NodeKind.SUBTREE_REF:
        return f"SubTree:{node.leaf_id}"
    if node.is_leaf:
        return node.leaf_id or node.kind.value
    if node.kind is NodeKind.DECORATOR:
        return node.variant.value  # type: ignore[union-attr]
    if node.kind is NodeKind.PARALLEL:
        return "Parallel"
    base = "Sequence" if node.kind is NodeKind.SEQUENCE else "Fallback"
    suffix = {
        CompositeVariant.MEMORY: "",
        CompositeVariant.STAR: "Star",
        CompositeVariant.REACTIVE: "",
    }[node.variant]  # type: ignore[index]
    prefix = "Reactive" if node.variant is CompositeVariant.REACTIVE else ""
    return f"{prefix}{base}{suffix}"


@dataclass(frozen=True)
class TreeDefinition:
    """A named tree.  The implicit root has exactly this one child."""

    id: str
    root_child: NodeSpec


@dataclass(frozen=True)
class TreeModel:
    """A set of tree definitions with a designated entry tree.

    ``includes`` records file-inclusion edges gathered by the XML front end,
    as (including file, included file) pairs; it is empty for models built
    programmatically.
    """

    trees: Mapping[str, TreeDefinition]
    entry: str
    includes: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "trees", MappingProxyType(dict(self.trees)))
        object.__setattr__(self, "includes", tuple(self.includes))

    @property
    def entry_tree(self) -> TreeDefinition:
        return self.trees[self.entry]


def structurally_equal(a: TreeModel, b: TreeModel) -> bool:
    """True when two models define the same trees and entry.

    Include provenance is ignored: a model assembled from several files is
    structurally equal to the same model written as one document.
    """
    return a.entry == b.entry and dict(a.trees) == dict(b.trees)


# ---------------------------------------------------------------------------
# Blackboard


#: Types a blackboard entry may hold.
BlackboardValue = Union[str, int, float, bool, list]


class BlackboardMissError(KeyError):
    """A required read hit an absent blackboard key."""

    code = "BLACKBOARD_MISS"

    def __init__(self, key: str):
        super().__init__(key)
        self.key = key

    def __str__(self) -> str:
        return f"blackboard key {self.key!r} is not set"


class Blackboard:
    """String-keyed value store mediating all model/environment data flow.

    Values are strings, ints, floats, bools, or lists of strings.  Reading an
    absent key raises :class:`BlackboardMissError`; there is no silent
    default.
    """

    def __init__(self, entries: Mapping[str, BlackboardValue] | None = None):
        self._entries: dict[str, BlackboardValue] = {}
        for key, value in (entries or {}).items():
            self.write(key, value)

    def read(self, key: str) -> BlackboardValue:
        try:
            return self._entries[key]
        except KeyError:
            raise BlackboardMissError(key) from None

    def write(self, key: str, value: BlackboardValue) -> None:
        if isinstance(value, list):
            if not all(isinstance(item, str) for item in value):
                raise TypeError(f"list value for {key!r} must contain only strings")
            value = list(value)
        elif not isinstance(value, (str, int, float, bool)):
            raise TypeError(
                f"unsupported blackboard value type {type(value).__name__!r} for {key!r}"
            )
        self._entries[key] = value

    def has(self, key: str) -> bool:
        return key in self._entries

    def snapshot(self) -> dict[str, BlackboardValue]:
        return {
            k: list(v) if isinstance(v, list) else v for k, v in self._entries.items()
        }

    def __repr__(self) -> str:
        return f"Blackboard({self._entries!r})"


def is_blackboard_ref(value: str) -> bool:
    return len(value) > 2 and value.startswith("{") and value.endswith("}")


def ref_key(value: str) -> str:
    return value[1:-1]


def parse_literal(text: str) -> BlackboardValue:
    """Interpret an attribute string as a typed literal.

    Tries int, float, and bool (``true``/``false``) in that order and falls
    back to the raw string.
    """
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text.lower() == "true":
        return True
    if text.lower() == "false":
        return False
    return text


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Diagnostic:
    """A structural rule violation at a node path."""

    rule: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule} at {self.path}: {self.message}"


class InvalidModelError(ValueError):
    """Raised when an operation requires a model that passes validation."""

    def __init__(self, diagnostics: "list[Diagnostic]"):
        super().__init__("; ".join(str(d) for d in diagnostics) or "invalid model")
        self.diagnostics = list(diagnostics)


def _node_path(tree_id: str, indices: tuple[int, ...]) -> str:
    return f"{tree_id}:{'/'.join(str(i) for i in indices)}"


def iter_nodes(node: NodeSpec, _prefix: tuple[int, ...] = (0,)):
    """Yield ``(path, node)`` pairs in preorder, the root child at ``(0,)``."""
    yield _prefix, node
    for i, child in enumerate(node.children):
        yield from iter_nodes(child, _prefix + (i,))


def _positive_int_param(node: NodeSpec, param: str) -> int | None:
    raw = node.params.get(param)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return value if value >= 1 else None


def validate(model: TreeModel) -> list[Diagnostic]:
    """Check every structural invariant; an empty list means the model is valid.

    Rules: decorators hold exactly one child (DECORATOR_ARITY); leaves and
    subtree references hold none (LEAF_ARITY); sequence/selector/parallel hold
    at least one (COMPOSITE_ARITY); repeat/retry bounds are positive integers
    (BOUND_RANGE); the parallel policy is an integer within [1, child count]
    (POLICY_RANGE); the entry id and all reference targets resolve
    (ENTRY_UNRESOLVED, SUBTREE_UNRESOLVED); the reference graph is acyclic
    (SUBTREE_CYCLE).
    """
    diagnostics: list[Diagnostic] = []

    def emit(rule: str, path: str, message: str) -> None:
        diagnostics.append(Diagnostic(rule, path, message))

    if model.entry not in model.trees:
        emit("ENTRY_UNRESOLVED", model.entry, f"entry tree {model.entry!r} is not defined")

    for tree_id, tree in model.trees.items():
        for indices, node in iter_nodes(tree.root_child):
            path = _node_path(tree_id, indices)
            n_children = len(node.children)
            if node.kind is NodeKind.DECORATOR:
                if n_children != 1:
                    emit(
                        "DECORATOR_ARITY",
                        path,
                        f"decorator has {n_children} children, expected exactly 1",
                    )
                dk = node.variant
                if dk in BOUND_PARAMS and _positive_int_param(node, BOUND_PARAMS[dk]) is None:
                    emit(
                        "BOUND_RANGE",
                        path,
                        f"{dk.value} needs integer {BOUND_PARAMS[dk]} >= 1, "
                        f"got {node.params.get(BOUND_PARAMS[dk])!r}",
                    )
            elif node.kind in (NodeKind.SEQUENCE, NodeKind.SELECTOR, NodeKind.PARALLEL):
                if n_children == 0:
                    emit(
                        "COMPOSITE_ARITY",
                        path,
                        f"{node.kind.value} has no children; empty composites are rejected",
                    )
                if node.kind is NodeKind.PARALLEL:
                    threshold = _positive_int_param(node, PARALLEL_THRESHOLD_PARAM)
                    if threshold is None or threshold > max(n_children, 1):
                        emit(
                            "POLICY_RANGE",
                            path,
                            f"parallel needs integer {PARALLEL_THRESHOLD_PARAM} in "
                            f"[1, {n_children}], got "
                            f"{node.params.get(PARALLEL_THRESHOLD_PARAM)!r}",
                        )
            else:
                if n_children != 0:
                    emit(
                        "LEAF_ARITY",
                        path,
                        f"{node.kind.value} node cannot have children",
                    )
                if node.kind is NodeKind.SUBTREE_REF and node.leaf_id not in model.trees:
                    emit(
                        "SUBTREE_UNRESOLVED",
                        path,
                        f"referenced tree {node.leaf_id!r} is not defined",
                    )

    diagnostics.extend(_reference_cycles(model))
    return diagnostics


def _reference_edges(tree: TreeDefinition) -> list[str]:
    return [
        node.leaf_id
        for _, node in iter_nodes(tree.root_child)
        if node.kind is NodeKind.SUBTREE_REF and node.leaf_id is not None
    ]


def _reference_cycles(model: TreeModel) -> list[Diagnostic]:
    diagnostics = []
    WHITE, GREY, BLACK = 0, 1, 2
    color = {tree_id: WHITE for tree_id in model.trees}

    def visit(tree_id: str, stack: list[str]) -> None:
        color[tree_id] = GREY
        for target in _reference_edges(model.trees[tree_id]):
            if target not in model.trees:
                continue
            if color[target] == GREY:
                cycle = stack[stack.index(target):] + [target] if target in stack else [tree_id, target]
                diagnostics.append(
                    Diagnostic(
                        "SUBTREE_CYCLE",
                        target,
                        "subtree references form a cycle: " + " -> ".join(cycle),
                    )
                )
            elif color[target] == WHITE:
                visit(target, stack + [target])
        color[tree_id] = BLACK

    for tree_id in sorted(model.trees):
        if color[tree_id] == WHITE:
            visit(tree_id, [tree_id])
    return diagnostics


# ---------------------------------------------------------------------------
# Subtree expansion


class CycleError(ValueError):
    """Raised when subtree references form a cycle during expansion."""

    code = "CYCLE"


def expand_subtrees(model: TreeModel) -> TreeDefinition:
    """Flatten the entry tree into a single reference-free definition.

    Every subtree reference is replaced by a fresh copy of the referenced
    definition's root child.  The reference's parameters act as blackboard-key
    remappings: inside the copied body, a parameter value ``{k}`` where ``k``
    names a reference parameter is rewritten to that parameter's value.  Each
    reference produces an independent copy, so repeated references share no
    runtime state.

    Expects a model that passes :func:`validate`; dangling references and
    cycles raise ``KeyError`` / :class:`CycleError` defensively.
    """

    def substitute(value: str, bindings: Mapping[str, str]) -> str:
        if is_blackboard_ref(value) and ref_key(value) in bindings:
            return bindings[ref_key(value)]
        return value

    def copy_node(node: NodeSpec, bindings: Mapping[str, str], active: tuple[str, ...]) -> NodeSpec:
        if node.kind is NodeKind.SUBTREE_REF:
            target = node.leaf_id or ""
            if target in active:
                raise CycleError(
                    "subtree references form a cycle: " + " -> ".join(active + (target,))
                )
            body = model.trees[target].root_child
            inner = {k: substitute(v, bindings) for k, v in node.params.items()}
            return copy_node(body, inner, active + (target,))
        return NodeSpec(
            kind=node.kind,
            variant=node.variant,
            name=node.name,
            leaf_id=node.leaf_id,
            params={k: substitute(v, bindings) for k, v in node.params.items()},
            children=tuple(copy_node(c, bindings, active) for c in node.children),
        )

    entry = model.entry_tree
    return TreeDefinition(
        id=entry.id, root_child=copy_node(entry.root_child, {}, (entry.id,))
    )


def count_nodes(node: NodeSpec) -> int:
    """Number of nodes in the subtree rooted at ``node`` (itself included)."""
    return 1 + sum(count_nodes(c) for c in node.children)
