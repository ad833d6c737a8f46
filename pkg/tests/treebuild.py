"""Compact constructors for hand-built trees used across the test suite.

Trees under test are mostly tiny and written inline; these helpers keep the
node plumbing (variants, params, tuples) out of the way so a test reads like
the shape it checks.
"""

from __future__ import annotations

from tickforge.engine import EngineInstance
from tickforge.model import (
    Blackboard,
    CompositeVariant,
    DecoratorKind,
    NodeKind,
    NodeSpec,
    Status,
    TreeDefinition,
    TreeModel,
)

S = Status.SUCCESS
F = Status.FAILURE
R = Status.RUNNING


def scripted(statuses: str, name: str | None = None) -> NodeSpec:
    """Action leaf replaying the given status script, e.g. "F,F,S"."""
    return NodeSpec(
        kind=NodeKind.ACTION,
        name=name,
        leaf_id="ScriptedStatus",
        params={"statuses": statuses},
    )


def action(leaf_id: str, name: str | None = None, **params: str) -> NodeSpec:
    return NodeSpec(kind=NodeKind.ACTION, name=name, leaf_id=leaf_id, params=params)


def condition(leaf_id: str, name: str | None = None, **params: str) -> NodeSpec:
    return NodeSpec(kind=NodeKind.CONDITION, name=name, leaf_id=leaf_id, params=params)


def seq(*children: NodeSpec, variant=CompositeVariant.MEMORY, name=None) -> NodeSpec:
    return NodeSpec(
        kind=NodeKind.SEQUENCE, variant=variant, name=name, children=children
    )


def sel(*children: NodeSpec, variant=CompositeVariant.MEMORY, name=None) -> NodeSpec:
    return NodeSpec(
        kind=NodeKind.SELECTOR, variant=variant, name=name, children=children
    )


def par(threshold: int, *children: NodeSpec, name=None) -> NodeSpec:
    return NodeSpec(
        kind=NodeKind.PARALLEL,
        name=name,
        params={"success_threshold": str(threshold)},
        children=children,
    )


def deco(kind: DecoratorKind, child: NodeSpec, name=None, **params: str) -> NodeSpec:
    return NodeSpec(
        kind=NodeKind.DECORATOR, variant=kind, name=name, params=params, children=(child,)
    )


def inverter(child: NodeSpec) -> NodeSpec:
    return deco(DecoratorKind.INVERTER, child)


def force_success(child: NodeSpec) -> NodeSpec:
    return deco(DecoratorKind.FORCE_SUCCESS, child)


def repeat(num_cycles: int, child: NodeSpec) -> NodeSpec:
    return deco(DecoratorKind.REPEAT, child, num_cycles=str(num_cycles))


def retry(num_attempts: int, child: NodeSpec) -> NodeSpec:
    return deco(DecoratorKind.RETRY, child, num_attempts=str(num_attempts))


def ref(target_tree: str, **params: str) -> NodeSpec:
    return NodeSpec(kind=NodeKind.SUBTREE_REF, leaf_id=target_tree, params=params)


def tree(child: NodeSpec, tree_id: str = "Main") -> TreeDefinition:
    return TreeDefinition(id=tree_id, root_child=child)


def model_of(*defs: TreeDefinition, entry: str | None = None, includes=()) -> TreeModel:
    return TreeModel(
        trees={d.id: d for d in defs},
        entry=entry if entry is not None else defs[0].id,
        includes=tuple(includes),
    )


def instance(
    root_child: NodeSpec,
    blackboard: Blackboard | None = None,
    leaf_registry=None,
) -> EngineInstance:
    return EngineInstance(tree(root_child), blackboard, leaf_registry)


def epoch_statuses(inst: EngineInstance, epochs: int) -> list[Status]:
    """Root status per epoch; keeps ticking past completion (tree restarts)."""
    return [inst.tick_root() for _ in range(epochs)]
