"""Seeded random model generators for differential and round-trip testing.

``random_scripted_tree`` produces executable trees whose leaves are all
status-scripted, suitable for running the engine against the reference
oracle.  ``random_model`` produces multi-tree models with names, parameters,
and subtree references, suitable for serializer round-trips.  Both take an
explicit :class:`random.Random` so runs are reproducible from a seed.
"""

from __future__ import annotations

import random

from .model import (
    CompositeVariant,
    DecoratorKind,
    NodeKind,
    NodeSpec,
    Status,
    TreeDefinition,
    TreeModel,
)

__all__ = ["random_scripted_tree", "random_model"]

_STATUS_TOKENS = {
    Status.SUCCESS: "SUCCESS",
    Status.FAILURE: "FAILURE",
    Status.RUNNING: "RUNNING",
}


def _scripted_leaf(rng: random.Random) -> NodeSpec:
    length = rng.randint(1, 4)
    script = ",".join(
        _STATUS_TOKENS[rng.choice((Status.SUCCESS, Status.FAILURE, Status.RUNNING))]
        for _ in range(length)
    )
    kind = NodeKind.ACTION if rng.random() < 0.8 else NodeKind.CONDITION
    return NodeSpec(kind=kind, leaf_id="ScriptedStatus", params={"statuses": script})


def random_scripted_tree(
    rng: random.Random,
    max_depth: int = 4,
    max_nodes: int = 15,
    tree_id: str = "Main",
) -> TreeDefinition:
    """A random executable tree: scripted leaves, every composite flavor."""

    # Nodes are reserved from the budget before they are built, so the total
    # node count never exceeds max_nodes.
    budget = [max_nodes - 1]  # the root child is already reserved

    def build(depth: int) -> NodeSpec:
        if depth >= max_depth or budget[0] < 1 or rng.random() < 0.25 * depth:
            return _scripted_leaf(rng)

        roll = rng.random()
        if roll < 0.35:
            kind, variant = NodeKind.SEQUENCE, rng.choice(tuple(CompositeVariant))
        elif roll < 0.65:
            kind, variant = NodeKind.SELECTOR, rng.choice(tuple(CompositeVariant))
        elif roll < 0.8:
            kind, variant = NodeKind.PARALLEL, None
        else:
            kind, variant = NodeKind.DECORATOR, rng.choice(tuple(DecoratorKind))

        if kind is NodeKind.DECORATOR:
            budget[0] -= 1
            child = build(depth + 1)
            params = {}
            if variant is DecoratorKind.REPEAT:
                params["num_cycles"] = str(rng.randint(1, 3))
            elif variant is DecoratorKind.RETRY:
                params["num_attempts"] = str(rng.randint(1, 3))
            return NodeSpec(kind=kind, variant=variant, params=params, children=(child,))

        arity = rng.randint(1, min(4, budget[0]))
        budget[0] -= arity
        children = tuple(build(depth + 1) for _ in range(arity))
        params = {}
        if kind is NodeKind.PARALLEL:
            params["success_threshold"] = str(rng.randint(1, len(children)))
        return NodeSpec(kind=kind, variant=variant, params=params, children=children)

    return TreeDefinition(id=tree_id, root_child=build(1))


_LEAF_IDS = ("MoveBase", "Explore", "GraspObject", "CheckBattery", "SaySomething")
_PARAM_POOL = (
    ("goal", "{current_waypoint}"),
    ("x", "1.5"),
    ("message", 'quote " and <angle> & amp'),
    ("mode", "fast"),
    ("radius", "0.25"),
)


def _authored_leaf(rng: random.Random) -> NodeSpec:
    kind = NodeKind.ACTION if rng.random() < 0.7 else NodeKind.CONDITION
    params = dict(rng.sample(_PARAM_POOL, rng.randint(0, 2)))
    name = f"step{rng.randint(1, 99)}" if rng.random() < 0.4 else None
    return NodeSpec(kind=kind, leaf_id=rng.choice(_LEAF_IDS), params=params, name=name)


def random_model(rng: random.Random, max_extra_trees: int = 2) -> TreeModel:
    """A random valid multi-tree model exercising names, params, references.

    The entry tree may reference the extra definitions (never the other way
    round), so the model is always acyclic and fully resolved.
    """
    extra_ids = [f"Aux{i}" for i in range(rng.randint(0, max_extra_trees))]

    def build(depth: int, referable: list[str]) -> NodeSpec:
        if depth >= 3 or rng.random() < 0.3 * depth:
            if referable and rng.random() < 0.3:
                target = rng.choice(referable)
                params = dict(rng.sample(_PARAM_POOL, rng.randint(0, 1)))
                return NodeSpec(kind=NodeKind.SUBTREE_REF, leaf_id=target, params=params)
            return _authored_leaf(rng)
        roll = rng.random()
        if roll < 0.4:
            kind, variant = NodeKind.SEQUENCE, rng.choice(tuple(CompositeVariant))
        elif roll < 0.7:
            kind, variant = NodeKind.SELECTOR, rng.choice(tuple(CompositeVariant))
        elif roll < 0.85:
            kind, variant = NodeKind.PARALLEL, None
        else:
            kind, variant = NodeKind.DECORATOR, rng.choice(tuple(DecoratorKind))

        if kind is NodeKind.DECORATOR:
            params = {}
            if variant is DecoratorKind.REPEAT:
                params["num_cycles"] = str(rng.randint(1, 5))
            elif variant is DecoratorKind.RETRY:
                params["num_attempts"] = str(rng.randint(1, 5))
            return NodeSpec(
                kind=kind,
                variant=variant,
                params=params,
                children=(build(depth + 1, referable),),
            )
        arity = rng.randint(1, 3)
        children = tuple(build(depth + 1, referable) for _ in range(arity))
        params = {}
        if kind is NodeKind.PARALLEL:
            params["success_threshold"] = str(rng.randint(1, len(children)))
        name = f"group{rng.randint(1, 9)}" if rng.random() < 0.3 else None
        return NodeSpec(kind=kind, variant=variant, params=params, children=children, name=name)

    trees = {}
    for tree_id in extra_ids:
        trees[tree_id] = TreeDefinition(id=tree_id, root_child=build(1, []))
    trees["Entry"] = TreeDefinition(id="Entry", root_child=build(0, extra_ids))
    return TreeModel(trees=trees, entry="Entry")
