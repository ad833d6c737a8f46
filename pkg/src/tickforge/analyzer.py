"""Model metrics and reuse analysis over behavior-tree models.

Size and depth count the implicit root as level zero: size is the number of
nodes excluding the root, depth the number of edges from the root to the
deepest node.  Composite/leaf shares are integer percentages of size; the
average branching factor divides child slots (the root's single slot
included) by the number of parents (root included) and is reported to one
decimal.  All rounding is half-up, so shares like 50/50 and factors like 1.6
are stable across platforms.

Reuse detection covers the three mechanisms visible in a model:

* reference reuse: a subtree or leaf used two or more times, with the
  parameters that vary between its use sites,
* clone pairs: trees whose preorder category sequences (sequence, selector,
  parallel, decorator, leaf) are within an edit-distance similarity
  threshold, which catches clone-and-own copies that references would miss,
* inclusion: the include edges the front end recorded while assembling the
  model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import (
    COMPOSITE_KINDS,
    NodeKind,
    NodeSpec,
    TreeDefinition,
    TreeModel,
    expand_subtrees,
    iter_nodes,
)

__all__ = [
    "ModelMetrics",
    "metrics",
    "ReuseSite",
    "ReuseEntry",
    "detect_reference_reuse",
    "ClonePair",
    "detect_clone_pairs",
    "ThresholdRangeError",
    "ModelRow",
    "ProjectRow",
    "CorpusReport",
    "analyze_corpus",
    "ReuseReport",
    "analyze_reuse",
]

_CATEGORIES = ("sequence", "selector", "parallel", "decorator")


def _half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _half_up1(x: float) -> float:
    return math.floor(x * 10 + 0.5) / 10


@dataclass(frozen=True)
class ModelMetrics:
    """Structural measurements of one tree."""

    size: int
    depth: int
    composite_pct: int
    leaf_pct: int
    abf: float
    breakdown: Mapping[str, int]  # composite category -> pct of composites


def _category(node: NodeSpec) -> str:
    if node.kind is NodeKind.SEQUENCE:
        return "sequence"
    if node.kind is NodeKind.SELECTOR:
        return "selector"
    if node.kind is NodeKind.PARALLEL:
        return "parallel"
    if node.kind is NodeKind.DECORATOR:
        return "decorator"
    return "leaf"


def _composite_counts(tree: TreeDefinition) -> dict[str, int]:
    counts = {category: 0 for category in _CATEGORIES}
    for _, node in iter_nodes(tree.root_child):
        if node.kind in COMPOSITE_KINDS:
            counts[_category(node)] += 1
    return counts


def metrics(tree: TreeDefinition) -> ModelMetrics:
    """Measure one tree; meant for expanded (reference-free) definitions.

    Subtree references, when present, count as leaves: measuring an authored
    definition before expansion treats each reference as one opaque step.
    """
    size = 0
    composites = 0
    slots = 1  # the root's single child slot
    parents = 1  # the root
    for _, node in iter_nodes(tree.root_child):
        size += 1
        if node.kind in COMPOSITE_KINDS:
            composites += 1
        if node.children:
            parents += 1
            slots += len(node.children)

    def depth_below(node: NodeSpec) -> int:
        if not node.children:
            return 0
        return 1 + max(depth_below(child) for child in node.children)

    depth = 1 + depth_below(tree.root_child)
    leaves = size - composites
    counts = _composite_counts(tree)
    breakdown = {
        category: _half_up(100 * counts[category] / composites) if composites else 0
        for category in _CATEGORIES
    }
    return ModelMetrics(
        size=size,
        depth=depth,
        composite_pct=_half_up(100 * composites / size),
        leaf_pct=_half_up(100 * leaves / size),
        abf=_half_up1(slots / parents),
        breakdown=breakdown,
    )


# -- reference reuse ----------------------------------------------------------


@dataclass(frozen=True)
class ReuseSite:
    """One place a target is used: tree, node path, parameters passed."""

    tree_id: str
    path: str
    params: Mapping[str, str]


@dataclass(frozen=True)
class ReuseEntry:
    """A subtree or leaf used from two or more sites."""

    target: str
    kind: str  # "subtree" or "leaf"
    count: int
    sites: tuple[ReuseSite, ...]
    varying_params: tuple[str, ...]


def _ordered_trees(model: TreeModel) -> list[TreeDefinition]:
    order = []
    if model.entry in model.trees:
        order.append(model.trees[model.entry])
    for tree_id in sorted(model.trees):
        if tree_id != model.entry:
            order.append(model.trees[tree_id])
    return order


def detect_reference_reuse(model: TreeModel) -> list[ReuseEntry]:
    """Targets referenced at least twice across the model's definitions.

    Subtree references and leaf bindings both count: reusing a leaf id from
    several places is the same mechanism one level down.  ``varying_params``
    names the parameters whose values differ between sites (a parameter
    missing at one site and set at another counts as differing).
    """
    sites: dict[tuple[str, str], list[ReuseSite]] = {}
    for tree in _ordered_trees(model):
        for indices, node in iter_nodes(tree.root_child):
            if node.kind is NodeKind.SUBTREE_REF:
                key = ("subtree", node.leaf_id or "")
            elif node.kind in (NodeKind.ACTION, NodeKind.CONDITION):
                key = ("leaf", node.leaf_id or "")
            else:
                continue
            path = f"{tree.id}:" + "/".join(str(i) for i in indices)
            sites.setdefault(key, []).append(
                ReuseSite(tree_id=tree.id, path=path, params=dict(node.params))
            )

    entries = []
    for (kind, target), use_sites in sites.items():
        if len(use_sites) < 2:
            continue
        names = sorted({name for site in use_sites for name in site.params})
        varying = tuple(
            name
            for name in names
            if len({site.params.get(name) for site in use_sites}) > 1
        )
        entries.append(
            ReuseEntry(
                target=target,
                kind=kind,
                count=len(use_sites),
                sites=tuple(use_sites),
                varying_params=varying,
            )
        )
    entries.sort(key=lambda e: (-e.count, e.kind, e.target))
    return entries


# -- clone detection ----------------------------------------------------------


class ThresholdRangeError(ValueError):
    code = "THRESHOLD_RANGE"


@dataclass(frozen=True)
class ClonePair:
    name_a: str
    name_b: str
    similarity: float


def category_sequence(tree: TreeDefinition) -> list[str]:
    """Preorder category labels; the shape signature clone detection compares."""
    return [_category(node) for _, node in iter_nodes(tree.root_child)]


def _levenshtein(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, item_a in enumerate(a, start=1):
        current = [i]
        for j, item_b in enumerate(b, start=1):
            cost = 0 if item_a == item_b else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return previous[len(b)]


def detect_clone_pairs(
    trees: Sequence[TreeDefinition],
    threshold: float = 0.8,
    names: Sequence[str] | None = None,
) -> list[ClonePair]:
    """Tree pairs whose category sequences are at least ``threshold`` similar.

    Similarity is 1 - editDistance / max(length); identical shapes score 1.0.
    ``names`` overrides the reported labels (defaults to the tree ids).
    Results are sorted by descending similarity, then by name.
    """
    if not 0 < threshold <= 1:
        raise ThresholdRangeError(f"threshold {threshold} outside (0, 1]")
    labels = list(names) if names is not None else [tree.id for tree in trees]
    if len(labels) != len(trees):
        raise ValueError("names must match trees one to one")
    sequences = [category_sequence(tree) for tree in trees]

    pairs = []
    for i in range(len(trees)):
        for j in range(i + 1, len(trees)):
            longest = max(len(sequences[i]), len(sequences[j]))
            distance = _levenshtein(sequences[i], sequences[j])
            similarity = 1.0 - distance / longest
            if similarity >= threshold:
                pairs.append(ClonePair(labels[i], labels[j], similarity))
    pairs.sort(key=lambda p: (-p.similarity, p.name_a, p.name_b))
    return pairs


# -- corpus-level reports -----------------------------------------------------


@dataclass(frozen=True)
class ModelRow:
    name: str
    project: str
    metrics: ModelMetrics


@dataclass(frozen=True)
class ProjectRow:
    project: str
    model_count: int
    avg_size: int
    avg_depth: int


@dataclass(frozen=True)
class CorpusReport:
    models: tuple[ModelRow, ...]
    projects: tuple[ProjectRow, ...]
    aggregate_breakdown: Mapping[str, int] | None
    includes: tuple[tuple[str, str, str], ...]  # (model, source file, include path)


def _project_of(name: str) -> str:
    return name.split("/", 1)[0]


def analyze_corpus(
    named_models: Sequence[tuple[str, TreeModel]], expanded: bool = True
) -> CorpusReport:
    """Per-model metrics plus per-project averages and corpus-wide breakdown.

    A model named ``proj/variant`` belongs to project ``proj``; averages are
    reported for projects with at least two models.  ``expanded`` measures the
    flattened entry tree (the default); otherwise the authored entry tree is
    measured with references as leaves.  Rows come out sorted by model name,
    independent of input order.
    """
    rows = []
    totals = {category: 0 for category in _CATEGORIES}
    includes = []
    for name, model in sorted(named_models, key=lambda pair: pair[0]):
        tree = expand_subtrees(model) if expanded else model.entry_tree
        rows.append(ModelRow(name=name, project=_project_of(name), metrics=metrics(tree)))
        for category, count in _composite_counts(tree).items():
            totals[category] += count
        for source, target in model.includes:
            includes.append((name, source, target))

    by_project: dict[str, list[ModelRow]] = {}
    for row in rows:
        by_project.setdefault(row.project, []).append(row)
    projects = []
    for project in sorted(by_project):
        group = by_project[project]
        if len(group) < 2:
            continue
        projects.append(
            ProjectRow(
                project=project,
                model_count=len(group),
                avg_size=_half_up(sum(r.metrics.size for r in group) / len(group)),
                avg_depth=_half_up(sum(r.metrics.depth for r in group) / len(group)),
            )
        )

    total_composites = sum(totals.values())
    aggregate = (
        {
            category: _half_up(100 * totals[category] / total_composites)
            for category in _CATEGORIES
        }
        if total_composites
        else None
    )
    return CorpusReport(
        models=tuple(rows),
        projects=tuple(projects),
        aggregate_breakdown=aggregate,
        includes=tuple(includes),
    )


@dataclass(frozen=True)
class ReuseReport:
    """All three reuse mechanisms over a set of named models."""

    by_reference: tuple[tuple[str, ReuseEntry], ...]  # (model name, entry)
    clone_pairs: tuple[ClonePair, ...]
    by_inclusion: tuple[tuple[str, str, str], ...]  # (model, source, include path)


def analyze_reuse(
    named_models: Sequence[tuple[str, TreeModel]], threshold: float = 0.8
) -> ReuseReport:
    """Run reference, clone, and inclusion detection over several models.

    Clone pairs are computed between the expanded entry trees of the models
    (labeled by model name) and, within each model, between its authored
    definitions (labeled ``model:tree``).
    """
    by_reference = []
    clone_inputs: list[tuple[str, TreeDefinition]] = []
    by_inclusion = []
    named_models = sorted(named_models, key=lambda pair: pair[0])
    for name, model in named_models:
        for entry in detect_reference_reuse(model):
            by_reference.append((name, entry))
        clone_inputs.append((name, expand_subtrees(model)))
        for source, target in model.includes:
            by_inclusion.append((name, source, target))

    pairs = detect_clone_pairs(
        [tree for _, tree in clone_inputs],
        threshold,
        names=[name for name, _ in clone_inputs],
    )
    for name, model in named_models:
        if len(model.trees) > 1:
            defs = _ordered_trees(model)
            pairs.extend(
                detect_clone_pairs(
                    defs,
                    threshold,
                    names=[f"{name}:{tree.id}" for tree in defs],
                )
            )
    pairs.sort(key=lambda p: (-p.similarity, p.name_a, p.name_b))
    return ReuseReport(
        by_reference=tuple(by_reference),
        clone_pairs=tuple(pairs),
        by_inclusion=tuple(by_inclusion),
    )
