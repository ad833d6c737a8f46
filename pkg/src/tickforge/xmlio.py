"""XML front end: parsing, file inclusion, canonical output, DOT export.

A document is a ``<root>`` element, optionally carrying
``main_tree_to_execute``, containing ``<BehaviorTree ID="...">`` definitions
and ``<include path="..."/>`` directives.  Inside a definition the element
vocabulary is:

* ``Sequence`` / ``SequenceStar`` / ``ReactiveSequence``
* ``Fallback`` / ``FallbackStar`` / ``ReactiveFallback``
* ``Parallel`` (``success_threshold``)
* ``Inverter``, ``ForceSuccess``, ``Repeat`` (``num_cycles``),
  ``RetryUntilSuccessful`` (``num_attempts``)
* ``Action`` / ``Condition`` / ``SubTree`` (all with ``ID``)
* built-in leaves written directly as elements, e.g. ``<AlwaysSuccess/>``

``name`` attributes label nodes; every other attribute becomes a parameter.
Unknown elements are rejected.  Grammar errors carry file, line, and column
(:class:`DslError`); after collection the model is checked with
:func:`tickforge.model.validate`, and any findings (arities, bounds,
reference resolution) are raised together as one
:class:`~tickforge.model.InvalidModelError` so a linter can report them all
at once.

Includes are resolved relative to the including file, loaded once each
(diamonds are fine), and cycle-checked.  Only the top document may carry
``main_tree_to_execute``.  The model records one include edge per directive,
as (including file name, path as written).

``serialize`` emits a canonical document: no XML prolog, two-space
indentation, attributes sorted by name, entry tree first and the remaining
definitions sorted by id.  ``parse(serialize(m))`` reproduces the model's
trees and entry exactly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from xml.parsers import expat

from .leaves import BUILTIN_ACTION_ELEMENTS, BUILTIN_CONDITION_ELEMENTS
from .model import (
    CompositeVariant,
    DecoratorKind,
    NodeKind,
    NodeSpec,
    TreeDefinition,
    TreeModel,
    expand_subtrees,
    validate,
    InvalidModelError,
)

__all__ = ["DslError", "parse", "parse_file", "serialize", "to_dot"]


class DslError(ValueError):
    """A positioned front-end error: ``file:line:col: CODE: message``."""

    def __init__(self, code: str, message: str, file: str, line: int, col: int):
        super().__init__(message)
        self.code = code
        self.message = message
        self.file = file
        self.line = line
        self.col = col

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.code}: {self.message}"


# -- raw XML reading ---------------------------------------------------------


@dataclass
class _XElement:
    tag: str
    attrs: dict
    line: int
    col: int
    children: list = field(default_factory=list)


def _read_xml(text: str, display: str) -> _XElement:
    """Parse one document into a positioned element tree."""
    parser = expat.ParserCreate()
    stack: list[_XElement] = []
    root: list[_XElement] = []

    def start(tag, attrs):
        element = _XElement(
            tag, dict(attrs), parser.CurrentLineNumber, parser.CurrentColumnNumber + 1
        )
        if stack:
            stack[-1].children.append(element)
        else:
            root.append(element)
        stack.append(element)

    def end(tag):
        stack.pop()

    def chars(data):
        if data.strip():
            raise DslError(
                "PARSE",
                f"unexpected text content {data.strip()[:40]!r}",
                display,
                parser.CurrentLineNumber,
                parser.CurrentColumnNumber + 1,
            )

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise DslError(
            "PARSE",
            expat.errors.messages.get(exc.code, str(exc)),
            display,
            exc.lineno,
            (exc.offset or 0) + 1,
        ) from None
    if not root:
        raise DslError("PARSE", "document has no root element", display, 1, 1)
    return root[0]


# -- element mapping ---------------------------------------------------------

_SEQUENCE_ELEMENTS = {
    "Sequence": CompositeVariant.MEMORY,
    "SequenceStar": CompositeVariant.STAR,
    "ReactiveSequence": CompositeVariant.REACTIVE,
}
_SELECTOR_ELEMENTS = {
    "Fallback": CompositeVariant.MEMORY,
    "FallbackStar": CompositeVariant.STAR,
    "ReactiveFallback": CompositeVariant.REACTIVE,
}
_DECORATOR_ELEMENTS = {
    "Inverter": DecoratorKind.INVERTER,
    "ForceSuccess": DecoratorKind.FORCE_SUCCESS,
    "Repeat": DecoratorKind.REPEAT,
    "RetryUntilSuccessful": DecoratorKind.RETRY,
}


def _build_node(element: _XElement, display: str) -> NodeSpec:
    tag = element.tag
    attrs = dict(element.attrs)
    name = attrs.pop("name", None)
    children = tuple(_build_node(c, display) for c in element.children)

    if tag in _SEQUENCE_ELEMENTS:
        return NodeSpec(
            kind=NodeKind.SEQUENCE,
            variant=_SEQUENCE_ELEMENTS[tag],
            name=name,
            params=attrs,
            children=children,
        )
    if tag in _SELECTOR_ELEMENTS:
        return NodeSpec(
            kind=NodeKind.SELECTOR,
            variant=_SELECTOR_ELEMENTS[tag],
            name=name,
            params=attrs,
            children=children,
        )
    if tag == "Parallel":
        return NodeSpec(
            kind=NodeKind.PARALLEL, name=name, params=attrs, children=children
        )
    if tag in _DECORATOR_ELEMENTS:
        return NodeSpec(
            kind=NodeKind.DECORATOR,
            variant=_DECORATOR_ELEMENTS[tag],
            name=name,
            params=attrs,
            children=children,
        )
    if tag in ("Action", "Condition", "SubTree"):
        leaf_id = attrs.pop("ID", None)
        if not leaf_id:
            raise DslError(
                "MISSING_ATTRIBUTE",
                f"<{tag}> needs an ID attribute",
                display,
                element.line,
                element.col,
            )
        kind = {
            "Action": NodeKind.ACTION,
            "Condition": NodeKind.CONDITION,
            "SubTree": NodeKind.SUBTREE_REF,
        }[tag]
        return NodeSpec(
            kind=kind, name=name, leaf_id=leaf_id, params=attrs, children=children
        )
    if tag in BUILTIN_ACTION_ELEMENTS:
        return NodeSpec(
            kind=NodeKind.ACTION, name=name, leaf_id=tag, params=attrs, children=children
        )
    if tag in BUILTIN_CONDITION_ELEMENTS:
        return NodeSpec(
            kind=NodeKind.CONDITION,
            name=name,
            leaf_id=tag,
            params=attrs,
            children=children,
        )
    raise DslError(
        "UNKNOWN_ELEMENT",
        f"unknown element <{tag}>",
        display,
        element.line,
        element.col,
    )


@dataclass
class _Collected:
    trees: dict = field(default_factory=dict)
    tree_files: dict = field(default_factory=dict)  # tree id -> defining file
    includes: list = field(default_factory=list)
    loaded: set = field(default_factory=set)  # resolved paths, for diamonds


def _collect_document(
    root: _XElement,
    display: str,
    directory: str,
    out: _Collected,
    active: tuple,
    top: bool,
) -> str | None:
    if root.tag != "root":
        raise DslError(
            "PARSE",
            f"expected <root> document element, found <{root.tag}>",
            display,
            root.line,
            root.col,
        )
    entry_attr = root.attrs.get("main_tree_to_execute")
    if entry_attr is not None and not top:
        raise DslError(
            "PARSE",
            "main_tree_to_execute is only allowed in the top document",
            display,
            root.line,
            root.col,
        )

    for element in root.children:
        if element.tag == "include":
            path_attr = element.attrs.get("path")
            if not path_attr:
                raise DslError(
                    "MISSING_ATTRIBUTE",
                    "<include> needs a path attribute",
                    display,
                    element.line,
                    element.col,
                )
            out.includes.append((os.path.basename(display) or display, path_attr))
            resolved = os.path.normpath(os.path.join(directory, path_attr))
            real = os.path.realpath(resolved)
            if real in active:
                raise DslError(
                    "INCLUDE_CYCLE",
                    f"inclusion of {path_attr!r} closes a cycle",
                    display,
                    element.line,
                    element.col,
                )
            if real in out.loaded:
                continue
            try:
                with open(resolved, "r", encoding="utf-8") as handle:
                    text = handle.read()
            except OSError as exc:
                raise DslError(
                    "INCLUDE_NOT_FOUND",
                    f"cannot read included file {path_attr!r}: {exc.strerror}",
                    display,
                    element.line,
                    element.col,
                ) from None
            out.loaded.add(real)
            included_root = _read_xml(text, resolved)
            _collect_document(
                included_root,
                resolved,
                os.path.dirname(resolved),
                out,
                active + (real,),
                top=False,
            )
        elif element.tag == "BehaviorTree":
            tree_id = element.attrs.get("ID")
            if not tree_id:
                raise DslError(
                    "MISSING_ATTRIBUTE",
                    "<BehaviorTree> needs an ID attribute",
                    display,
                    element.line,
                    element.col,
                )
            if tree_id in out.trees:
                raise DslError(
                    "DUPLICATE_TREE",
                    f"tree {tree_id!r} is already defined in {out.tree_files[tree_id]}",
                    display,
                    element.line,
                    element.col,
                )
            if len(element.children) != 1:
                raise DslError(
                    "PARSE",
                    f"<BehaviorTree> holds {len(element.children)} elements, "
                    "expected exactly one child node",
                    display,
                    element.line,
                    element.col,
                )
            root_child = _build_node(element.children[0], display)
            out.trees[tree_id] = TreeDefinition(id=tree_id, root_child=root_child)
            out.tree_files[tree_id] = display
        else:
            raise DslError(
                "UNKNOWN_ELEMENT",
                f"unexpected element <{element.tag}> under <root>",
                display,
                element.line,
                element.col,
            )
    return entry_attr


def parse(text: str, base_path: str = ".") -> TreeModel:
    """Parse document text into a validated model, resolving includes.

    ``base_path`` locates the document: a directory means "the text lives
    here" (includes resolve inside it), a file path additionally names the
    document in error messages.  Grammar and position problems raise
    :class:`DslError`; structural problems (arities, bounds, unresolved
    references) raise :class:`~tickforge.model.InvalidModelError` carrying
    every diagnostic at once.
    """
    if os.path.isdir(base_path):
        directory, display = base_path, "<string>"
    else:
        directory, display = os.path.dirname(base_path) or ".", base_path

    root = _read_xml(text, display)
    collected = _Collected()
    entry_attr = _collect_document(
        root, display, directory, collected, (os.path.realpath(display),), top=True
    )

    if not collected.trees:
        raise DslError("PARSE", "document defines no trees", display, root.line, root.col)
    if entry_attr is None:
        if len(collected.trees) == 1:
            entry_attr = next(iter(collected.trees))
        else:
            raise DslError(
                "PARSE",
                "multiple trees defined; <root> needs main_tree_to_execute",
                display,
                root.line,
                root.col,
            )
    model = TreeModel(
        trees=collected.trees, entry=entry_attr, includes=tuple(collected.includes)
    )
    diagnostics = validate(model)
    if diagnostics:
        raise InvalidModelError(diagnostics)
    return model


def parse_file(path: str) -> TreeModel:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise DslError(
            "INCLUDE_NOT_FOUND", f"cannot read {path!r}: {exc.strerror}", str(path), 0, 0
        ) from None
    return parse(text, str(path))


# -- canonical output --------------------------------------------------------

_ATTR_ESCAPES = {
    "&": "&amp;",
    "<": "&lt;",
    ">": "&gt;",
    '"': "&quot;",
    "\n": "&#10;",
    "\t": "&#9;",
    "\r": "&#13;",
}


def _escape_attr(value: str) -> str:
    return "".join(_ATTR_ESCAPES.get(ch, ch) for ch in value)


def _element_parts(node: NodeSpec) -> tuple[str, dict]:
    """Map a node back to (element tag, attributes)."""
    attrs: dict[str, str] = {}
    if node.kind is NodeKind.SEQUENCE:
        tag = {
            CompositeVariant.MEMORY: "Sequence",
            CompositeVariant.STAR: "SequenceStar",
            CompositeVariant.REACTIVE: "ReactiveSequence",
        }[node.variant]
    elif node.kind is NodeKind.SELECTOR:
        tag = {
            CompositeVariant.MEMORY: "Fallback",
            CompositeVariant.STAR: "FallbackStar",
            CompositeVariant.REACTIVE: "ReactiveFallback",
        }[node.variant]
    elif node.kind is NodeKind.PARALLEL:
        tag = "Parallel"
    elif node.kind is NodeKind.DECORATOR:
        tag = {
            DecoratorKind.INVERTER: "Inverter",
            DecoratorKind.FORCE_SUCCESS: "ForceSuccess",
            DecoratorKind.REPEAT: "Repeat",
            DecoratorKind.RETRY: "RetryUntilSuccessful",
        }[node.variant]
    elif node.kind is NodeKind.SUBTREE_REF:
        tag = "SubTree"
        attrs["ID"] = node.leaf_id or ""
    elif node.kind is NodeKind.ACTION:
        if node.leaf_id in BUILTIN_ACTION_ELEMENTS:
            tag = node.leaf_id
        else:
            tag = "Action"
            attrs["ID"] = node.leaf_id or ""
    else:
        if node.leaf_id in BUILTIN_CONDITION_ELEMENTS:
            tag = node.leaf_id
        else:
            tag = "Condition"
            attrs["ID"] = node.leaf_id or ""
    if node.name is not None:
        attrs["name"] = node.name
    attrs.update(node.params)
    return tag, attrs


def _emit_node(node: NodeSpec, depth: int, lines: list) -> None:
    tag, attrs = _element_parts(node)
    rendered = "".join(
        f' {key}="{_escape_attr(str(value))}"' for key, value in sorted(attrs.items())
    )
    pad = "  " * depth
    if node.children:
        lines.append(f"{pad}<{tag}{rendered}>")
        for child in node.children:
            _emit_node(child, depth + 1, lines)
        lines.append(f"{pad}</{tag}>")
    else:
        lines.append(f"{pad}<{tag}{rendered}/>")


def _ordered_trees(model: TreeModel) -> list[TreeDefinition]:
    order = []
    if model.entry in model.trees:
        order.append(model.trees[model.entry])
    for tree_id in sorted(model.trees):
        if tree_id != model.entry:
            order.append(model.trees[tree_id])
    return order


def serialize(model: TreeModel) -> str:
    """Canonical single-document form of a model (includes are flattened)."""
    lines = [f'<root main_tree_to_execute="{_escape_attr(model.entry)}">']
    for tree in _ordered_trees(model):
        lines.append(f'  <BehaviorTree ID="{_escape_attr(tree.id)}">')
        _emit_node(tree.root_child, 2, lines)
        lines.append("  </BehaviorTree>")
    lines.append("</root>")
    return "\n".join(lines) + "\n"


# -- DOT export --------------------------------------------------------------


def _dot_label(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(model: TreeModel, expanded: bool = True) -> str:
    """Graphviz digraph of the model.

    Expanded (default): references are inlined and a single tree is drawn
    under one root vertex.  Unexpanded: every definition is drawn as its own
    tree and references appear as dashed vertices naming their target.
    Requires a valid model when expanding.
    """
    from .model import node_display_label

    lines = [
        "digraph behavior_tree {",
        '  node [fontname="Helvetica"];',
    ]
    counter = [0]

    def vertex(label: str, shape: str, dashed: bool = False) -> str:
        vid = f"n{counter[0]}"
        counter[0] += 1
        style = ' style="dashed"' if dashed else ""
        lines.append(f'  {vid} [label="{_dot_label(label)}" shape={shape}{style}];')
        return vid

    def walk(node: NodeSpec, parent: str) -> None:
        if node.kind is NodeKind.SUBTREE_REF:
            vid = vertex(node_display_label(node), "box", dashed=True)
        elif node.is_composite:
            vid = vertex(node_display_label(node), "box")
        else:
            vid = vertex(node_display_label(node), "ellipse")
        lines.append(f"  {parent} -> {vid};")
        for child in node.children:
            walk(child, vid)

    if expanded:
        diagnostics = validate(model)
        if diagnostics:
            raise InvalidModelError(diagnostics)
        tree = expand_subtrees(model)
        root = vertex("Root", "diamond")
        walk(tree.root_child, root)
    else:
        for tree in _ordered_trees(model):
            root = vertex(f"Root {tree.id}", "diamond")
            walk(tree.root_child, root)

    lines.append("}")
    return "\n".join(lines) + "\n"
