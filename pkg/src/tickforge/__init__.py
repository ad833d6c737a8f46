"""tickforge: a behavior-tree language toolkit.

The package pairs an executable core with analysis tooling:

* :mod:`tickforge.model` defines the syntax tree, blackboard, validation,
  and subtree expansion.
* :mod:`tickforge.engine` runs models tick by tick; :mod:`tickforge.leaves`
  supplies the built-in leaf behaviors.
* :mod:`tickforge.xmlio` parses and serializes the XML dialect and exports
  Graphviz DOT.
* :mod:`tickforge.analyzer` measures models and detects reuse.
* :mod:`tickforge.oracle` is an independent reference interpreter for
  differential testing; :mod:`tickforge.randtrees` generates seeded inputs.
* :mod:`tickforge.cli` exposes everything as the ``tickforge`` command.
"""

from pathlib import Path

from .analyzer import (
    ClonePair,
    CorpusReport,
    ModelMetrics,
    ReuseEntry,
    ReuseReport,
    analyze_corpus,
    analyze_reuse,
    detect_clone_pairs,
    detect_reference_reuse,
    metrics,
)
from .bindings import BindingSet, load_bindings
from .engine import EngineInstance, LeafBehavior, NodeState, TickTrace, run
from .model import (
    Blackboard,
    BlackboardMissError,
    CompositeVariant,
    CycleError,
    DecoratorKind,
    Diagnostic,
    InvalidModelError,
    NodeKind,
    NodeSpec,
    Status,
    TreeDefinition,
    TreeModel,
    expand_subtrees,
    structurally_equal,
    validate,
)
from .oracle import compare_runs, oracle_tick
from .xmlio import DslError, parse, parse_file, serialize, to_dot

__version__ = "0.1.0"

__all__ = [
    "Status",
    "NodeKind",
    "CompositeVariant",
    "DecoratorKind",
    "NodeSpec",
    "TreeDefinition",
    "TreeModel",
    "Blackboard",
    "BlackboardMissError",
    "Diagnostic",
    "InvalidModelError",
    "CycleError",
    "validate",
    "expand_subtrees",
    "structurally_equal",
    "EngineInstance",
    "LeafBehavior",
    "NodeState",
    "TickTrace",
    "run",
    "parse",
    "parse_file",
    "serialize",
    "to_dot",
    "DslError",
    "ModelMetrics",
    "metrics",
    "ReuseEntry",
    "ClonePair",
    "ReuseReport",
    "CorpusReport",
    "detect_reference_reuse",
    "detect_clone_pairs",
    "analyze_corpus",
    "analyze_reuse",
    "BindingSet",
    "load_bindings",
    "oracle_tick",
    "compare_runs",
    "corpus_dir",
]


def corpus_dir() -> Path:
    """Directory holding the bundled example models and bindings."""
    return Path(__file__).parent / "corpus"
