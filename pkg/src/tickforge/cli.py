"""Command-line interface.

Subcommands: ``run`` executes a model and prints its trace, ``metrics`` and
``reuse`` report over one or more models, ``viz`` emits Graphviz DOT,
``lint`` reports structural diagnostics, and ``oracle-diff`` cross-checks the
engine against the reference interpreter.

Exit codes:

* 0: success (run ended in Success; reports produced; no lint findings;
  no divergences)
* 1: failure-class outcome (run ended in Failure; lint findings;
  oracle divergences)
* 2: run still Running when the epoch cap was reached
* 3: usage or input errors (bad arguments, unparsable or invalid models,
  bad bindings)
* 4: runtime errors while ticking (unregistered leaves, blackboard misses,
  bad bounds or policies)

Color in the ``run`` result line and lint rule names follows ``TICKFORGE_COLOR``
(``always``, ``never``, or the default ``auto``, which checks whether stdout
is a tty).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from .analyzer import (
    CorpusReport,
    ReuseReport,
    ThresholdRangeError,
    analyze_corpus,
    analyze_reuse,
)
from .bindings import BindingError, BindingSet, load_bindings
from .engine import EngineInstance, run
from .model import (
    Blackboard,
    InvalidModelError,
    NodeKind,
    Status,
    TreeModel,
    iter_nodes,
)
from .oracle import compare_runs, script_for_leaf
from .randtrees import random_scripted_tree
from .xmlio import DslError, parse_file, to_dot

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_RUNNING = 2
EXIT_USAGE = 3
EXIT_RUNTIME = 4


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _use_color() -> bool:
    env = os.environ.get("TICKFORGE_COLOR", "auto").lower()
    if env == "always":
        return True
    if env == "never":
        return False
    return sys.stdout.isatty()


_STATUS_SGR = {"SUCCESS": "32", "FAILURE": "31", "RUNNING": "33"}


def _styled(text: str, sgr: str) -> str:
    if _use_color():
        return f"\x1b[{sgr}m{text}\x1b[0m"
    return text


def _norm_name(path: str) -> str:
    return path.replace(os.sep, "/")


def _make_instance(model: TreeModel, binding_set: BindingSet | None) -> EngineInstance:
    blackboard = Blackboard(binding_set.blackboard if binding_set else None)
    behaviors = binding_set.behaviors if binding_set else None
    return EngineInstance.from_model(model, blackboard, behaviors)


# -- run ----------------------------------------------------------------------


def _cmd_run(args) -> int:
    model = parse_file(args.path)
    binding_set = load_bindings(args.bindings) if args.bindings else None
    instance = _make_instance(model, binding_set)
    status, trace = run(instance, args.max_epochs, args.frequency)

    if args.trace_format == "jsonl":
        payload = trace.to_jsonl() + "\n"
    else:
        payload = "\n".join(trace.to_lines()) + "\n"
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as handle:
            handle.write(payload)
    else:
        sys.stdout.write(payload)

    colored = _styled(status.value, _STATUS_SGR[status.value])
    print(f"result={colored} epochs={instance.epoch}")
    if status is Status.SUCCESS:
        return EXIT_OK
    if status is Status.FAILURE:
        return EXIT_FAILURE
    return EXIT_RUNNING


# -- metrics ------------------------------------------------------------------


def _fmt_table(headers: list, rows: list) -> str:
    cells = [[str(c) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    for row in cells:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return "\n".join(lines)


def _breakdown_text(breakdown) -> str:
    return " ".join(f"{cat} {pct}%" for cat, pct in breakdown.items())


def _print_metrics_table(report: CorpusReport) -> None:
    rows = [
        [
            row.name,
            row.metrics.size,
            row.metrics.depth,
            f"{row.metrics.composite_pct}%",
            f"{row.metrics.leaf_pct}%",
            f"{row.metrics.abf:.1f}",
        ]
        for row in report.models
    ]
    print(_fmt_table(["model", "size", "depth", "composite", "leaf", "abf"], rows))
    if report.projects:
        print()
        print(
            _fmt_table(
                ["project", "models", "avg_size", "avg_depth"],
                [
                    [p.project, p.model_count, p.avg_size, p.avg_depth]
                    for p in report.projects
                ],
            )
        )
    if report.aggregate_breakdown is not None:
        print()
        print("composite breakdown: " + _breakdown_text(report.aggregate_breakdown))
    if report.includes:
        print()
        print("includes:")
        for model, source, target in report.includes:
            print(f"  {model}: {source} -> {target}")


def _print_metrics_rows(report: CorpusReport) -> None:
    for row in report.models:
        print(
            json.dumps(
                {
                    "type": "model",
                    "name": row.name,
                    "project": row.project,
                    "size": row.metrics.size,
                    "depth": row.metrics.depth,
                    "composite_pct": row.metrics.composite_pct,
                    "leaf_pct": row.metrics.leaf_pct,
                    "abf": row.metrics.abf,
                    "breakdown": dict(row.metrics.breakdown),
                },
                sort_keys=True,
            )
        )
    for project in report.projects:
        print(
            json.dumps(
                {
                    "type": "project",
                    "project": project.project,
                    "models": project.model_count,
                    "avg_size": project.avg_size,
                    "avg_depth": project.avg_depth,
                },
                sort_keys=True,
            )
        )
    if report.aggregate_breakdown is not None:
        print(
            json.dumps(
                {
                    "type": "aggregate_breakdown",
                    "breakdown": dict(report.aggregate_breakdown),
                },
                sort_keys=True,
            )
        )
    for model, source, target in report.includes:
        print(
            json.dumps(
                {"type": "include", "model": model, "source": source, "target": target},
                sort_keys=True,
            )
        )


def _cmd_metrics(args) -> int:
    named = [(_norm_name(p), parse_file(p)) for p in args.paths]
    report = analyze_corpus(named, expanded=not args.authored)
    if args.format == "rows":
        _print_metrics_rows(report)
    else:
        _print_metrics_table(report)
    return EXIT_OK


# -- reuse --------------------------------------------------------------------


def _print_reuse_text(report: ReuseReport, threshold: float) -> None:
    print("reference reuse:")
    if report.by_reference:
        for name, entry in report.by_reference:
            varying = (
                " (varying: " + ", ".join(entry.varying_params) + ")"
                if entry.varying_params
                else ""
            )
            print(f"  {name}: {entry.kind} {entry.target} x{entry.count}{varying}")
    else:
        print("  (none)")
    print(f"clone pairs (threshold {threshold:.2f}):")
    if report.clone_pairs:
        for pair in report.clone_pairs:
            print(f"  {pair.name_a} ~ {pair.name_b} similarity {pair.similarity:.3f}")
    else:
        print("  (none)")
    print("inclusion:")
    if report.by_inclusion:
        for model, source, target in report.by_inclusion:
            print(f"  {model}: {source} -> {target}")
    else:
        print("  (none)")


def _print_reuse_rows(report: ReuseReport) -> None:
    for name, entry in report.by_reference:
        print(
            json.dumps(
                {
                    "type": "reference",
                    "model": name,
                    "kind": entry.kind,
                    "target": entry.target,
                    "count": entry.count,
                    "varying_params": list(entry.varying_params),
                    "sites": [
                        {"tree": s.tree_id, "path": s.path, "params": dict(s.params)}
                        for s in entry.sites
                    ],
                },
                sort_keys=True,
            )
        )
    for pair in report.clone_pairs:
        print(
            json.dumps(
                {
                    "type": "clone",
                    "a": pair.name_a,
                    "b": pair.name_b,
                    "similarity": round(pair.similarity, 4),
                },
                sort_keys=True,
            )
        )
    for model, source, target in report.by_inclusion:
        print(
            json.dumps(
                {"type": "include", "model": model, "source": source, "target": target},
                sort_keys=True,
            )
        )


def _cmd_reuse(args) -> int:
    named = [(_norm_name(p), parse_file(p)) for p in args.paths]
    report = analyze_reuse(named, threshold=args.clone_threshold)
    if args.format == "rows":
        _print_reuse_rows(report)
    else:
        _print_reuse_text(report, args.clone_threshold)
    return EXIT_OK


# -- viz ----------------------------------------------------------------------


def _cmd_viz(args) -> int:
    model = parse_file(args.path)
    dot = to_dot(model, expanded=not args.authored)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(dot)
    else:
        sys.stdout.write(dot)
    return EXIT_OK


# -- lint ---------------------------------------------------------------------


def _cmd_lint(args) -> int:
    findings = 0
    for path in args.paths:
        try:
            parse_file(path)
        except DslError as exc:
            print(str(exc))
            findings += 1
        except InvalidModelError as exc:
            for diagnostic in exc.diagnostics:
                rule = _styled(diagnostic.rule, "31")
                print(
                    f"{_norm_name(path)}: {rule} at {diagnostic.path}: "
                    f"{diagnostic.message}"
                )
                findings += 1
    if findings:
        return EXIT_FAILURE
    print("no findings")
    return EXIT_OK


# -- oracle-diff ---------------------------------------------------------------


def _scripts_for_instance(model: TreeModel, binding_set: BindingSet | None):
    """Per-path oracle scripts matching how the engine will resolve leaves."""
    from .model import expand_subtrees

    tree = expand_subtrees(model)
    scripts = {}
    for path, node in iter_nodes(tree.root_child):
        if node.kind not in (NodeKind.ACTION, NodeKind.CONDITION):
            continue
        leaf_id = node.leaf_id or ""
        if binding_set and leaf_id in binding_set.specs:
            behavior_name, base_params = binding_set.specs[leaf_id]
            merged = {**base_params, **node.params}
            scripts[path] = script_for_leaf(behavior_name, merged)
        else:
            scripts[path] = script_for_leaf(leaf_id, node.params)
    return scripts


def _cmd_oracle_diff(args) -> int:
    if (args.path is None) == (args.random is None):
        return _usage_error("oracle-diff needs either a model path or --random N")

    total = 0
    if args.random is not None:
        if args.random < 1:
            return _usage_error("--random must be >= 1")
        rng = random.Random(args.seed)
        for index in range(args.random):
            tree = random_scripted_tree(rng)
            instance = EngineInstance(tree)
            for divergence in compare_runs(instance, args.epochs):
                print(f"tree {index}: {divergence}")
                total += 1
        print(
            f"checked {args.random} random trees x {args.epochs} epochs: "
            f"{total} divergences"
        )
    else:
        model = parse_file(args.path)
        binding_set = load_bindings(args.bindings) if args.bindings else None
        try:
            scripts = _scripts_for_instance(model, binding_set)
        except ValueError as exc:
            print(f"oracle-diff needs fully scripted leaves: {exc}", file=sys.stderr)
            return EXIT_USAGE
        instance = _make_instance(model, binding_set)
        for divergence in compare_runs(instance, args.epochs, scripts):
            print(f"{_norm_name(args.path)}: {divergence}")
            total += 1
        print(
            f"checked {_norm_name(args.path)} x {args.epochs} epochs: "
            f"{total} divergences"
        )
    return EXIT_OK if total == 0 else EXIT_FAILURE


def _usage_error(message: str) -> int:
    print(f"tickforge: error: {message}", file=sys.stderr)
    return EXIT_USAGE


# -- wiring ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tickforge",
        description="Behavior-tree toolkit: run models, measure them, check reuse.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    run_p = sub.add_parser("run", help="execute a model and print its trace")
    run_p.add_argument("path", help="model document (.xml)")
    run_p.add_argument("--bindings", help="TOML bindings file (leaves, blackboard)")
    run_p.add_argument(
        "--max-epochs", type=int, default=100, help="epoch cap (default 100)"
    )
    run_p.add_argument(
        "--frequency", type=float, default=None, help="epochs per second (default: unpaced)"
    )
    run_p.add_argument("--trace", help="write the trace to this file instead of stdout")
    run_p.add_argument(
        "--trace-format",
        choices=("text", "jsonl"),
        default="text",
        help="trace line format (default text)",
    )
    run_p.set_defaults(fn=_cmd_run)

    metrics_p = sub.add_parser("metrics", help="model metrics over one or more models")
    metrics_p.add_argument("paths", nargs="+", help="model documents")
    metrics_p.add_argument(
        "--format", choices=("table", "rows"), default="table", help="output format"
    )
    metrics_p.add_argument(
        "--authored",
        action="store_true",
        help="measure the authored entry tree (references as leaves) instead of the expansion",
    )
    metrics_p.set_defaults(fn=_cmd_metrics)

    reuse_p = sub.add_parser("reuse", help="reference, clone, and inclusion reuse report")
    reuse_p.add_argument("paths", nargs="+", help="model documents")
    reuse_p.add_argument(
        "--clone-threshold",
        type=float,
        default=0.8,
        help="clone similarity threshold in [0, 1] (default 0.8)",
    )
    reuse_p.add_argument(
        "--format", choices=("table", "rows"), default="table", help="output format"
    )
    reuse_p.set_defaults(fn=_cmd_reuse)

    viz_p = sub.add_parser("viz", help="emit a Graphviz DOT digraph")
    viz_p.add_argument("path", help="model document")
    viz_p.add_argument(
        "--authored",
        action="store_true",
        help="draw each definition separately with reference vertices",
    )
    viz_p.add_argument("-o", "--output", help="write DOT here instead of stdout")
    viz_p.set_defaults(fn=_cmd_viz)

    lint_p = sub.add_parser("lint", help="report structural diagnostics")
    lint_p.add_argument("paths", nargs="+", help="model documents")
    lint_p.set_defaults(fn=_cmd_lint)

    diff_p = sub.add_parser(
        "oracle-diff", help="cross-check the engine against the reference interpreter"
    )
    diff_p.add_argument("path", nargs="?", help="model document (fully scripted leaves)")
    diff_p.add_argument("--bindings", help="TOML bindings file")
    diff_p.add_argument(
        "--random", type=int, default=None, metavar="N", help="check N seeded random trees"
    )
    diff_p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    diff_p.add_argument(
        "--epochs", type=int, default=20, help="epochs per tree (default 20)"
    )
    diff_p.set_defaults(fn=_cmd_oracle_diff)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits itself on usage errors and --help
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except DslError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except InvalidModelError as exc:
        for diagnostic in exc.diagnostics:
            print(str(diagnostic), file=sys.stderr)
        return EXIT_USAGE
    except (BindingError, ThresholdRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LookupError, ValueError, TypeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
