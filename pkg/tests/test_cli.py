"""Command-line surface: subcommands, output formats, exit codes."""

import json

import pytest

import tickforge
from tickforge.cli import main

CORPUS = tickforge.corpus_dir()
HANS = str(CORPUS / "hans_inspector.xml")
HANS_BINDINGS = str(CORPUS / "hans_bindings.toml")
MIRON = str(CORPUS / "miron_simple.xml")
BUNDLES = str(CORPUS / "bundles_home.xml")
SPLIT = str(CORPUS / "bundles_split.xml")
DYNO1 = str(CORPUS / "dyno_m1.xml")
DYNO2 = str(CORPUS / "dyno_m2.xml")
BAD = str(CORPUS / "bad_decorator.xml")


@pytest.fixture(autouse=True)
def plain_output(monkeypatch):
    monkeypatch.setenv("TICKFORGE_COLOR", "never")


def write_model(tmp_path, body, name="model.xml"):
    path = tmp_path / name
    path.write_text(
        f'<root><BehaviorTree ID="Main">{body}</BehaviorTree></root>',
        encoding="utf-8",
    )
    return str(path)


# -- run ---------------------------------------------------------------------


def test_run_mission_traces_and_succeeds(capsys):
    assert main(["run", HANS, "--bindings", HANS_BINDINGS]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0].startswith("epoch=0 ")
    assert lines[-1] == "result=SUCCESS epochs=2"


def test_run_failure_exit_code(tmp_path, capsys):
    path = write_model(tmp_path, "<AlwaysFailure/>")
    assert main(["run", path]) == 1
    assert "result=FAILURE" in capsys.readouterr().out


def test_run_still_running_at_the_cap(tmp_path, capsys):
    path = write_model(tmp_path, "<AlwaysRunning/>")
    assert main(["run", path, "--max-epochs", "3"]) == 2
    assert "result=RUNNING epochs=3" in capsys.readouterr().out


def test_run_writes_trace_file_when_asked(tmp_path, capsys):
    path = write_model(tmp_path, "<AlwaysSuccess/>")
    trace_path = tmp_path / "trace.log"
    assert main(["run", path, "--trace", str(trace_path)]) == 0
    out = capsys.readouterr().out
    assert out == "result=SUCCESS epochs=1\n"
    assert trace_path.read_text().startswith("epoch=0 ")


def test_run_jsonl_trace_parses(tmp_path, capsys):
    path = write_model(tmp_path, "<AlwaysSuccess/>")
    assert main(["run", path, "--trace-format", "jsonl"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    records = [json.loads(line) for line in lines[:-1]]
    assert all({"epoch", "path", "name", "status"} == set(r) for r in records)


def test_run_missing_file_is_a_usage_class_error(capsys):
    assert main(["run", "/nonexistent/model.xml"]) == 3


def test_run_invalid_model_reports_diagnostics(capsys):
    assert main(["run", BAD]) == 3
    assert "DECORATOR_ARITY" in capsys.readouterr().err


def test_run_unbound_leaf_is_a_runtime_error(capsys):
    assert main(["run", MIRON]) == 4
    assert "no behavior registered" in capsys.readouterr().err


# -- metrics -----------------------------------------------------------------


def test_metrics_table_shows_golden_values(capsys):
    assert main(["metrics", HANS]) == 0
    out = capsys.readouterr().out
    row = [l for l in out.splitlines() if "hans_inspector" in l][0]
    assert row.split()[1:] == ["8", "5", "50%", "50%", "1.6"]
    assert "sequence 50%" in out and "decorator 50%" in out


def test_metrics_rows_are_json(capsys):
    assert main(["metrics", HANS, MIRON, "--format", "rows"]) == 0
    rows = [json.loads(l) for l in capsys.readouterr().out.strip().splitlines()]
    models = [r for r in rows if r.get("type") == "model"]
    assert {m["size"] for m in models} == {8, 7}


def test_metrics_authored_counts_references_as_leaves(capsys):
    assert main(["metrics", BUNDLES, "--format", "rows"]) == 0
    expanded = [
        json.loads(l) for l in capsys.readouterr().out.strip().splitlines()
    ][0]
    assert main(["metrics", BUNDLES, "--authored", "--format", "rows"]) == 0
    authored = [
        json.loads(l) for l in capsys.readouterr().out.strip().splitlines()
    ][0]
    assert expanded["size"] == 10
    assert authored["size"] == 6


# -- reuse -------------------------------------------------------------------


def test_reuse_reports_reference_sites(capsys):
    assert main(["reuse", BUNDLES]) == 0
    out = capsys.readouterr().out
    assert "moveRoboterPosition" in out and "x4" in out.replace(" ", "")
    assert "Recharge" in out


def test_reuse_reports_clone_pairs(capsys):
    assert main(["reuse", DYNO1, DYNO2]) == 0
    out = capsys.readouterr().out
    assert "1.000" in out


def test_reuse_reports_include_edges(capsys):
    assert main(["reuse", SPLIT]) == 0
    assert "bundles_recharge.xml" in capsys.readouterr().out


def test_reuse_rows_format(capsys):
    assert main(["reuse", BUNDLES, "--format", "rows"]) == 0
    rows = [json.loads(l) for l in capsys.readouterr().out.strip().splitlines()]
    kinds = {r["type"] for r in rows}
    assert "reference" in kinds


def test_reuse_threshold_is_checked(capsys):
    assert main(["reuse", DYNO1, "--clone-threshold", "1.5"]) == 3


# -- viz ---------------------------------------------------------------------


def test_viz_prints_dot(capsys):
    assert main(["viz", HANS]) == 0
    out = capsys.readouterr().out
    assert out.startswith("digraph")
    assert out.count("->") == 8


def test_viz_writes_output_file(tmp_path, capsys):
    target = tmp_path / "tree.dot"
    assert main(["viz", HANS, "-o", str(target)]) == 0
    assert target.read_text().startswith("digraph")


def test_viz_authored_keeps_references(capsys):
    assert main(["viz", BUNDLES, "--authored"]) == 0
    assert "dashed" in capsys.readouterr().out


# -- lint --------------------------------------------------------------------


def test_lint_flags_findings(capsys):
    assert main(["lint", BAD]) == 1
    assert "DECORATOR_ARITY" in capsys.readouterr().out


def test_lint_clean_files_pass(capsys):
    assert main(["lint", HANS, MIRON, BUNDLES]) == 0
    assert "no findings" in capsys.readouterr().out


def test_lint_reports_parse_errors_as_findings(tmp_path, capsys):
    path = tmp_path / "broken.xml"
    path.write_text("<root><BehaviorTree>", encoding="utf-8")
    assert main(["lint", str(path)]) == 1


# -- oracle-diff --------------------------------------------------------------


def test_oracle_diff_random_campaign(capsys):
    assert main(["oracle-diff", "--random", "25", "--seed", "3"]) == 0
    assert "0 divergences" in capsys.readouterr().out


def test_oracle_diff_needs_exactly_one_source(capsys):
    assert main(["oracle-diff"]) == 3
    assert main(["oracle-diff", HANS, "--random", "5"]) == 3


def test_oracle_diff_scripted_corpus_model(capsys):
    scripted = str(CORPUS / "hans_scripted_bindings.toml")
    assert main(["oracle-diff", HANS, "--bindings", scripted]) == 0
    assert "0 divergences" in capsys.readouterr().out


# -- exit codes and determinism --------------------------------------------------


def test_usage_errors_exit_three(capsys):
    assert main([]) == 3
    assert main(["frobnicate"]) == 3
    assert main(["run"]) == 3
    assert main(["run", HANS, "--nope"]) == 3


def test_repeated_invocations_are_byte_identical(capsys):
    assert main(["metrics", HANS, MIRON, BUNDLES]) == 0
    first = capsys.readouterr().out
    assert main(["metrics", HANS, MIRON, BUNDLES]) == 0
    assert capsys.readouterr().out == first

    assert main(["run", HANS, "--bindings", HANS_BINDINGS]) == 0
    first = capsys.readouterr().out
    assert main(["run", HANS, "--bindings", HANS_BINDINGS]) == 0
    assert capsys.readouterr().out == first
