"""Acceptance gate: nine binding checks with explicit tolerances.

Each test prints one PASS line on success (visible under ``pytest -rA`` or
``-s``); under ``pytest -v`` the per-test verdicts serve as the pass/fail
summary.  Golden values are exact; campaign checks demand zero divergences;
every timing bound is wall-clock via ``time.perf_counter``.
"""

import itertools
import random
import time

import tickforge
from tickforge.analyzer import analyze_reuse, detect_reference_reuse, metrics
from tickforge.bindings import load_bindings
from tickforge.engine import EngineInstance, run
from tickforge.model import (
    Blackboard,
    Status,
    expand_subtrees,
    structurally_equal,
)
from tickforge.oracle import compare_runs
from tickforge.randtrees import random_model, random_scripted_tree
from tickforge.xmlio import parse, parse_file, serialize
from treebuild import (
    F,
    R,
    S,
    action,
    epoch_statuses,
    instance,
    inverter,
    par,
    retry,
    scripted,
    sel,
    seq,
    tree,
)

CORPUS = tickforge.corpus_dir()


def corpus_model(name):
    return parse_file(str(CORPUS / name))


def timed(fn):
    started = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - started


def test_c1_golden_metrics_inspection_mission():
    def measure():
        return metrics(expand_subtrees(corpus_model("hans_inspector.xml")))

    m, elapsed = timed(measure)
    assert (m.size, m.depth) == (8, 5)
    assert (m.composite_pct, m.leaf_pct) == (50, 50)
    assert m.abf == 1.6
    assert m.breakdown == {"sequence": 50, "selector": 0, "parallel": 0, "decorator": 50}
    assert elapsed < 1.0
    print("\nACCEPTANCE 1 PASS: inspection-mission metrics 8/5/50%/50%/1.6 exact")


def test_c2_golden_metrics_flat_delivery():
    def measure():
        return metrics(expand_subtrees(corpus_model("miron_simple.xml")))

    m, elapsed = timed(measure)
    assert (m.size, m.depth) == (7, 2)
    assert m.composite_pct == 14  # nearest-integer; branching factor not asserted
    assert elapsed < 1.0
    print("ACCEPTANCE 2 PASS: flat-delivery metrics 7/2/14% exact")


def test_c3_mission_semantics_from_the_trace():
    def mission():
        bindings = load_bindings(str(CORPUS / "hans_bindings.toml"))
        inst = EngineInstance.from_model(
            corpus_model("hans_inspector.xml"),
            Blackboard(bindings.blackboard),
            bindings.behaviors,
        )
        return run(inst, max_epochs=100)

    (status, trace), elapsed = timed(mission)
    counts = trace.tick_counts()
    assert status is Status.SUCCESS
    assert counts["Explore"] == 3
    assert counts["MoveBase"] == 3
    assert counts["PopFromList"] == 4  # three waypoints plus the draining failure
    assert elapsed < 1.0
    print("ACCEPTANCE 3 PASS: mission Success with Explore=3 MoveBase=3 Pop=4 ticks")


def test_c4_retry_reattempts_within_one_epoch():
    inst = instance(retry(10, scripted("F,F,F,S", name="attempt")))
    assert inst.tick_root() is S
    assert inst.epoch == 1
    assert inst.trace.tick_counts()["attempt"] == 4
    print("ACCEPTANCE 4 PASS: retry recovered in a single epoch after 4 child ticks")


def test_c5_parallel_policy_exhaustive_oracle():
    def sweep():
        letter = {S: "S", F: "F", R: "R"}
        checked = 0
        for n in (2, 3, 4):
            for m in range(1, n + 1):
                for combo in itertools.product((S, F, R), repeat=n):
                    succeeded = sum(1 for s in combo if s is S)
                    failed = sum(1 for s in combo if s is F)
                    if succeeded >= m:
                        expected = S
                    elif failed > n - m:
                        expected = F
                    else:
                        expected = R
                    children = [scripted(letter[s]) for s in combo]
                    assert instance(par(m, *children)).tick_root() is expected
                    checked += 1
        return checked

    checked, elapsed = timed(sweep)
    assert checked == 423  # sum over N of N * 3^N assignments
    assert elapsed < 5.0
    print(f"ACCEPTANCE 5 PASS: parallel policy matches the counting oracle on {checked} cases")


def test_c6_differential_campaign():
    def campaign():
        rng = random.Random(0)
        divergences = 0
        for _ in range(500):
            tree_def = random_scripted_tree(rng)
            divergences += len(compare_runs(EngineInstance(tree_def), epochs=20))
        return divergences

    divergences, elapsed = timed(campaign)
    assert divergences == 0
    assert elapsed < 30.0
    print("ACCEPTANCE 6 PASS: 500 random trees x 20 epochs, engine == oracle")


def test_c7_round_trip_corpus_and_random_models():
    def round_trips():
        failures = 0
        for path in sorted(CORPUS.glob("*.xml")):
            if path.name.startswith("bad_"):
                continue  # the deliberately invalid linting sample
            model = parse_file(str(path))
            if not structurally_equal(parse(serialize(model)), model):
                failures += 1
        rng = random.Random(1)
        for _ in range(200):
            model = random_model(rng)
            if not structurally_equal(parse(serialize(model)), model):
                failures += 1
        return failures

    failures, elapsed = timed(round_trips)
    assert failures == 0
    assert elapsed < 10.0
    print("ACCEPTANCE 7 PASS: corpus + 200 random models round-trip unchanged")


def test_c8_reuse_detection_all_three_mechanisms():
    entries = detect_reference_reuse(corpus_model("bundles_home.xml"))
    recharge = [e for e in entries if e.target == "Recharge"]
    assert recharge and recharge[0].kind == "subtree" and recharge[0].count == 2

    report = analyze_reuse(
        [
            ("dyno_m1.xml", corpus_model("dyno_m1.xml")),
            ("dyno_m2.xml", corpus_model("dyno_m2.xml")),
        ],
        threshold=0.8,
    )
    (pair,) = report.clone_pairs
    assert pair.similarity == 1.0

    split = corpus_model("bundles_split.xml")
    assert split.includes == (("bundles_split.xml", "bundles_recharge.xml"),)
    print("ACCEPTANCE 8 PASS: reference, clone, and inclusion reuse all detected")


def test_c9_invariant_sweep():
    # counter hygiene: completions zero the counter; star keeps its cursor
    # only on the early-exit status
    from tickforge.model import CompositeVariant

    inst = instance(retry(2, scripted("F")))
    inst.tick_root()
    assert inst.states[(0,)].counter == 0
    star = instance(
        seq(scripted("S"), scripted("F"), variant=CompositeVariant.STAR)
    )
    star.tick_root()
    assert star.states[(0,)].cursor == 1
    memory = instance(seq(scripted("S"), scripted("F")))
    memory.tick_root()
    assert memory.states[(0,)].cursor == 0

    # inverter involution
    rng = random.Random(2)
    for _ in range(10):
        subtree = random_scripted_tree(rng).root_child
        assert epoch_statuses(instance(seq(subtree)), 8) == epoch_statuses(
            instance(seq(inverter(inverter(subtree)))), 8
        )

    # traversal locality: every visit nests inside its parent's visit
    inst = EngineInstance(random_scripted_tree(rng))
    for _ in range(5):
        inst.tick_root()
    stack = []
    for kind, _, path in inst.trace.markers:
        if kind == "enter":
            assert len(path) == 1 or (stack and stack[-1] == path[:-1])
            stack.append(path)
        else:
            assert stack and stack.pop() == path

    # metrics identities
    for _ in range(10):
        m = metrics(random_scripted_tree(rng))
        assert m.depth <= m.size and m.abf >= 1.0
        assert m.composite_pct + m.leaf_pct in (99, 100, 101)  # independent rounding

    # clone similarity: reflexive and symmetric
    from tickforge.analyzer import detect_clone_pairs

    a, b = random_scripted_tree(rng), random_scripted_tree(rng)
    (self_pair,) = detect_clone_pairs([a, a], threshold=1.0, names=["x", "y"])
    assert self_pair.similarity == 1.0
    ab = detect_clone_pairs([a, b], threshold=0.0001, names=["a", "b"])
    ba = detect_clone_pairs([b, a], threshold=0.0001, names=["b", "a"])
    assert [p.similarity for p in ab] == [p.similarity for p in ba]

    # determinism: identical instances tick identically
    tree_def = random_scripted_tree(rng)
    one, two = EngineInstance(tree_def), EngineInstance(tree_def)
    for _ in range(8):
        one.tick_root()
        two.tick_root()
    assert one.trace.to_lines() == two.trace.to_lines()
    print("ACCEPTANCE 9 PASS: invariant sweep (hygiene, involution, locality, metrics, clones, determinism)")
