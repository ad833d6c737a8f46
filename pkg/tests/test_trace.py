"""Trace export: line format, structured records, nesting."""

import json

from treebuild import F, R, S, instance, scripted, seq, sel


def two_epoch_instance():
    inst = instance(
        seq(
            scripted("S", name="check door"),
            scripted("R,S", name="walk"),
        )
    )
    inst.tick_root()
    inst.tick_root()
    return inst


def test_line_format_is_exact():
    inst = instance(seq(scripted("S", name="go")))
    inst.tick_root()
    assert inst.trace.to_lines() == [
        "epoch=0 path=0/0 name=go status=SUCCESS",
        "epoch=0 path=0 name=Sequence status=SUCCESS",
    ]


def test_epochs_count_from_zero_and_increment():
    inst = two_epoch_instance()
    assert inst.epoch == 2
    assert [e.epoch for e in inst.trace.events] == [0, 0, 0, 1, 1]


def test_whitespace_in_labels_is_underscored_in_lines():
    inst = two_epoch_instance()
    names = {line.split()[2] for line in inst.trace.to_lines()}
    assert "name=check_door" in names
    # structured records keep the exact label
    assert {"check door", "walk"} == {
        r["name"] for r in inst.trace.to_records() if r["path"] != [0]
    }


def test_every_line_is_a_four_field_record():
    inst = two_epoch_instance()
    for line in inst.trace.to_lines():
        fields = dict(part.split("=", 1) for part in line.split())
        assert set(fields) == {"epoch", "path", "name", "status"}
        assert fields["status"] in ("SUCCESS", "FAILURE", "RUNNING")
        assert all(seg.isdigit() for seg in fields["path"].split("/"))


def test_jsonl_round_trips_to_the_same_records():
    inst = two_epoch_instance()
    parsed = [json.loads(line) for line in inst.trace.to_jsonl().splitlines()]
    assert parsed == inst.trace.to_records()


def test_tick_counts_sum_over_epochs():
    inst = two_epoch_instance()
    counts = inst.trace.tick_counts()
    assert counts["check door"] == 1
    assert counts["walk"] == 2


def test_events_for_epoch_filters_exactly():
    inst = two_epoch_instance()
    assert all(e.epoch == 0 for e in inst.trace.events_for_epoch(0))
    assert all(e.epoch == 1 for e in inst.trace.events_for_epoch(1))
    assert inst.trace.events_for_epoch(7) == []


def test_children_report_before_their_parent():
    inst = instance(seq(scripted("S", name="a"), sel(scripted("F"), scripted("S"))))
    inst.tick_root()
    paths = [e.path for e in inst.trace.events]
    # completion order: leaf, leaf, leaf, selector, sequence
    assert paths.index((0, 0)) < paths.index((0,))
    assert paths.index((0, 1, 0)) < paths.index((0, 1))
    assert paths.index((0, 1)) < paths.index((0,))
