"""Built-in leaf behaviors and parameter resolution."""

import pytest

from tickforge.engine import NodeState
from tickforge.leaves import (
    builtin_registry,
    make_builtin,
    parse_status_list,
    resolve_param,
)
from tickforge.model import Blackboard, BlackboardMissError, Status
from treebuild import F, R, S, action, condition, epoch_statuses, instance, seq


def tick_builtins(name, board=None, **params):
    behavior = make_builtin(name)
    return behavior.tick(params, board or Blackboard(), NodeState())


# -- status scripting ------------------------------------------------------------


def test_constant_status_leaves():
    assert tick_builtins("AlwaysSuccess") is S
    assert tick_builtins("AlwaysFailure") is F
    assert tick_builtins("AlwaysRunning") is R


def test_parse_status_list_accepts_names_and_letters():
    assert parse_status_list("SUCCESS,FAILURE,RUNNING") == [S, F, R]
    assert parse_status_list(" s, F ,r ") == [S, F, R]
    with pytest.raises(ValueError):
        parse_status_list("S,MAYBE")
    with pytest.raises(ValueError):
        parse_status_list("")


def test_scripted_status_replays_then_cycles():
    behavior = make_builtin("ScriptedStatus")
    state = NodeState()
    board = Blackboard()
    params = {"statuses": "S,F"}
    got = [behavior.tick(params, board, state) for _ in range(5)]
    assert got == [S, F, S, F, S]


def test_scripted_status_node_params_override_constructor_default():
    behavior = make_builtin("ScriptedStatus", {"statuses": "F"})
    state = NodeState()
    assert behavior.tick({}, Blackboard(), state) is F
    assert behavior.tick({"statuses": "S"}, Blackboard(), state) is S


def test_scripted_status_without_a_script_is_an_error():
    with pytest.raises(ValueError):
        tick_builtins("ScriptedStatus")


# -- blackboard leaves ------------------------------------------------------------


def test_set_blackboard_writes_typed_literals():
    board = Blackboard()
    assert tick_builtins("SetBlackboard", board, key="n", value="3") is S
    assert board.read("n") == 3


def test_set_blackboard_copies_referenced_entries():
    board = Blackboard({"src": 2.5})
    tick_builtins("SetBlackboard", board, key="dst", value="{src}")
    assert board.read("dst") == 2.5


def test_compare_blackboard_coerces_to_the_entry_type():
    board = Blackboard({"battery": 35})
    assert tick_builtins("CompareBlackboard", board, key="battery", op="gt", value="20") is S
    assert tick_builtins("CompareBlackboard", board, key="battery", op="lt", value="20") is F


def test_compare_blackboard_defaults_to_equality():
    board = Blackboard({"mode": "lidar"})
    assert tick_builtins("CompareBlackboard", board, key="mode", value="lidar") is S
    assert tick_builtins("CompareBlackboard", board, key="mode", value="camera") is F


def test_compare_blackboard_missing_key_is_a_miss():
    with pytest.raises(BlackboardMissError):
        tick_builtins("CompareBlackboard", Blackboard(), key="ghost", value="1")


def test_compare_blackboard_rejects_list_ordering():
    board = Blackboard({"xs": ["a"]})
    with pytest.raises(TypeError):
        tick_builtins("CompareBlackboard", board, key="xs", op="lt", value="a")


def test_pop_from_list_takes_the_front_element():
    board = Blackboard({"stack": ["wp1", "wp2"]})
    assert tick_builtins("PopFromList", board, list_key="stack", out_key="cur") is S
    assert board.read("cur") == "wp1"
    assert board.read("stack") == ["wp2"]


def test_pop_from_empty_list_fails_without_writing():
    board = Blackboard({"stack": []})
    assert tick_builtins("PopFromList", board, list_key="stack", out_key="cur") is F
    assert not board.has("cur")
    assert board.read("stack") == []


def test_pop_from_list_drains_then_fails():
    board = Blackboard({"stack": ["a", "b"]})
    inst = instance(
        seq(action("PopFromList", list_key="stack", out_key="cur")),
        blackboard=board,
    )
    assert epoch_statuses(inst, 3) == [S, S, F]


# -- parameter resolution -----------------------------------------------------------


def test_resolve_param_literal_and_reference():
    board = Blackboard({"target": "dock"})
    assert resolve_param({"goal": "home"}, "goal", board) == "home"
    assert resolve_param({"goal": "{target}"}, "goal", board) == "dock"


def test_resolve_param_default_and_missing_reference():
    board = Blackboard()
    assert resolve_param({}, "speed", board, default="1.5") == 1.5
    with pytest.raises(BlackboardMissError):
        resolve_param({"goal": "{ghost}"}, "goal", board)


# -- registry -------------------------------------------------------------------------


def test_registry_contains_every_builtin():
    registry = builtin_registry()
    assert set(registry) == {
        "AlwaysSuccess",
        "AlwaysFailure",
        "AlwaysRunning",
        "ScriptedStatus",
        "SetBlackboard",
        "CompareBlackboard",
        "PopFromList",
    }


def test_unknown_builtin_name_is_an_error():
    with pytest.raises(ValueError):
        make_builtin("TeleportRobot")


def test_condition_elements_are_tickable_in_a_tree():
    board = Blackboard({"battery": 50})
    inst = instance(
        seq(condition("CompareBlackboard", key="battery", op="ge", value="20")),
        blackboard=board,
    )
    assert inst.tick_root() is S
