import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from archsubst import load_model, parse_model, parse_scenario, reachable_graph, run_path
from archsubst.engine import (
    TRUE,
    And,
    Compare,
    Interactive,
    Not,
    Or,
    Present,
    Random,
    Scripted,
    apply,
    pick_up,
)
from archsubst.errors import (
    BoundExceeded,
    EditFailed,
    EmptyChoiceSet,
    GuardFailed,
    InconsistentResult,
    ScriptExhausted,
    ScriptMismatch,
    UnknownOperation,
)
from archsubst.model import STARTED


@pytest.fixture(scope="module")
def pre():
    from conftest import CORPUS

    return load_model(CORPUS / "http_pre.arch")


def enabled_by_hand(c):
    """The pre-level guards of the corpus, evaluated directly on the configuration."""
    cache = "CacheHandler" in c.components
    out = set()
    if not cache and c.value["deviation"] >= 20:
        out.add("AddCacheHandler")
    if cache:
        out.add("RemoveCacheHandler")
        if c.value["memorySize"] < 3:
            out.add("MemorySizeUp")
        if c.value["memorySize"] > 1:
            out.add("MemorySizeDown")
        if c.value["validityDuration"] < 3:
            out.add("DurationValidityUp")
        if c.value["validityDuration"] > 1:
            out.add("DurationValidityDown")
    out.add("removeFileServer" if "FileServer2" in c.components else "AddFileServer")
    return sorted(out)


def test_http_model_shape(pre):
    assert len(pre.initial.components) == 6
    assert pre.names == sorted([
        "AddCacheHandler", "RemoveCacheHandler", "AddFileServer", "removeFileServer",
        "MemorySizeUp", "MemorySizeDown", "DurationValidityUp", "DurationValidityDown",
    ])


def test_enabled_set_on_initial_configuration(pre):
    assert pre.enabled(pre.initial) == enabled_by_hand(pre.initial)
    assert pre.enabled(pre.initial) == [
        "DurationValidityDown", "DurationValidityUp", "MemorySizeDown", "MemorySizeUp",
        "RemoveCacheHandler", "removeFileServer",
    ]


def test_enabled_matches_hand_evaluation_everywhere(pre):
    graph = reachable_graph(pre, 1000)
    for c in graph.nodes:
        assert pre.enabled(c) == enabled_by_hand(c)


def test_add_cache_handler_binds_and_starts(pre):
    c0 = pre.apply(pre.initial, "RemoveCacheHandler")
    assert "CacheHandler" not in c0.components
    c1 = pre.apply(c0, "AddCacheHandler")
    assert c1.binding["ch_cache"] == "rh_cache"
    assert c1.state["CacheHandler"] == STARTED
    assert (c1.value["memorySize"], c1.value["validityDuration"]) == (1, 1)


def test_add_then_remove_is_identity(pre):
    c0 = pre.apply(pre.initial, "RemoveCacheHandler")
    assert pre.apply(pre.apply(c0, "AddCacheHandler"), "RemoveCacheHandler") == c0


def test_memory_size_up_steps_by_one_and_stops_at_bound(pre):
    c = pre.apply(pre.initial, "MemorySizeUp")
    assert c.value["memorySize"] == pre.initial.value["memorySize"] + 1 == 3
    assert "MemorySizeUp" not in pre.enabled(c)
    with pytest.raises(GuardFailed):
        pre.apply(c, "MemorySizeUp")


def test_reachable_graph_matches_state_lattice(pre):
    graph = reachable_graph(pre, 1000)
    level = pre.initial.ptypes["Level"]
    cache_states = 1 + len(level.values()) ** 2
    assert len(graph.nodes) == 2 * cache_states == 20
    # edges counted from the guards: cache moves per (memorySize, validityDuration) cell
    moves = sum((m < 3) + (m > 1) + (v < 3) + (v > 1) + 1
                for m, v in itertools.product(level.values(), repeat=2))
    per_fs2 = 1 + moves + cache_states  # add cache, cache moves, file server toggle
    assert len(graph.edges) == 2 * per_fs2 == 88


def test_bound_exceeded(pre):
    with pytest.raises(BoundExceeded):
        reachable_graph(pre, 19)
    assert len(reachable_graph(pre, 20).nodes) == 20


def test_graph_is_deterministic_and_exported(pre):
    a = reachable_graph(pre, 100).to_dot()
    b = reachable_graph(load_model(pre_path()), 100).to_dot()
    assert a == b
    assert a.startswith("digraph reachable {") and 'shape="doublecircle"' in a


def pre_path():
    from conftest import CORPUS

    return CORPUS / "http_pre.arch"


def test_fig5_path_snapshots(pre):
    from conftest import CORPUS

    script = parse_scenario((CORPUS / "fig5.scn").read_text())
    path = run_path(pre, Scripted(script.ops), len(script.ops))
    assert path.labels == list(script.ops)
    snap = [("CacheHandler" in c.components, "FileServer2" in c.components,
             c.value.get("memorySize"), c.value.get("validityDuration")) for c in path.configurations]
    assert snap == [
        (True, True, 2, 2),
        (False, True, None, None),
        (True, True, 1, 1),
        (True, True, 2, 1),
        (True, True, 2, 2),
        (True, False, 2, 2),
        (True, False, 1, 2),
        (True, True, 1, 2),
    ]


def test_apply_is_atomic_on_failure():
    m = parse_model("""
        component A { provides a : I; param v : [0..1] = 1; state started; }
        reconfiguration Bad { set v := 0; destroy A; }
    """)
    before = m.initial
    with pytest.raises(EditFailed):
        apply(before, m.op("Bad"))
    assert m.initial == before and before.value["v"] == 1
    assert m.enabled(before) == []


def test_inconsistent_result_disables_operation():
    m = parse_model("""
        component A { provides a : I; requires r : I optional; state started; }
        component B { provides b : I; state started; }
        bind B.b -> A.r;
        reconfiguration Harden { stop A; }
        reconfiguration Break { unbind B.b; }
    """)
    assert m.enabled(m.initial) == ["Break", "Harden"]
    m2 = parse_model("""
        component A { provides a : I; requires r : I mandatory; state started; }
        component B { provides b : I; state started; }
        bind B.b -> A.r;
        reconfiguration Break { unbind B.b; }
    """)
    with pytest.raises(InconsistentResult):
        m2.apply(m2.initial, "Break")
    assert m2.enabled(m2.initial) == []


def test_unknown_operation():
    m = parse_model("component A { provides a : I; }")
    with pytest.raises(UnknownOperation):
        m.apply(m.initial, "Nope")


def test_guard_rendering_parenthesises_nested_connectives():
    g = And((Or((Present("A"), Compare("v", "<", 3))), Not(Present("B"))))
    assert str(g) == "(present(A) or v < 3) and not present(B)"
    assert str(TRUE) == "true"


def test_compare_on_absent_parameter_is_false(pre):
    c = pre.apply(pre.initial, "RemoveCacheHandler")
    assert not Compare("memorySize", "<", 3).holds(c)


def test_scripted_strategy_errors():
    s = Scripted(["A"])
    with pytest.raises(ScriptMismatch):
        s.choose(["B"])
    assert s.choose(["A", "B"]) == "A" and s.remaining == 0
    with pytest.raises(ScriptExhausted):
        s.choose(["A"])
    with pytest.raises(EmptyChoiceSet):
        pick_up([], Random(0))


def test_interactive_strategy_sees_sorted_enabled_set(pre):
    offered = []

    def channel(options):
        offered.append(options)
        return options[0]

    run_path(pre, Interactive(channel), 3)
    assert offered[0] == pre.enabled(pre.initial)


@given(st.integers(0, 10_000))
def test_random_strategy_is_reproducible(seed):
    from conftest import CORPUS

    spec = load_model(CORPUS / "http_pre.arch")
    a = run_path(spec, Random(seed), 15).labels
    b = run_path(spec, Random(seed), 15).labels
    assert a == b
